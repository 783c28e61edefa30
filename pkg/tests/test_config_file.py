import pytest

from loopqr import config_file
from loopqr.errors import ConfigError
from loopqr.models import GkpCode, QpcCode, SteaneGkpCode


def test_empty_and_missing_paths(tmp_path):
    assert config_file.load_config_file(None) == {}
    empty = tmp_path / "empty.yaml"
    empty.write_text("", encoding="utf-8")
    assert config_file.load_config_file(empty) == {}


def test_output_sections_are_ignored(tmp_path):
    path = tmp_path / "doc.json"
    path.write_text('{"chain": {"L": 5, "n": 1}, "result": {"skf": 1}, "manifest": {}}', encoding="utf-8")
    assert config_file.load_config_file(path) == {"chain": {"L": 5, "n": 1}}


def test_bad_json(tmp_path):
    path = tmp_path / "doc.json"
    path.write_text("{", encoding="utf-8")
    with pytest.raises(ConfigError) as excinfo:
        config_file.load_config_file(path)
    assert excinfo.value.field == "config"


def test_top_level_must_be_mapping(tmp_path):
    path = tmp_path / "list.yaml"
    path.write_text("- 1\n- 2\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        config_file.load_config_file(path)


def test_merged_ignores_unset_overrides():
    file_cfg = {"chain": {"L": 1000, "n": 10}}
    assert config_file.merged(file_cfg, "chain", {"L": None, "n": 20}) == {"L": 1000, "n": 20}
    assert config_file.merged(file_cfg, "sweep", {"kind": None}) == {}


def test_build_code_family_switch():
    file_cfg = {"code": {"family": "steane", "s": 16, "stategen": "bare"}}
    assert config_file.build_code(file_cfg, {"s": 14}) == SteaneGkpCode(14.0, "bare")
    assert config_file.build_code(file_cfg, {"family": "gkp", "s": 20}) == GkpCode(20.0)
    assert config_file.build_code({}, {"family": "qpc", "a": 3, "b": 9}) == QpcCode(a=3, b=9)


def test_pairs_and_flags():
    assert config_file.int_pair("m_range", "1:2000") == (1, 2000)
    assert config_file.int_pair("m_range", [5, 9]) == (5, 9)
    assert config_file.float_pair("bracket", "5:30") == (5.0, 30.0)
    with pytest.raises(ConfigError):
        config_file.int_pair("m_range", "1:2:3")
    assert config_file.as_bool("flag", "yes") is True
    assert config_file.as_bool("flag", False) is False
    with pytest.raises(ConfigError):
        config_file.as_bool("flag", 3)


def test_axis_from_lists_and_strings():
    assert config_file.axis_from("m", [1, 10, 100]).values == (1, 10, 100)
    assert config_file.axis_from("n", "10,20").values == (10, 20)
    with pytest.raises(ConfigError):
        config_file.axis_from("n", 10)
