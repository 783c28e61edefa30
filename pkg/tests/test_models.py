import math

import pytest

from loopqr import chain
from loopqr.code_gkp import StategenMode
from loopqr.errors import ConfigError
from loopqr.models import (
    GkpCode,
    QpcCode,
    RateBreakdown,
    RepeaterConfig,
    SteaneGkpCode,
    as_float,
    as_int,
    code_from_mapping,
)


@pytest.mark.parametrize(
    "kwargs,field",
    [
        ({"length_km": -1.0, "n": 10}, "L"),
        ({"length_km": 100.0, "n": 0}, "n"),
        ({"length_km": 100.0, "n": 10, "m": 0}, "m"),
        ({"length_km": 100.0, "n": 10, "att_length_km": 0.0}, "L_att"),
        ({"length_km": 100.0, "n": 10, "c_fiber": -3.0}, "c_fiber"),
        ({"length_km": 100.0, "n": 10, "p_link": 1.5}, "p_link"),
        ({"length_km": 100.0, "n": 10, "p_loop": 0.0}, "p_loop"),
        ({"length_km": 100.0, "n": 10, "p_bsm": -0.5}, "p_bsm"),
    ],
)
def test_repeater_config_names_the_bad_field(kwargs, field):
    with pytest.raises(ConfigError) as excinfo:
        RepeaterConfig(**kwargs)
    assert excinfo.value.field == field
    assert str(excinfo.value).startswith(f"{field}:")


def test_repeater_config_defaults_and_geometry():
    config = RepeaterConfig(length_km=1000.0, n=20, m=50)
    assert config.segment_km == 50.0
    assert config.loop_km == 1.0
    assert (config.att_length_km, config.c_fiber, config.p_bsm) == (22.0, 2e8, 0.5)


def test_from_mapping_round_trip_is_exact():
    config = RepeaterConfig(length_km=1234.5, n=37, m=11, p_link=0.95)
    again = RepeaterConfig.from_mapping(config.to_dict())
    assert again == config
    assert chain.derive_link(again) == chain.derive_link(config)


def test_from_mapping_coerces_yaml_strings():
    config = RepeaterConfig.from_mapping({"L": "1000", "n": "100", "p_loop": "9.9e-01"})
    assert config.length_km == 1000.0
    assert config.n == 100
    assert config.p_loop == 0.99


def test_from_mapping_rejects_unknown_and_missing_keys():
    with pytest.raises(ConfigError) as excinfo:
        RepeaterConfig.from_mapping({"L": 10, "n": 2, "segments": 3})
    assert excinfo.value.field == "chain.segments"
    with pytest.raises(ConfigError) as excinfo:
        RepeaterConfig.from_mapping({"n": 2})
    assert excinfo.value.field == "L"


def test_number_coercion():
    assert as_float("x", "1e-05") == 1e-05
    assert as_int("n", 10.0) == 10
    with pytest.raises(ConfigError):
        as_float("x", True)
    with pytest.raises(ConfigError):
        as_int("n", 2.5)
    with pytest.raises(ConfigError):
        as_float("x", "ten")


def test_codes_from_mappings():
    assert code_from_mapping({"family": "gkp", "s": 18}) == GkpCode(18.0)
    assert code_from_mapping({"family": "Steane", "s": "16"}) == SteaneGkpCode(16.0)
    assert code_from_mapping({"family": "steane", "s": 16, "stategen": "bare"}).stategen_mode is StategenMode.BARE
    assert code_from_mapping({"family": "qpc", "a": 5, "b": 31}) == QpcCode(a=5, b=31)
    assert code_from_mapping({"family": "gkp", "s": math.inf}).label == "gkp(s=infdB)"


@pytest.mark.parametrize(
    "mapping,field",
    [
        ({"family": "surface", "s": 10}, "code.family"),
        ({"family": "gkp"}, "code.s"),
        ({"family": "qpc", "a": 5}, "code.b"),
        ({"family": "qpc", "a": 0, "b": 3}, "code.a"),
        ({"family": "gkp", "s": 10, "a": 3}, "code.a"),
        ({"family": "steane", "s": 10, "stategen": "sometimes"}, "code.stategen"),
        ({"family": "gkp", "s": "nan"}, "code.s"),
    ],
)
def test_bad_codes_name_the_field(mapping, field):
    with pytest.raises(ConfigError) as excinfo:
        code_from_mapping(mapping)
    assert excinfo.value.field == field


def test_code_dicts_load_back():
    for code in (GkpCode(17.5), SteaneGkpCode(14.0, StategenMode.BARE), QpcCode(a=4, b=12)):
        assert code_from_mapping(code.to_dict()) == code


def test_rate_breakdown_round_trip(long_chain):
    rate = chain.secret_key_rate(long_chain, GkpCode(18.0))
    assert RateBreakdown.from_mapping(rate.to_dict()) == rate
