"""Secret key rates of all-optical fiber-loop quantum repeaters (GKP, Steane-GKP and QPC)."""

__version__ = "0.1.0"
