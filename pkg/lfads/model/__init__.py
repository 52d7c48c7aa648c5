from .config import LFADSConfig, ramp
from .gru import GRUParams, gru_cell, init_gru, orthogonal, run_gru
from .lfads import LFADS
from .output import LFADSOutput
from .params import LFADSParams

__all__ = [
    "LFADS",
    "LFADSConfig",
    "LFADSOutput",
    "LFADSParams",

    "GRUParams",
    "gru_cell",
    "init_gru",
    "orthogonal",
    "ramp",
    "run_gru",
]
