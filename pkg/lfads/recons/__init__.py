from ._base import Reconstruction
from .gamma import Gamma, gamma_nll
from .gaussian import Gaussian
from .poisson import Poisson
from .zig import ZeroInflatedGamma

__all__ = [
    "Reconstruction",

    "Gamma",
    "Gaussian",
    "Poisson",
    "ZeroInflatedGamma",

    "gamma_nll",
]
