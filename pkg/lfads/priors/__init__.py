from ._base import (
    GaussianPosterior,
    Prior,
    kl_gaussian_diag,
    kl_sampled,
    make_posterior,
    sample,
    sum_per_trial,
)
from .autoregressive import AutoregressiveMultivariateNormal
from .normal import MultivariateNormal
from .student_t import MultivariateStudentT

__all__ = [
    "GaussianPosterior",
    "Prior",

    "AutoregressiveMultivariateNormal",
    "MultivariateNormal",
    "MultivariateStudentT",

    "kl_gaussian_diag",
    "kl_sampled",
    "make_posterior",
    "sample",
    "sum_per_trial",
]
