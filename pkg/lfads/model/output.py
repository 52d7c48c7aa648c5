from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..datasets.data import TrialBatch
from ..priors import GaussianPosterior
from ..tensor import Tensor


@dataclass
class LFADSOutput:
    """
    Everything one forward pass produces.

    Shapes: ``factors`` [batch x T_recon x fac_dim], ``raw`` [batch x T_recon x
    N_recon * n_params], ``means`` [batch x T_recon x N_recon]; the controller
    fields cover the first T_enc steps and are None when ``co_dim == 0``.
    """
    batch: TrialBatch
    ic_posterior: GaussianPosterior
    ic_sample: Tensor
    factors: Tensor
    raw: Tensor
    means: Tensor
    gen_init: Tensor
    co_posterior: Optional[GaussianPosterior] = None
    co_sample: Optional[Tensor] = None
    gen_inputs: Optional[Tensor] = None

    @property
    def rates(self) -> np.ndarray:
        return self.means.data
