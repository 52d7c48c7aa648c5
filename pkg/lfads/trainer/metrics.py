from dataclasses import asdict, dataclass, fields
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd
from scipy import special
from sklearn.metrics import r2_score

from ..datasets.data import TrialDataset
from ..exceptions import MetricError
from ..utils.files import atomic_write_text


@dataclass
class MetricsRow:
    """
    One epoch of training history.

    Loss components are logged with their ramp and scale applied, so each
    ``*_total`` equals the sum of its components. ``valid_total_full`` is the
    validation loss at full KL and L2 weight, the quantity that is smoothed
    for model selection.
    """
    epoch: int
    step: int
    train_recon: float
    train_kl_ic: float
    train_kl_co: float
    train_l2: float
    train_total: float
    valid_recon: float
    valid_kl_ic: float
    valid_kl_co: float
    valid_l2: float
    valid_total: float
    valid_total_full: float
    valid_smoothed: float
    kl_ramp: float
    l2_ramp: float
    lr: float
    wall_clock: Optional[float] = None

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "MetricsRow":
        names = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in data.items() if k in names})


def metrics_frame(history: List[MetricsRow], wall_clock: bool = False) -> pd.DataFrame:
    columns = [f.name for f in fields(MetricsRow)]
    if not wall_clock:
        columns.remove("wall_clock")
    return pd.DataFrame([row.to_dict() for row in history], columns=columns)


def write_metrics(path, history: List[MetricsRow], wall_clock: bool = False) -> None:
    """
    Atomically write the history as CSV with a stable header.
    """
    atomic_write_text(path, metrics_frame(history, wall_clock).to_csv(index=False))


def poisson_nll_sum(rates: np.ndarray, spikes: np.ndarray) -> float:
    """
    Summed Poisson negative log-likelihood.

    :param rates: Expected counts, broadcastable to ``spikes``.
    :param spikes: Observed counts.
    :return: ``sum(rate - k ln rate + lgamma(k + 1))``.
    """
    rates = np.broadcast_to(rates, spikes.shape)
    return float(np.sum(rates - special.xlogy(spikes, rates) + special.gammaln(spikes + 1.0)))


def bits_per_spike(model_nll_sum: float, data: np.ndarray, null_rates: Optional[np.ndarray] = None) -> float:
    """
    Likelihood improvement of a model over a per-neuron constant-rate model.

    :param model_nll_sum: Summed Poisson NLL of the model on ``data``.
    :param data: Spike counts [trials x T x N].
    :param null_rates: Per-neuron null rates [N]; defaults to the mean of ``data``.
    :return: ``(NLL_null - NLL_model) / (n_spikes * ln 2)``.
    """
    data = np.asarray(data, dtype=np.float64)
    n_spikes = float(np.sum(data))
    if n_spikes <= 0:
        raise MetricError("Bits per spike is undefined for a slab without spikes.")
    if null_rates is None:
        null_rates = data.reshape(-1, data.shape[-1]).mean(axis=0)
    null_nll = poisson_nll_sum(np.asarray(null_rates, dtype=np.float64), data)
    return (null_nll - model_nll_sum) / (n_spikes * np.log(2.0))


def rate_bits_per_spike(rates: np.ndarray, data: np.ndarray, null_rates: Optional[np.ndarray] = None) -> float:
    return bits_per_spike(poisson_nll_sum(rates, data), data, null_rates)


def co_bps(
        rates: np.ndarray,
        recon_data: np.ndarray,
        n_heldin: int,
        encod_steps: int,
        train_recon: Optional[np.ndarray] = None,
) -> float:
    """
    Bits per spike on held-out neurons over the encoder window.

    :param rates: Predicted rates [trials x T_recon x N_recon].
    :param recon_data: Observed counts of the evaluated trials.
    :param n_heldin: Number of held-in neurons.
    :param encod_steps: Length of the encoder window.
    :param train_recon: Training counts whose per-neuron mean defines the null model.
    """
    if recon_data.shape[2] <= n_heldin:
        raise MetricError("co-bps needs held-out neurons.")
    slab = (slice(None), slice(0, encod_steps), slice(n_heldin, None))
    null = None if train_recon is None else train_recon[slab].reshape(-1, recon_data.shape[2] - n_heldin).mean(axis=0)
    return rate_bits_per_spike(rates[slab], recon_data[slab], null)


def fp_bps(
        rates: np.ndarray,
        recon_data: np.ndarray,
        encod_steps: int,
        train_recon: Optional[np.ndarray] = None,
) -> float:
    """
    Bits per spike on every reconstructed neuron over the forward-prediction steps.
    """
    if recon_data.shape[1] <= encod_steps:
        raise MetricError("fp-bps needs forward-prediction steps.")
    slab = (slice(None), slice(encod_steps, None), slice(None))
    null = None if train_recon is None else train_recon[slab].reshape(-1, recon_data.shape[2]).mean(axis=0)
    return rate_bits_per_spike(rates[slab], recon_data[slab], null)


def r2_rates(rates: np.ndarray, truth: np.ndarray, n_neurons: Optional[int] = None) -> float:
    """
    Coefficient of determination between inferred and true rates, averaged over neurons.

    :param rates: Inferred rates [trials x T x N].
    :param truth: True rates of the same shape.
    :param n_neurons: Evaluate only the first ``n_neurons`` (held-in) neurons.
    """
    n = rates.shape[2] if n_neurons is None else n_neurons
    return float(r2_score(truth[:, :, :n].reshape(-1, n), rates[:, :, :n].reshape(-1, n)))


def evaluate_rates(rates: np.ndarray, dataset: TrialDataset, split: str = "valid") -> Dict[str, float]:
    """
    co-bps, fp-bps and rate R² of rates inferred for one split.

    Metrics that do not apply to the dataset (no held-out neurons, no
    forward-prediction steps, no ground truth) are omitted.

    :param rates: Posterior-averaged rates of the split's trials, in index order.
    :param dataset: The dataset the rates were inferred from.
    :param split: The evaluated split.
    :return: Mapping of metric name to value.
    """
    evaluated = dataset.split_arrays(split)
    train = dataset.split_arrays("train")["recon_data"]
    recon = evaluated["recon_data"]
    results: Dict[str, float] = {}
    if dataset.n_heldout:
        results["co_bps"] = co_bps(rates, recon, dataset.n_heldin, dataset.encod_steps, train)
    if dataset.fp_steps:
        results["fp_bps"] = fp_bps(rates, recon, dataset.encod_steps, train)
    if "truth" in evaluated:
        results["r2_heldin"] = r2_rates(rates, evaluated["truth"], dataset.n_heldin)
    return results
