from typing import Optional, Tuple

import numpy as np
from scipy import optimize

from .data import LorenzConfig, TrialDataset
from ..utils.logger import logger


def lorenz_derivative(state: np.ndarray, sigma: float, rho: float, beta: float) -> np.ndarray:
    """
    Time derivative of the Lorenz system for a stack of states.

    :param state: Array [..., 3] of (x, y, z).
    :return: Array [..., 3] of (dx, dy, dz).
    """
    x, y, z = state[..., 0], state[..., 1], state[..., 2]
    return np.stack([
        sigma * (y - x),
        x * (rho - z) - y,
        x * y - beta * z,
    ], axis=-1)


def rk4_step(state: np.ndarray, dt: float, sigma: float, rho: float, beta: float) -> np.ndarray:
    """
    Advance a stack of Lorenz states by one classical Runge-Kutta step.

    :param state: Array [..., 3].
    :param dt: Integration step.
    :return: The state after ``dt``.
    """
    k1 = lorenz_derivative(state, sigma, rho, beta)
    k2 = lorenz_derivative(state + 0.5 * dt * k1, sigma, rho, beta)
    k3 = lorenz_derivative(state + 0.5 * dt * k2, sigma, rho, beta)
    k4 = lorenz_derivative(state + dt * k3, sigma, rho, beta)
    return state + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def integrate_lorenz(
        initial: np.ndarray,
        n_samples: int,
        dt: float,
        sigma: float = 10.0,
        rho: float = 28.0,
        beta: float = 8.0 / 3.0,
        steps_per_sample: int = 1,
        burn_in: int = 0,
) -> np.ndarray:
    """
    Integrate independent Lorenz trajectories with RK4.

    :param initial: Starting states [n_trials x 3].
    :param n_samples: Number of recorded samples per trajectory.
    :param dt: Integration step.
    :param steps_per_sample: RK4 steps between recorded samples.
    :param burn_in: RK4 steps discarded before the first sample.
    :return: Trajectories [n_trials x n_samples x 3]; the first sample is the
        state after burn-in.
    """
    state = np.array(initial, dtype=np.float64)
    for _ in range(burn_in):
        state = rk4_step(state, dt, sigma, rho, beta)

    out = np.empty(state.shape[:-1] + (n_samples, 3), dtype=np.float64)
    for i in range(n_samples):
        out[..., i, :] = state
        for _ in range(steps_per_sample):
            state = rk4_step(state, dt, sigma, rho, beta)
    return out


def simulate_lorenz(cfg: LorenzConfig, rng: np.random.Generator) -> np.ndarray:
    """
    Raw (unstandardized) latent trajectories for every trial of a config.

    :param cfg: Dataset parameters.
    :param rng: Source of the random initial states.
    :return: Array [n_trials x (n_bins + fp_steps) x 3].
    """
    initial = rng.normal(loc=(0.0, 0.0, 25.0), scale=(10.0, 10.0, 10.0), size=(cfg.n_trials, 3))
    return integrate_lorenz(
        initial,
        n_samples=cfg.n_bins + cfg.fp_steps,
        dt=cfg.dt,
        sigma=cfg.sigma,
        rho=cfg.rho,
        beta=cfg.beta,
        steps_per_sample=cfg.steps_per_bin,
        burn_in=cfg.burn_in,
    )


def calibrate_scale(drive: np.ndarray, offset: float, base_rate: float) -> float:
    """
    Find the readout scale s for which ``mean(exp(s * drive + offset)) == base_rate``.

    With a zero-mean drive the mean rate grows monotonically with s, starting
    from ``exp(offset)`` at s = 0.

    :param drive: Zero-mean log-rate contribution of the latent state.
    :param offset: Log-rate of a neuron with zero drive, below ``log(base_rate)``.
    :param base_rate: Target mean rate in spikes per bin.
    :return: The scale.
    """
    target = np.log(base_rate)
    if not offset < target:
        raise ValueError(f"offset {offset} must lie below log(base_rate) = {target}.")

    def excess(scale: float) -> float:
        log_rates = scale * drive + offset
        peak = log_rates.max()
        return float(np.log(np.mean(np.exp(log_rates - peak))) + peak - target)

    high = 1.0
    for _ in range(64):
        if excess(high) > 0:
            return float(optimize.bisect(excess, 0.0, high, xtol=1e-14, maxiter=200))
        high *= 2.0
    raise ValueError("The latent drive is too weak to reach the target rate.")


def standardize(states: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Standardize each latent channel with dataset-wide statistics.

    :param states: Array [..., 3].
    :return: Standardized states, per-channel mean and per-channel std.
    """
    flat = states.reshape(-1, states.shape[-1])
    mean, std = flat.mean(axis=0), flat.std(axis=0)
    return (states - mean) / std, mean, std


def generate_lorenz(cfg: LorenzConfig, rng: Optional[np.random.Generator] = None) -> TrialDataset:
    """
    Build a Poisson spiking dataset driven by Lorenz dynamics.

    Latent trajectories are standardized over the whole dataset and read out
    through random Gaussian weights into log-rates. The offset fixes the rate
    of an undriven neuron at ``floor_fraction * base_rate`` and the readout
    scale is bisected so that the mean rate equals ``cfg.base_rate``. Train
    trials come first, then ``round(valid_fraction * n_trials)`` validation
    trials.

    :param cfg: Dataset parameters.
    :param rng: Optional generator; defaults to one seeded with ``cfg.seed``.
    :return: A dataset with ground-truth rates attached.
    """
    rng = rng or np.random.default_rng(cfg.seed)
    n_total = cfg.n_neurons + cfg.n_heldout

    states = simulate_lorenz(cfg, rng)
    latent, _, _ = standardize(states)

    weights = rng.standard_normal((3, n_total))
    drive = latent @ weights
    offset = float(np.log(cfg.floor_fraction * cfg.base_rate))
    scale = calibrate_scale(drive, offset, cfg.base_rate)
    rates = np.exp(scale * drive + offset)
    spikes = rng.poisson(rates).astype(np.float64)

    n_valid = int(round(cfg.valid_fraction * cfg.n_trials))
    n_valid = min(max(n_valid, 1), cfg.n_trials - 1)
    split = np.array(["train"] * (cfg.n_trials - n_valid) + ["valid"] * n_valid)

    encod = spikes[:, :cfg.n_bins, :cfg.n_neurons]
    dataset = TrialDataset(encod, spikes, split, truth=rates, name="lorenz")

    logger.info(
        f"Generated Lorenz dataset: {cfg.n_trials} trials x {cfg.n_bins}+{cfg.fp_steps} bins, "
        f"{cfg.n_neurons}+{cfg.n_heldout} neurons, mean rate {rates.mean():.4f}, "
        f"mean count {spikes.mean():.4f}"
    )
    return dataset
