from pathlib import Path
from typing import Dict, Optional, Union

import numpy as np

from .metrics import evaluate_rates
from ..datasets import DATASET_MAGIC, SPLITS, DataModule, TrialBatch, TrialDataset, batch_indices, load_dataset
from ..exceptions import MissingArrayError
from ..model import LFADS
from ..utils.container import read_container, write_container
from ..utils.logger import logger

POSTERIOR_MEANS_FILE = "posterior_means.lfds"
RATES_KEY = "{split}_rates"
FACTORS_KEY = "{split}_factors"


def posterior_means(
        model: LFADS,
        dataset: TrialDataset,
        n_samples: int = 20,
        batch_size: int = 100,
        rng: Optional[np.random.Generator] = None,
) -> Dict[str, np.ndarray]:
    """
    Posterior-averaged rates and factors of every trial, per split.

    :param model: A trained model.
    :param dataset: Trials to infer.
    :param n_samples: Posterior samples averaged per trial.
    :param batch_size: Trials per forward pass.
    :param rng: Generator for the posterior samples.
    :return: ``{split}_rates`` and ``{split}_factors`` arrays in trial index order.
    """
    rng = rng or np.random.default_rng(0)
    out: Dict[str, np.ndarray] = {}
    for split in SPLITS:
        indices = dataset.indices(split)
        if indices.size == 0:
            continue
        rates, factors = [], []
        for group in batch_indices(indices, batch_size):
            batch = TrialBatch.from_dataset(dataset, group)
            means, fac = model.posterior_average(batch, n_samples, rng)
            rates.append(means)
            factors.append(fac)
        out[RATES_KEY.format(split=split)] = np.concatenate(rates, axis=0)
        out[FACTORS_KEY.format(split=split)] = np.concatenate(factors, axis=0)
    return out


def save_posterior_means(
        model: LFADS,
        data: Union[DataModule, TrialDataset],
        path: Union[str, Path],
        n_samples: int = 20,
        seed: int = 0,
) -> Dict[str, np.ndarray]:
    dataset = data.dataset if isinstance(data, DataModule) else data
    arrays = posterior_means(model, dataset, n_samples=n_samples, rng=np.random.default_rng(seed))
    write_container(path, arrays, DATASET_MAGIC)
    logger.info(f"Wrote posterior means of {dataset.n_trials} trials ({n_samples} samples each) to {path}")
    return arrays


def evaluate_run(
        run_dir: Union[str, Path],
        data: Union[str, Path, TrialDataset],
        split: str = "valid",
) -> Dict[str, float]:
    """
    Score the posterior means stored in a run directory against a dataset.

    :param run_dir: A directory written by a training run.
    :param data: The dataset the run was trained on, or its path.
    :param split: The split to score.
    :return: co-bps, fp-bps and held-in rate R², where applicable.
    """
    path = Path(run_dir) / POSTERIOR_MEANS_FILE
    arrays = read_container(path, DATASET_MAGIC)
    key = RATES_KEY.format(split=split)
    if key not in arrays:
        raise MissingArrayError(key, str(path))
    dataset = data if isinstance(data, TrialDataset) else load_dataset(data)
    results = evaluate_rates(arrays[key], dataset, split)
    logger.info(f"Evaluated {run_dir} on {split}: {results}")
    return results
