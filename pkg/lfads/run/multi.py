import asyncio
import time
from concurrent.futures import Executor, ProcessPoolExecutor, ThreadPoolExecutor
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd

from .config import compose_config
from .instantiate import Registry, default_registry, validate_targets
from .single import train_config
from .space import SearchSpace, apply_values
from ..utils.files import atomic_write_text
from ..utils.logger import logger

SUMMARY_FILE = "summary.csv"
EXECUTORS = ("process", "thread")


def make_executor(kind: str, n_workers: int) -> Executor:
    if kind not in EXECUTORS:
        raise ValueError(f"Unknown executor '{kind}'; expected one of {EXECUTORS}.")
    if kind == "process":
        return ProcessPoolExecutor(max_workers=n_workers)
    return ThreadPoolExecutor(max_workers=n_workers)


def run_worker(
        config: Dict[str, Any],
        run_dir: str,
        registry: Registry,
        options: Dict[str, Any],
) -> Dict[str, Any]:
    """
    Train one configuration; runs inside a pool worker.

    :return: The best smoothed and last validation losses and the number of epochs.
    """
    result = train_config(config, run_dir, registry, **options)
    final = result.final
    return {
        "best_loss": result.best_smoothed,
        "last_loss": None if final is None else final.valid_smoothed,
        "epochs": len(result.history),
        "stopped_early": result.stopped_early,
    }


async def run_bounded(
        jobs: Sequence[Callable[[], Any]],
        n_workers: int,
        executor: Executor,
        labels: Optional[Sequence[str]] = None,
) -> List[Union[Any, BaseException]]:
    """
    Run blocking jobs on an executor with at most ``n_workers`` in flight.

    :param jobs: Zero-argument callables.
    :param n_workers: Concurrency bound.
    :param executor: Pool the jobs run on.
    :param labels: Names used in the start and stop log lines.
    :return: Per job, its result or the exception it raised.
    """
    loop = asyncio.get_running_loop()
    semaphore = asyncio.Semaphore(n_workers)
    labels = labels or [f"job {i}" for i in range(len(jobs))]

    async def run_one(label: str, job: Callable[[], Any]) -> Any:
        async with semaphore:
            logger.info(f"{label} started at {time.time():.3f}")
            try:
                return await loop.run_in_executor(executor, job)
            finally:
                logger.info(f"{label} stopped at {time.time():.3f}")

    return await asyncio.gather(
        *(run_one(label, job) for label, job in zip(labels, jobs)),
        return_exceptions=True,
    )


class TrainJob:
    """
    Picklable call of :func:`run_worker`.
    """

    def __init__(self, config: Dict[str, Any], run_dir: Path, registry: Registry, options: Dict[str, Any]) -> None:
        self.args = (config, str(run_dir), registry, options)

    def __call__(self) -> Dict[str, Any]:
        return run_worker(*self.args)


async def run_multi_async(
        config_path: Union[str, Path],
        space: SearchSpace,
        n_samples: int,
        n_workers: int = 1,
        seed: int = 0,
        out_dir: Union[str, Path] = "runs/search",
        overrides: Sequence[str] = (),
        registry: Registry = default_registry,
        executor: str = "process",
) -> pd.DataFrame:
    if n_samples < 1 or n_workers < 1:
        raise ValueError(f"n_samples and n_workers must be at least 1, got {n_samples} and {n_workers}.")
    out_dir = Path(out_dir)
    base = compose_config(config_path, overrides=overrides)
    space.validate(base)
    validate_targets(base, registry)

    rng = np.random.default_rng(seed)
    samples = [space.sample(rng) for _ in range(n_samples)]
    run_dirs = [out_dir / f"run_{i:03d}" for i in range(n_samples)]
    jobs = [
        TrainJob(apply_values(base, values), run_dir, registry, {})
        for values, run_dir in zip(samples, run_dirs)
    ]

    logger.info(f"Search over {len(space)} hyperparameters: {n_samples} runs, {n_workers} workers")
    with make_executor(executor, n_workers) as pool:
        outcomes = await run_bounded(jobs, n_workers, pool, labels=[f"run {i}" for i in range(n_samples)])

    rows = []
    for i, (values, run_dir, outcome) in enumerate(zip(samples, run_dirs, outcomes)):
        row: Dict[str, Any] = {"run": i, "run_dir": str(run_dir), **values}
        if isinstance(outcome, BaseException):
            logger.warning(f"run {i} failed: {outcome.__class__.__name__}: {outcome}")
            row.update(best_loss=float("nan"), error=f"{outcome.__class__.__name__}: {outcome}")
        else:
            row.update(best_loss=outcome["best_loss"], error="")
        rows.append(row)

    summary = pd.DataFrame(rows).sort_values(["best_loss", "run"], na_position="last", kind="mergesort")
    atomic_write_text(out_dir / SUMMARY_FILE, summary.to_csv(index=False))
    logger.info(f"Search finished; summary written to {out_dir / SUMMARY_FILE}")
    return summary.reset_index(drop=True)


def run_multi(
        config_path: Union[str, Path],
        space: SearchSpace,
        n_samples: int,
        n_workers: int = 1,
        seed: int = 0,
        out_dir: Union[str, Path] = "runs/search",
        overrides: Sequence[str] = (),
        registry: Registry = default_registry,
        executor: str = "process",
) -> pd.DataFrame:
    """
    Random search: train ``n_samples`` configurations drawn from ``space``.

    Draws depend only on ``seed``. A failing run is recorded in the summary
    and does not stop the others.

    :param config_path: Main config file.
    :param space: Hyperparameter samplers by dotted path.
    :param n_samples: Number of runs.
    :param n_workers: Maximum number of concurrent runs.
    :param seed: Seed of the hyperparameter draws.
    :param out_dir: Directory receiving one run directory per sample and ``summary.csv``.
    :param overrides: Overrides applied to the base config before sampling.
    :param registry: Known components.
    :param executor: "process" or "thread" worker pool.
    :return: The summary, sorted by best smoothed validation loss.
    """
    return asyncio.run(run_multi_async(
        config_path, space, n_samples, n_workers, seed, out_dir, overrides, registry, executor,
    ))
