from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Sequence, Union

from .config import compose_config, config_digest, save_resolved
from .instantiate import Registry, build_run, default_registry, validate_targets
from ..trainer import CHECKPOINT_DIR, LAST_CHECKPOINT, POSTERIOR_MEANS_FILE, TrainResult, save_posterior_means, train
from ..utils.logger import logger

DEFAULT_RUNS_DIR = Path("runs")


def default_run_dir(config: Mapping[str, Any], name: str = "run") -> Path:
    return DEFAULT_RUNS_DIR / f"{name}-{config_digest(config)[:10]}"


def train_config(
        config: Mapping[str, Any],
        run_dir: Union[str, Path],
        registry: Registry = default_registry,
        resume_from: Optional[Union[str, Path]] = None,
        epochs: Optional[int] = None,
        reset_lr: bool = False,
        restore_best: bool = True,
        write_posterior: bool = True,
) -> TrainResult:
    """
    Train the run described by a composed config into ``run_dir``.

    :param config: The composed run config.
    :param run_dir: Output directory.
    :param registry: Known components.
    :param resume_from: Checkpoint to continue from.
    :param epochs: Epoch limit of this call.
    :param reset_lr: Restart the learning rate at the configured initial value.
    :param restore_best: Keep the best parameters rather than the last ones.
    :param write_posterior: Write posterior-averaged rates when done.
    :return: The training result.
    """
    run_dir = Path(run_dir)
    save_resolved(config, run_dir)
    objects = build_run(config, registry)
    result = train(
        objects.model,
        objects.datamodule,
        objects.trainer,
        run_dir=run_dir,
        resume_from=resume_from,
        epochs=epochs,
        reset_lr=reset_lr,
        restore_best=restore_best,
    )
    if write_posterior:
        save_posterior_means(
            objects.model,
            objects.datamodule,
            run_dir / POSTERIOR_MEANS_FILE,
            n_samples=objects.trainer.n_posterior_samples,
            seed=objects.trainer.seed,
        )
    return result


def run_single(
        config_path: Optional[Union[str, Path]] = None,
        overrides: Sequence[str] = (),
        run_dir: Optional[Union[str, Path]] = None,
        config: Optional[Dict[str, Any]] = None,
        registry: Registry = default_registry,
        resume: bool = False,
) -> Path:
    """
    Train one model.

    The run directory receives ``config.resolved``, ``metrics.csv``,
    ``ckpt/``, ``posterior_means.lfds`` and ``loss_curve.svg``.

    :param config_path: Main config file.
    :param overrides: ``dotted.path=value`` overrides.
    :param run_dir: Output directory; derived from the config digest when omitted.
    :param config: An already composed config, used instead of ``config_path``.
    :param registry: Known components.
    :param resume: Continue from ``ckpt/last.ckpt`` in the run directory if present.
    :return: The run directory.
    """
    if config is None:
        if config_path is None:
            raise ValueError("Either config_path or config must be given.")
        config = compose_config(config_path, overrides=overrides)
    validate_targets(config, registry)

    name = Path(config_path).stem if config_path is not None else "run"
    run_dir = Path(run_dir) if run_dir is not None else default_run_dir(config, name)
    last = run_dir / CHECKPOINT_DIR / LAST_CHECKPOINT
    resume_from = last if resume and last.is_file() else None

    logger.info(f"Starting run in {run_dir}")
    result = train_config(config, run_dir, registry, resume_from=resume_from)
    logger.info(
        f"Finished run in {run_dir}: {len(result.history)} epochs, "
        f"best smoothed validation loss {result.best_smoothed}"
    )
    return run_dir
