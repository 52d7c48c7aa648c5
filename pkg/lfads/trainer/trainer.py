from __future__ import annotations

import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np

from .checkpoint import CheckpointRecord, load_checkpoint, save_checkpoint
from .config import TrainerConfig
from .metrics import MetricsRow, write_metrics
from .optimizer import Adam, clip_grad_norm
from .plotting import plot_loss_curve
from .schedule import EarlyStopping, PlateauSchedule, smooth
from ..datasets import DataModule, InMemoryDataModule, TrialBatch, TrialDataset
from ..exceptions import NonFiniteLossError
from ..model import LFADS
from ..tensor import backward
from ..utils.logger import logger

LOSS_KEYS = ("recon", "kl_ic", "kl_co", "l2", "total")
CHECKPOINT_DIR = "ckpt"
LAST_CHECKPOINT = "last.ckpt"
METRICS_FILE = "metrics.csv"
LOSS_CURVE_FILE = "loss_curve.svg"


@dataclass
class TrainResult:
    params: Dict[str, np.ndarray]
    history: List[MetricsRow] = field(default_factory=list)
    best_epoch: Optional[int] = None
    best_smoothed: Optional[float] = None
    stopped_early: bool = False

    @property
    def final(self) -> Optional[MetricsRow]:
        return self.history[-1] if self.history else None


def as_datamodule(data: Union[DataModule, TrialDataset], batch_size: int) -> DataModule:
    if isinstance(data, DataModule):
        return data
    return InMemoryDataModule(data, batch_size=batch_size)


def _weighted_mean(records: List[Dict[str, float]], sizes: List[int]) -> Dict[str, float]:
    total = float(sum(sizes))
    return {key: sum(r[key] * n for r, n in zip(records, sizes)) / total for key in records[0]}


class Trainer:
    """
    Adam training loop with smoothed-validation model selection.

    Everything that influences the next epoch (parameters, optimizer moments,
    generator state, schedules and history) is written to the checkpoint, so
    a run resumed from epoch k continues exactly as the uninterrupted run.
    """

    def __init__(self, config: Optional[TrainerConfig] = None, run_dir: Optional[Union[str, Path]] = None) -> None:
        """
        :param config: Optimization settings, defaults when omitted.
        :param run_dir: Directory receiving metrics, checkpoints and the loss curve;
            nothing is written when omitted.
        """
        self.config = config or TrainerConfig()
        self.run_dir = Path(run_dir) if run_dir is not None else None

        c = self.config
        self.rng = np.random.default_rng(c.seed)
        self.optimizer = Adam(c.adam_beta1, c.adam_beta2, c.adam_epsilon)
        self.schedule = PlateauSchedule(c.lr_init, c.lr_decay, c.lr_patience, c.lr_min)
        self.early_stopping = EarlyStopping(c.early_stop_patience)
        self.epoch = 0
        self.step = 0
        self.smoothed: Optional[float] = None
        self.best_smoothed: Optional[float] = None
        self.best_epoch: Optional[int] = None
        self.best_params: Dict[str, np.ndarray] = {}
        self.stopped_early = False
        self.history: List[MetricsRow] = []

    @property
    def lr(self) -> float:
        return self.schedule.lr

    @property
    def checkpoint_path(self) -> Optional[Path]:
        if self.run_dir is None:
            return None
        return self.run_dir / CHECKPOINT_DIR / LAST_CHECKPOINT

    def state_dict(self) -> Dict[str, Any]:
        return {
            "schedule": self.schedule.state_dict(),
            "early_stopping": self.early_stopping.state_dict(),
            "smoothed": self.smoothed,
            "best_smoothed": self.best_smoothed,
            "best_epoch": self.best_epoch,
            "stopped_early": self.stopped_early,
        }

    def load_state_dict(self, state: Dict[str, Any]) -> None:
        self.schedule = PlateauSchedule(**state["schedule"])
        self.early_stopping = EarlyStopping(**state["early_stopping"])
        self.smoothed = state["smoothed"]
        self.best_smoothed = state["best_smoothed"]
        self.best_epoch = state["best_epoch"]
        self.stopped_early = state["stopped_early"]

    def checkpoint(self, model: LFADS) -> CheckpointRecord:
        """
        Snapshot the full training state.

        :param model: The model being trained.
        :return: A record ready for :func:`save_checkpoint`.
        """
        moments = self.optimizer.state_arrays()
        return CheckpointRecord(
            params=model.params.arrays(),
            adam_m=moments["m"],
            adam_v=moments["v"],
            adam_t=self.optimizer.t,
            epoch=self.epoch,
            step=self.step,
            rng_state=self.rng.bit_generator.state,
            config_hash=model.config_hash(),
            trainer_state=self.state_dict(),
            history=[row.to_dict() for row in self.history],
            best_params={k: v.copy() for k, v in self.best_params.items()},
        )

    def restore(self, model: LFADS, record: CheckpointRecord, reset_lr: bool = False) -> None:
        """
        Load a checkpoint into the model and this trainer.

        :param model: The model to overwrite; its architecture must match the record.
        :param record: The saved state.
        :param reset_lr: Restart the learning rate at ``lr_init``, clearing the plateau counter.
        """
        model.params.load(record.params)
        self.optimizer.load_state(record.adam_t, record.adam_m, record.adam_v)
        self.epoch = record.epoch
        self.step = record.step
        self.rng.bit_generator.state = record.rng_state
        self.load_state_dict(record.trainer_state)
        self.history = [MetricsRow.from_dict(row) for row in record.history]
        self.best_params = {k: v.copy() for k, v in record.best_params.items()}
        if reset_lr:
            self.schedule.lr = self.config.lr_init
            self.schedule.bad_epochs = 0
        logger.info(f"Resumed at epoch {self.epoch}, step {self.step}, lr {self.lr:.3g}")

    def resume(self, model: LFADS, path: Union[str, Path], reset_lr: bool = False) -> None:
        self.restore(model, load_checkpoint(path, expected_hash=model.config_hash()), reset_lr=reset_lr)

    def save(self, model: LFADS) -> None:
        path = self.checkpoint_path
        if path is not None:
            save_checkpoint(self.checkpoint(model), path)

    def train_step(self, model: LFADS, batch: TrialBatch) -> Dict[str, float]:
        """
        One optimizer update on one batch.

        :param model: The model to update.
        :param batch: An unaugmented training batch.
        :return: Loss components of the batch, before the update.
        """
        stack = model.stack_for("train")
        try:
            augmented = model.augment(batch, self.rng, "train")
            output = model.forward(augmented, rng=self.rng, training=True)
            total, components = model.loss(output, self.step, "train")
            if not np.isfinite(components["total"]):
                raise NonFiniteLossError(self.step, components)

            model.params.zero_grad()
            backward(total)
            grads = model.params.grads()
            norm = clip_grad_norm(grads, self.config.grad_clip)
            self.optimizer.step(model.params, grads, self.lr)
            model.params.normalize_factor_rows()
        finally:
            stack.reset()

        logger.debug(f"step {self.step}: loss {components['total']:.4f}, grad norm {norm:.3f}")
        self.step += 1
        return components

    def evaluate(self, model: LFADS, datamodule: DataModule) -> Dict[str, float]:
        """
        Validation loss under the inference augmentations, with posterior sampling
        and without dropout.

        :return: Trial-weighted mean of the loss components.
        """
        stack = model.stack_for("infer")
        records, sizes = [], []
        for batch in datamodule.valid_batches():
            try:
                augmented = model.augment(batch, self.rng, "infer")
                output = model.forward(augmented, rng=self.rng, training=False)
                _, components = model.loss(output, self.step, "infer")
            finally:
                stack.reset()
            records.append(components)
            sizes.append(batch.size)
        return _weighted_mean(records, sizes)

    def train_epoch(self, model: LFADS, datamodule: DataModule) -> Dict[str, float]:
        records, sizes = [], []
        for batch in datamodule.train_batches(self.rng):
            records.append(self.train_step(model, batch))
            sizes.append(batch.size)
        return _weighted_mean(records, sizes)

    def _end_epoch(self, model: LFADS, train: Dict[str, float], valid: Dict[str, float], start: float) -> MetricsRow:
        self.epoch += 1
        self.smoothed = smooth(self.smoothed, valid["total_full"], self.config.smoothing)
        if self.best_smoothed is None or self.smoothed < self.best_smoothed:
            self.best_smoothed = self.smoothed
            self.best_epoch = self.epoch
            self.best_params = model.params.arrays()

        row = MetricsRow(
            epoch=self.epoch,
            step=self.step,
            **{f"train_{k}": train[k] for k in LOSS_KEYS},
            **{f"valid_{k}": valid[k] for k in LOSS_KEYS},
            valid_total_full=valid["total_full"],
            valid_smoothed=self.smoothed,
            kl_ramp=valid["kl_ramp"],
            l2_ramp=valid["l2_ramp"],
            lr=self.lr,
            wall_clock=time.perf_counter() - start if self.config.log_wall_clock else None,
        )
        self.history.append(row)

        if self.schedule.step(self.smoothed):
            logger.info(f"Validation loss plateaued, learning rate decayed to {self.lr:.3g}")
        self.stopped_early = self.early_stopping.step(self.smoothed)

        if self.epoch % self.config.log_every == 0:
            logger.info(
                f"epoch {self.epoch} step {self.step}: train {train['total']:.4f}, "
                f"valid {valid['total']:.4f} (full {valid['total_full']:.4f}, smoothed {self.smoothed:.4f}), "
                f"lr {row.lr:.3g}"
            )
        return row

    def _write_outputs(self, model: LFADS, force_checkpoint: bool = False) -> None:
        if self.run_dir is None:
            return
        write_metrics(self.run_dir / METRICS_FILE, self.history, wall_clock=self.config.log_wall_clock)
        if force_checkpoint or self.epoch % self.config.checkpoint_every == 0:
            self.save(model)

    def fit(
            self,
            model: LFADS,
            data: Union[DataModule, TrialDataset],
            epochs: Optional[int] = None,
            restore_best: bool = True,
    ) -> TrainResult:
        """
        Train until ``max_epochs``, early stopping, or ``epochs`` more epochs.

        :param model: The model to train in place.
        :param data: Training and validation trials.
        :param epochs: Run at most this many epochs in this call.
        :param restore_best: Load the parameters with the best smoothed
            validation loss into the model when done.
        :return: The final parameters and the full history.
        """
        datamodule = as_datamodule(data, self.config.batch_size)
        target = self.config.max_epochs
        if epochs is not None:
            target = min(target, self.epoch + epochs)

        start = time.perf_counter()
        logger.info(
            f"Training {model!r} with {model.params.n_values} parameters "
            f"from epoch {self.epoch} to {target}"
        )
        while self.epoch < target and not self.stopped_early:
            train = self.train_epoch(model, datamodule)
            valid = self.evaluate(model, datamodule)
            self._end_epoch(model, train, valid, start)
            self._write_outputs(model)

        if self.stopped_early:
            logger.info(f"Stopped early at epoch {self.epoch}; best epoch {self.best_epoch}")
        self._write_outputs(model, force_checkpoint=True)
        if self.run_dir is not None and self.config.save_plot and self.history:
            plot_loss_curve(self.history, self.run_dir / LOSS_CURVE_FILE)

        if restore_best and self.best_params:
            model.params.load(self.best_params)
        return TrainResult(
            params=model.params.arrays(),
            history=list(self.history),
            best_epoch=self.best_epoch,
            best_smoothed=self.best_smoothed,
            stopped_early=self.stopped_early,
        )


def train(
        model: LFADS,
        data: Union[DataModule, TrialDataset],
        config: Optional[TrainerConfig] = None,
        run_dir: Optional[Union[str, Path]] = None,
        resume_from: Optional[Union[str, Path]] = None,
        epochs: Optional[int] = None,
        reset_lr: bool = False,
        restore_best: bool = True,
) -> TrainResult:
    """
    Train a model, optionally continuing from a checkpoint.

    :param model: The model to train in place.
    :param data: A data module or a dataset.
    :param config: Trainer settings.
    :param run_dir: Output directory for metrics, checkpoints and plots.
    :param resume_from: Checkpoint to continue from.
    :param epochs: Maximum number of epochs for this call.
    :param reset_lr: Restart the learning rate schedule when resuming.
    :param restore_best: Leave the best parameters in the model.
    :return: The training result.
    """
    trainer = Trainer(config, run_dir)
    if resume_from is not None:
        trainer.resume(model, resume_from, reset_lr=reset_lr)
    return trainer.fit(model, data, epochs=epochs, restore_best=restore_best)
