from .checkpoint import CHECKPOINT_MAGIC, CheckpointRecord, encode_checkpoint, load_checkpoint, save_checkpoint
from .config import TrainerConfig
from .inference import POSTERIOR_MEANS_FILE, evaluate_run, posterior_means, save_posterior_means
from .metrics import (
    MetricsRow,
    bits_per_spike,
    co_bps,
    evaluate_rates,
    fp_bps,
    metrics_frame,
    poisson_nll_sum,
    r2_rates,
    rate_bits_per_spike,
    write_metrics,
)
from .optimizer import Adam, adam_step, clip_grad_norm, global_norm
from .plotting import plot_loss_curve
from .schedule import EarlyStopping, PlateauSchedule, smooth
from .trainer import (
    CHECKPOINT_DIR,
    LAST_CHECKPOINT,
    LOSS_CURVE_FILE,
    METRICS_FILE,
    TrainResult,
    Trainer,
    as_datamodule,
    train,
)

__all__ = [
    "Trainer",
    "TrainerConfig",
    "TrainResult",
    "train",
    "as_datamodule",

    "Adam",
    "adam_step",
    "clip_grad_norm",
    "global_norm",
    "EarlyStopping",
    "PlateauSchedule",
    "smooth",

    "CHECKPOINT_MAGIC",
    "CheckpointRecord",
    "encode_checkpoint",
    "load_checkpoint",
    "save_checkpoint",

    "MetricsRow",
    "bits_per_spike",
    "co_bps",
    "evaluate_rates",
    "fp_bps",
    "metrics_frame",
    "poisson_nll_sum",
    "r2_rates",
    "rate_bits_per_spike",
    "write_metrics",
    "plot_loss_curve",

    "POSTERIOR_MEANS_FILE",
    "evaluate_run",
    "posterior_means",
    "save_posterior_means",

    "CHECKPOINT_DIR",
    "LAST_CHECKPOINT",
    "LOSS_CURVE_FILE",
    "METRICS_FILE",
]
