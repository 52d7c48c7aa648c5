from dataclasses import asdict, dataclass
from typing import Any, Dict


@dataclass
class TrainerConfig:
    """
    Optimization, scheduling and bookkeeping settings of a training run.
    """
    lr_init: float = 4e-3
    lr_decay: float = 0.95
    lr_patience: int = 6
    lr_min: float = 1e-5
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_epsilon: float = 1e-8
    grad_clip: float = 200.0
    batch_size: int = 100
    max_epochs: int = 100
    early_stop_patience: int = 50
    smoothing: float = 0.7
    checkpoint_every: int = 1
    log_every: int = 1
    seed: int = 0
    n_posterior_samples: int = 20
    log_wall_clock: bool = False
    save_plot: bool = True

    def __post_init__(self) -> None:
        if not 0.0 < self.lr_decay < 1.0:
            raise ValueError(f"lr_decay must lie in (0, 1), got {self.lr_decay}.")
        if self.lr_patience < 1 or self.early_stop_patience < 1:
            raise ValueError("lr_patience and early_stop_patience must be at least 1.")
        if self.lr_init < 0 or self.lr_min < 0:
            raise ValueError("Learning rates must be non-negative.")
        if not 0.0 <= self.smoothing < 1.0:
            raise ValueError(f"smoothing must lie in [0, 1), got {self.smoothing}.")
        if self.grad_clip <= 0:
            raise ValueError(f"grad_clip must be positive, got {self.grad_clip}.")
        if self.batch_size < 1 or self.max_epochs < 0:
            raise ValueError("batch_size must be at least 1 and max_epochs non-negative.")
        if self.checkpoint_every < 1 or self.log_every < 1:
            raise ValueError("checkpoint_every and log_every must be at least 1.")
        if self.n_posterior_samples < 1:
            raise ValueError("n_posterior_samples must be at least 1.")

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)
