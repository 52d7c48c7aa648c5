from dataclasses import asdict, dataclass
from typing import Any, Dict, Optional


def smooth(previous: Optional[float], value: float, alpha: float) -> float:
    """
    Exponential smoothing ``alpha * previous + (1 - alpha) * value``.

    The first value passes through unchanged.
    """
    if previous is None:
        return value
    return alpha * previous + (1.0 - alpha) * value


@dataclass
class PlateauSchedule:
    """
    Multiply the learning rate by ``decay`` after ``patience`` epochs without
    improvement of the monitored value, never going below ``min_lr``.
    """
    lr: float
    decay: float = 0.95
    patience: int = 6
    min_lr: float = 1e-5
    best: Optional[float] = None
    bad_epochs: int = 0

    def step(self, value: float) -> bool:
        """
        :param value: This epoch's monitored value.
        :return: Whether the learning rate was decayed.
        """
        if self.best is None or value < self.best:
            self.best = value
            self.bad_epochs = 0
            return False
        self.bad_epochs += 1
        if self.bad_epochs >= self.patience and self.lr > self.min_lr:
            self.lr = max(self.lr * self.decay, self.min_lr)
            self.bad_epochs = 0
            return True
        return False

    def state_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class EarlyStopping:
    patience: int = 50
    best: Optional[float] = None
    bad_epochs: int = 0

    def step(self, value: float) -> bool:
        """
        :param value: This epoch's monitored value.
        :return: Whether training should stop.
        """
        if self.best is None or value < self.best:
            self.best = value
            self.bad_epochs = 0
            return False
        self.bad_epochs += 1
        return self.bad_epochs >= self.patience

    def state_dict(self) -> Dict[str, Any]:
        return asdict(self)
