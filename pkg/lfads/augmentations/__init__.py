from ._base import Augmentation, AugmentationStack
from .coordinated_dropout import CoordinatedDropout
from .sbtt import SelectiveBackpropThruTime
from .temporal_shift import TemporalShift, shift_time

__all__ = [
    "Augmentation",
    "AugmentationStack",

    "CoordinatedDropout",
    "SelectiveBackpropThruTime",
    "TemporalShift",

    "shift_time",
]
