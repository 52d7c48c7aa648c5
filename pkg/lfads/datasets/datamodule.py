from pathlib import Path
from typing import Any, Union

from ._base import DataModule
from .data import LorenzConfig, TrialDataset
from .loader import load_dataset
from .lorenz import generate_lorenz


class FileDataModule(DataModule):
    """
    Reads trials from an ``LFDS0001`` container.
    """

    def __init__(self, path: Union[str, Path], batch_size: int = 100, **kwargs: Any) -> None:
        super().__init__(batch_size=batch_size, **kwargs)
        self.path = Path(path)

    def build(self) -> TrialDataset:
        return load_dataset(self.path)


class SyntheticLorenzDataModule(DataModule):
    """
    Generates a Lorenz spiking dataset in memory.

    Every keyword accepted by :class:`LorenzConfig` may be passed directly.
    """

    def __init__(self, batch_size: int = 100, **kwargs: Any) -> None:
        super().__init__(batch_size=batch_size)
        self.config = LorenzConfig(**kwargs)

    def build(self) -> TrialDataset:
        return generate_lorenz(self.config)


class InMemoryDataModule(DataModule):
    """
    Wraps an already loaded dataset.
    """

    def __init__(self, dataset: TrialDataset, batch_size: int = 100, **kwargs: Any) -> None:
        super().__init__(batch_size=batch_size, **kwargs)
        self._source = dataset

    def build(self) -> TrialDataset:
        return self._source
