from __future__ import annotations

import copy
import math
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .config import has_path, load_yaml, set_path
from ..exceptions import SearchSpaceError


class Sampler(ABC):
    """
    A distribution over the values of one hyperparameter.
    """
    continuous = False

    @abstractmethod
    def sample(self, rng: np.random.Generator) -> Any:
        """
        :param rng: Source of randomness.
        :return: One draw.
        """

    def clamp(self, value: Any) -> Any:
        return value

    def to_dict(self) -> Dict[str, Any]:
        raise NotImplementedError


class Uniform(Sampler):
    continuous = True

    def __init__(self, low: float, high: float) -> None:
        if not low < high:
            raise ValueError(f"low must be below high, got [{low}, {high}].")
        self.low = float(low)
        self.high = float(high)

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}({self.low}, {self.high})"

    def sample(self, rng: np.random.Generator) -> float:
        return float(rng.uniform(self.low, self.high))

    def clamp(self, value: Any) -> float:
        return float(min(max(value, self.low), self.high))

    def to_dict(self) -> Dict[str, Any]:
        return {"uniform": [self.low, self.high]}


class LogUniform(Uniform):
    """
    Uniform in log space; both bounds must be positive.
    """

    def __init__(self, low: float, high: float) -> None:
        if low <= 0:
            raise ValueError(f"loguniform bounds must be positive, got [{low}, {high}].")
        super().__init__(low, high)

    def sample(self, rng: np.random.Generator) -> float:
        return float(math.exp(rng.uniform(math.log(self.low), math.log(self.high))))

    def to_dict(self) -> Dict[str, Any]:
        return {"loguniform": [self.low, self.high]}


class Choice(Sampler):

    def __init__(self, options: Sequence[Any]) -> None:
        if not options:
            raise ValueError("choice needs at least one option.")
        self.options = list(options)

    def __repr__(self) -> str:
        return f"Choice({self.options!r})"

    def sample(self, rng: np.random.Generator) -> Any:
        return copy.deepcopy(self.options[int(rng.integers(len(self.options)))])

    def to_dict(self) -> Dict[str, Any]:
        return {"choice": list(self.options)}


class Const(Sampler):

    def __init__(self, value: Any) -> None:
        self.value = value

    def __repr__(self) -> str:
        return f"Const({self.value!r})"

    def sample(self, rng: np.random.Generator) -> Any:
        return copy.deepcopy(self.value)

    def to_dict(self) -> Dict[str, Any]:
        return {"const": self.value}


SAMPLERS = {
    "uniform": lambda args: Uniform(*args),
    "loguniform": lambda args: LogUniform(*args),
    "choice": lambda args: Choice(args),
    "const": lambda args: Const(args),
}


def parse_sampler(path: str, spec: Any) -> Sampler:
    """
    Build a sampler from ``{uniform: [lo, hi]}``, ``{loguniform: [lo, hi]}``,
    ``{choice: [a, b, ...]}`` or ``{const: value}``.
    """
    if not isinstance(spec, dict) or len(spec) != 1:
        raise SearchSpaceError(path, f"expected a single-key mapping naming a sampler, got {spec!r}.")
    (kind, args), = spec.items()
    if kind not in SAMPLERS:
        raise SearchSpaceError(path, f"unknown sampler '{kind}'; expected one of {sorted(SAMPLERS)}.")
    if kind in ("uniform", "loguniform") and (not isinstance(args, list) or len(args) != 2):
        raise SearchSpaceError(path, f"{kind} needs [low, high], got {args!r}.")
    if kind == "choice" and not isinstance(args, list):
        raise SearchSpaceError(path, f"choice needs a list of options, got {args!r}.")
    try:
        return SAMPLERS[kind](args)
    except (TypeError, ValueError) as e:
        raise SearchSpaceError(path, str(e)) from e


class SearchSpace:
    """
    Samplers keyed by dotted config path.

    Paths are visited in sorted order, so draws depend only on the generator.
    """

    def __init__(self, samplers: Mapping[str, Sampler]) -> None:
        self.samplers: Dict[str, Sampler] = dict(sorted(samplers.items()))

    def __repr__(self) -> str:
        return f"SearchSpace({self.samplers!r})"

    def __len__(self) -> int:
        return len(self.samplers)

    @property
    def paths(self) -> List[str]:
        return list(self.samplers)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> SearchSpace:
        return cls({path: parse_sampler(path, spec) for path, spec in data.items()})

    @classmethod
    def from_yaml(cls, path: Union[str, Path]) -> SearchSpace:
        data = load_yaml(path)
        if not isinstance(data, dict):
            raise SearchSpaceError(str(path), "a search space file must contain a mapping.")
        return cls.from_dict(data)

    def to_dict(self) -> Dict[str, Any]:
        return {path: sampler.to_dict() for path, sampler in self.samplers.items()}

    def validate(self, config: Mapping[str, Any]) -> None:
        """
        Every path must already exist in the base config.
        """
        for path in self.samplers:
            if not has_path(config, path):
                raise SearchSpaceError(path, "the path does not exist in the base config.")

    def sample(self, rng: np.random.Generator) -> Dict[str, Any]:
        return {path: sampler.sample(rng) for path, sampler in self.samplers.items()}

    def explore(
            self,
            values: Mapping[str, Any],
            rng: np.random.Generator,
            factors: Tuple[float, ...] = (0.8, 1.2),
            resample_probability: float = 0.5,
    ) -> Tuple[Dict[str, Any], Dict[str, str]]:
        """
        Perturb a set of hyperparameter values.

        Continuous values are either multiplied by one of ``factors`` or
        resampled, with probability ``resample_probability`` for the latter;
        categorical values are always resampled; constants stay. Every result
        is clamped to its sampler's bounds.

        :param values: The current values.
        :param rng: Source of randomness.
        :param factors: Multiplicative perturbations.
        :param resample_probability: Chance of resampling a continuous value.
        :return: The new values and, per path, how each was changed.
        """
        new: Dict[str, Any] = {}
        actions: Dict[str, str] = {}
        for path, sampler in self.samplers.items():
            if isinstance(sampler, Const):
                new[path], actions[path] = sampler.sample(rng), "const"
            elif sampler.continuous and rng.random() >= resample_probability:
                factor = float(factors[int(rng.integers(len(factors)))])
                new[path] = sampler.clamp(values[path] * factor)
                actions[path] = f"perturb x{factor}"
            else:
                new[path], actions[path] = sampler.sample(rng), "resample"
        return new, actions

    def contains(self, values: Mapping[str, Any]) -> bool:
        for path, sampler in self.samplers.items():
            value = values[path]
            if isinstance(sampler, Uniform) and not sampler.low <= value <= sampler.high:
                return False
            if isinstance(sampler, Choice) and value not in sampler.options:
                return False
        return True


def apply_values(config: Mapping[str, Any], values: Optional[Mapping[str, Any]]) -> Dict[str, Any]:
    """
    A copy of ``config`` with each dotted path set to its value.
    """
    out = copy.deepcopy(dict(config))
    for path, value in (values or {}).items():
        set_path(out, path, value)
    return out
