import inspect
import typing
from dataclasses import dataclass
from typing import Any, Callable, Dict, Iterator, List, Mapping, Optional, Tuple

from ..augmentations import AugmentationStack, CoordinatedDropout, SelectiveBackpropThruTime, TemporalShift
from ..datasets import DataModule, FileDataModule, SyntheticLorenzDataModule
from ..exceptions import InstantiationError, LFADSException
from ..model import LFADS
from ..priors import AutoregressiveMultivariateNormal, MultivariateNormal, MultivariateStudentT
from ..recons import Gamma, Gaussian, Poisson, ZeroInflatedGamma
from ..trainer import TrainerConfig

TARGET_KEY = "_target_"


class Registry:
    """
    Maps ``_target_`` names to constructors.

    Components register under their class name; custom ones can be added
    with the :meth:`register` decorator::

        @registry.register()
        class MyPrior(Prior):
            ...
    """

    def __init__(self, targets: Optional[Mapping[str, Callable[..., Any]]] = None) -> None:
        self._targets: Dict[str, Callable[..., Any]] = dict(targets or {})

    def __contains__(self, name: object) -> bool:
        return name in self._targets

    def __iter__(self) -> Iterator[str]:
        return iter(sorted(self._targets))

    def add(self, name: str, factory: Callable[..., Any]) -> None:
        self._targets[name] = factory

    def register(self, name: Optional[str] = None) -> Callable[[Callable[..., Any]], Callable[..., Any]]:
        def decorator(factory: Callable[..., Any]) -> Callable[..., Any]:
            self.add(name or factory.__name__, factory)
            return factory

        return decorator

    def get(self, name: str) -> Optional[Callable[..., Any]]:
        return self._targets.get(name)

    def copy(self) -> "Registry":
        return Registry(self._targets)


default_registry = Registry({
    factory.__name__: factory
    for factory in (
        LFADS,
        TrainerConfig,
        FileDataModule,
        SyntheticLorenzDataModule,
        AugmentationStack,
        CoordinatedDropout,
        SelectiveBackpropThruTime,
        TemporalShift,
        MultivariateNormal,
        AutoregressiveMultivariateNormal,
        MultivariateStudentT,
        Poisson,
        Gaussian,
        Gamma,
        ZeroInflatedGamma,
    )
})


def _join(path: str, key: Any) -> str:
    return f"{path}.{key}" if path else str(key)


def iter_targets(node: Any, path: str = "") -> Iterator[Tuple[str, str]]:
    """
    Every ``_target_`` in a config tree with its node path, parents first.
    """
    if isinstance(node, dict):
        if TARGET_KEY in node:
            yield path, node[TARGET_KEY]
        for key, value in node.items():
            if key != TARGET_KEY:
                yield from iter_targets(value, _join(path, key))
    elif isinstance(node, list):
        for i, value in enumerate(node):
            yield from iter_targets(value, _join(path, i))


def validate_targets(config: Any, registry: Registry = default_registry) -> None:
    """
    Fail before any work starts if a config names an unregistered component.
    """
    for path, target in iter_targets(config):
        if not isinstance(target, str) or target not in registry:
            raise InstantiationError(path, f"unknown target {target!r}.")


def _matches(value: Any, annotation: Any) -> bool:
    if annotation is inspect.Parameter.empty or annotation is Any:
        return True
    origin = typing.get_origin(annotation)
    if origin is typing.Union:
        return any(_matches(value, arg) for arg in typing.get_args(annotation))
    if annotation is type(None):
        return value is None
    if annotation is bool:
        return isinstance(value, bool)
    if annotation is int:
        return isinstance(value, int) and not isinstance(value, bool)
    if annotation is float:
        return isinstance(value, (int, float)) and not isinstance(value, bool)
    if annotation is str:
        return isinstance(value, str)
    return True


def _check_arguments(path: str, factory: Callable[..., Any], kwargs: Dict[str, Any]) -> None:
    try:
        signature = inspect.signature(factory)
    except (TypeError, ValueError):
        return
    try:
        signature.bind(**kwargs)
    except TypeError as e:
        raise InstantiationError(path, str(e)) from e

    try:
        hints = typing.get_type_hints(factory.__init__ if inspect.isclass(factory) else factory)
    except Exception:
        hints = {}
    for name, value in kwargs.items():
        if name in hints and not _matches(value, hints[name]):
            raise InstantiationError(
                _join(path, name),
                f"type mismatch: expected {hints[name]}, got {type(value).__name__} {value!r}.",
            )


def instantiate(node: Any, registry: Registry = default_registry, path: str = "") -> Any:
    """
    Turn a config tree into objects, depth first.

    Children are built before their parent; maps without ``_target_`` and
    plain values pass through.

    :param node: The config subtree.
    :param registry: Known components.
    :param path: Dotted path of ``node``, for error messages.
    :return: The built object graph.
    """
    if isinstance(node, list):
        return [instantiate(value, registry, _join(path, i)) for i, value in enumerate(node)]
    if not isinstance(node, dict):
        return node

    kwargs = {
        key: instantiate(value, registry, _join(path, key))
        for key, value in node.items() if key != TARGET_KEY
    }
    if TARGET_KEY not in node:
        return kwargs

    target = node[TARGET_KEY]
    factory = registry.get(target) if isinstance(target, str) else None
    if factory is None:
        raise InstantiationError(path, f"unknown target {target!r}.")
    _check_arguments(path, factory, kwargs)
    try:
        return factory(**kwargs)
    except InstantiationError:
        raise
    except (TypeError, ValueError, LFADSException) as e:
        raise InstantiationError(path, f"{e.__class__.__name__}: {e}") from e


@dataclass
class RunObjects:
    model: LFADS
    datamodule: DataModule
    trainer: TrainerConfig


def build_run(config: Mapping[str, Any], registry: Registry = default_registry) -> RunObjects:
    """
    Build the data module, the model wired to the data dimensions and the
    trainer settings of a composed run config.

    :param config: A tree with ``datamodule``, ``model`` and ``trainer`` nodes.
    :param registry: Known components.
    :return: The wired objects.
    """
    missing: List[str] = [key for key in ("datamodule", "model", "trainer") if key not in config]
    if missing:
        raise InstantiationError("", f"missing top-level nodes {missing}.")
    validate_targets(config, registry)

    datamodule = instantiate(config["datamodule"], registry, "datamodule")
    if not isinstance(datamodule, DataModule):
        raise InstantiationError("datamodule", f"expected a DataModule, got {type(datamodule).__name__}.")

    model_node = dict(config["model"])
    for key, value in datamodule.dims().items():
        model_node.setdefault(key, value)
    model = instantiate(model_node, registry, "model")
    trainer = instantiate(config["trainer"], registry, "trainer")
    if not isinstance(trainer, TrainerConfig):
        raise InstantiationError("trainer", f"expected a TrainerConfig, got {type(trainer).__name__}.")
    return RunObjects(model=model, datamodule=datamodule, trainer=trainer)
