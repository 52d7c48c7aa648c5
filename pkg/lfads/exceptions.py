from typing import Any, Dict, Optional, Sequence, Tuple


class LFADSException(Exception):
    pass


class ShapeError(LFADSException):
    """
    Exception raised when operand shapes are incompatible for an operation.

    The message names the operation and every offending shape so that the
    failing call site can be found without a debugger.
    """

    def __init__(self, op: str, *shapes: Tuple[int, ...], reason: Optional[str] = None) -> None:
        self.op = op
        self.shapes = shapes
        shapes_str = " vs ".join(str(tuple(s)) for s in shapes)
        message = f"Shape mismatch in '{op}': {shapes_str}."
        if reason:
            message += f" {reason}"
        super().__init__(message)


class DomainError(LFADSException):
    """
    Exception raised when an operation receives input outside its domain,
    e.g. log or lgamma of a non-positive value.
    """

    def __init__(self, op: str, value: float) -> None:
        self.op = op
        self.value = value
        super().__init__(f"Input outside the domain of '{op}': found {value!r} (expected > 0).")


class NotScalarError(LFADSException):

    def __init__(self, shape: Tuple[int, ...]) -> None:
        self.shape = shape
        super().__init__(f"backward() requires a single-element tensor, got shape {tuple(shape)}.")


class OperationError(LFADSException, ValueError):
    """
    Exception raised when an operation is requested by an unknown name or
    without the operands it needs.
    """

    def __init__(self, op_kind: str, known: Sequence[str], reason: Optional[str] = None) -> None:
        self.op_kind = op_kind
        self.known = tuple(known)
        message = reason or f"Unknown operation '{op_kind}'. Expected one of: {', '.join(self.known)}."
        super().__init__(message)


class ContainerFormatError(LFADSException):

    def __init__(self, path: str, reason: str) -> None:
        self.path = path
        super().__init__(f"Invalid container file '{path}': {reason}")


class MissingArrayError(LFADSException):

    def __init__(self, name: str, path: Optional[str] = None) -> None:
        self.name = name
        where = f" in '{path}'" if path else ""
        super().__init__(f"Required array '{name}' is missing{where}.")


class DatasetError(LFADSException):
    pass


class EmptySplitError(DatasetError):

    def __init__(self, split: str) -> None:
        self.split = split
        super().__init__(f"Split '{split}' contains no trials.")


class ObservationSupportError(LFADSException):
    """
    Exception raised when reconstruction data lies outside the support of
    the observation model. The flat element index and the offending value
    are kept on the exception.
    """

    def __init__(self, model: str, index: Tuple[int, ...], value: float, expected: str) -> None:
        self.model = model
        self.index = index
        self.value = value
        super().__init__(
            f"{model} data out of support at element {tuple(int(i) for i in index)}: "
            f"value {value!r}, expected {expected}."
        )


class PosteriorWidthError(LFADSException):

    def __init__(self, width: int) -> None:
        self.width = width
        super().__init__(f"Posterior parameters need an even width (mean ‖ logvar), got {width}.")


class PriorError(LFADSException):
    pass


class AugmentationError(LFADSException):
    pass


class NonFiniteLossError(LFADSException):
    """
    Exception raised when the training loss becomes NaN or infinite.

    The loss components of the failing step are attached as a diagnostic dump.
    """

    def __init__(self, step: int, components: Dict[str, float]) -> None:
        self.step = step
        self.components = components
        dump = ", ".join(f"{k}={v!r}" for k, v in components.items())
        super().__init__(f"Non-finite loss at step {step}: {dump}")


class CheckpointError(LFADSException):
    pass


class ConfigHashMismatchError(CheckpointError):

    def __init__(self, expected: str, found: str) -> None:
        self.expected = expected
        self.found = found
        super().__init__(
            f"Checkpoint was written for model config {found[:12]}, "
            f"but the current model config hashes to {expected[:12]}."
        )


class TruncatedCheckpointError(CheckpointError):

    def __init__(self, path: str) -> None:
        self.path = path
        super().__init__(f"Checkpoint file '{path}' is truncated or corrupt.")


class MetricError(LFADSException):
    pass


class ConfigError(LFADSException):
    pass


class UnknownOverridePathError(ConfigError):

    def __init__(self, path: str) -> None:
        self.path = path
        super().__init__(
            f"Override path '{path}' does not exist in the composed config. "
            f"Prefix it with '+' to add a new key."
        )


class CyclicGroupError(ConfigError):

    def __init__(self, chain: Sequence[str]) -> None:
        self.chain = list(chain)
        super().__init__(f"Cyclic config group reference: {' -> '.join(chain)}")


class InstantiationError(ConfigError):
    """
    Exception raised when a config node cannot be turned into an object.

    :param path: Dotted path of the failing node in the config tree.
    :param reason: What went wrong (unknown target, missing argument, type mismatch).
    """

    def __init__(self, path: str, reason: str) -> None:
        self.path = path or "<root>"
        self.reason = reason
        super().__init__(f"Cannot instantiate node '{self.path}': {reason}")


class SearchSpaceError(ConfigError):

    def __init__(self, path: str, reason: str) -> None:
        self.path = path
        super().__init__(f"Invalid search space entry '{path}': {reason}")


class PopulationError(LFADSException):

    def __init__(self, generation: int, failures: Dict[int, str]) -> None:
        self.generation = generation
        self.failures = failures
        super().__init__(f"Every population member failed in generation {generation}: {failures}")


def error_payload(error: BaseException) -> Dict[str, Any]:
    """
    Build the structured record the CLI prints for a failure.

    :param error: The raised exception.
    :return: A JSON-serializable dictionary.
    """
    return {"error": error.__class__.__name__, "message": str(error)}
