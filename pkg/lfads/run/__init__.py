from .config import (
    RESOLVED_FILE,
    compose_config,
    dump_config,
    get_path,
    has_path,
    load_resolved,
    load_yaml,
    merge,
    parse_override,
    parse_value,
    save_resolved,
    set_path,
)
from .instantiate import (
    TARGET_KEY,
    Registry,
    RunObjects,
    build_run,
    default_registry,
    instantiate,
    iter_targets,
    validate_targets,
)
from .multi import SUMMARY_FILE, run_bounded, run_multi, run_multi_async
from .pbt import STATE_FILE, run_pbt, run_pbt_async
from .single import run_single, train_config
from .space import Choice, Const, LogUniform, Sampler, SearchSpace, Uniform, apply_values, parse_sampler

__all__ = [
    "compose_config",
    "dump_config",
    "get_path",
    "has_path",
    "load_resolved",
    "load_yaml",
    "merge",
    "parse_override",
    "parse_value",
    "save_resolved",
    "set_path",
    "RESOLVED_FILE",

    "Registry",
    "RunObjects",
    "TARGET_KEY",
    "build_run",
    "default_registry",
    "instantiate",
    "iter_targets",
    "validate_targets",

    "Sampler",
    "Uniform",
    "LogUniform",
    "Choice",
    "Const",
    "SearchSpace",
    "apply_values",
    "parse_sampler",

    "run_single",
    "train_config",
    "run_bounded",
    "run_multi",
    "run_multi_async",
    "run_pbt",
    "run_pbt_async",
    "STATE_FILE",
    "SUMMARY_FILE",
]
