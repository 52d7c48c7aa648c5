"""
Hierarchical YAML configuration.

A main file lists config groups under ``defaults``::

    defaults:
      - model: lfads
      - model/train_aug_stack: coordinated_dropout
      - datamodule: lorenz
      - trainer: default

Each entry ``group: option`` loads ``<config dir>/<group>/<option>.yaml`` and
places it at the dotted location of the group (``model.train_aug_stack``).
Group files are merged first, in order; the main file's own keys are merged
last. Overrides of the form ``dotted.path=value`` are then applied left to
right; a leading ``+`` adds a key that does not exist yet, and an override
whose key names a group of the defaults list selects another option.
"""
import copy
import os
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import yaml
from cachetools import LRUCache, cached

from ..exceptions import ConfigError, CyclicGroupError, UnknownOverridePathError
from ..utils.files import atomic_write_text, sha256_hex
from ..utils.logger import logger

DEFAULTS_KEY = "defaults"
RESOLVED_FILE = "config.resolved"


@cached(cache=LRUCache(maxsize=256))
def _load_yaml_cached(path: str, mtime_ns: int) -> Any:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = yaml.safe_load(fh)
        except yaml.YAMLError as e:
            raise ConfigError(f"Cannot parse '{path}': {e}") from e
    logger.debug(f"Parsed config file {path}")
    return {} if data is None else data


def load_yaml(path: Union[str, Path]) -> Any:
    """
    Parse a YAML file, memoized on path and modification time.

    :param path: The file to read.
    :return: A private deep copy of the parsed document.
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"Config file '{path}' does not exist.")
    return copy.deepcopy(_load_yaml_cached(str(path.resolve()), os.stat(path).st_mtime_ns))


def parse_value(text: str) -> Any:
    """
    Interpret an override value as int, then float, then bool, then string.
    """
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    lowered = text.strip().lower()
    if lowered in ("true", "false"):
        return lowered == "true"
    return text


def split_path(path: str) -> List[str]:
    parts = path.split(".")
    if not path or any(not part for part in parts):
        raise ConfigError(f"Malformed config path '{path}'.")
    return parts


def _child(node: Any, key: str) -> Tuple[bool, Any]:
    if isinstance(node, dict):
        return (key in node), node.get(key)
    if isinstance(node, list) and key.lstrip("-").isdigit():
        index = int(key)
        return (-len(node) <= index < len(node)), (node[index] if -len(node) <= index < len(node) else None)
    return False, None


def get_path(config: Any, path: str) -> Any:
    """
    Read the value at a dotted path; list elements are addressed by index.
    """
    node = config
    for key in split_path(path):
        found, node = _child(node, key)
        if not found:
            raise UnknownOverridePathError(path)
    return node


def has_path(config: Any, path: str) -> bool:
    try:
        get_path(config, path)
    except UnknownOverridePathError:
        return False
    return True


def set_path(config: Any, path: str, value: Any, create: bool = False) -> None:
    """
    Replace the value at a dotted path in place.

    :param config: The config tree.
    :param path: Dotted path of map keys and list indices.
    :param value: The new value.
    :param create: Allow adding missing map keys, creating intermediate maps.
    """
    keys = split_path(path)
    node = config
    for key in keys[:-1]:
        found, child = _child(node, key)
        if not found:
            if not (create and isinstance(node, dict)):
                raise UnknownOverridePathError(path)
            child = node[key] = {}
        node = child

    last = keys[-1]
    found, _ = _child(node, last)
    if isinstance(node, list) and found:
        node[int(last)] = value
    elif isinstance(node, dict) and (found or create):
        node[last] = value
    else:
        raise UnknownOverridePathError(path)


def merge(base: Any, update: Any) -> Any:
    """
    Recursively merge ``update`` into a copy of ``base``; maps merge key by
    key, everything else is replaced.
    """
    if isinstance(base, dict) and isinstance(update, dict):
        out = dict(base)
        for key, value in update.items():
            out[key] = merge(base[key], value) if key in base else copy.deepcopy(value)
        return out
    return copy.deepcopy(update)


def _place(tree: Dict[str, Any], group: str, content: Any) -> Dict[str, Any]:
    nested: Any = content
    for key in reversed(group.split("/")):
        nested = {key: nested}
    return merge(tree, nested)


def _defaults(document: Dict[str, Any], path: Path) -> List[Tuple[str, Optional[str]]]:
    entries = document.pop(DEFAULTS_KEY, None) or []
    if not isinstance(entries, list):
        raise ConfigError(f"'{DEFAULTS_KEY}' in '{path}' must be a list.")
    out = []
    for entry in entries:
        if not isinstance(entry, dict) or len(entry) != 1:
            raise ConfigError(f"Malformed defaults entry {entry!r} in '{path}'; expected 'group: option'.")
        (group, option), = entry.items()
        out.append((str(group), None if option is None else str(option)))
    return out


def _compose_file(
        path: Path,
        config_dir: Path,
        prefix: str,
        selections: Mapping[str, Optional[str]],
        chain: Tuple[str, ...],
) -> Dict[str, Any]:
    key = str(path.resolve())
    if key in chain:
        raise CyclicGroupError(list(chain) + [key])
    document = load_yaml(path)
    if not isinstance(document, dict):
        raise ConfigError(f"Config file '{path}' must contain a mapping.")

    tree: Dict[str, Any] = {}
    for group, option in _defaults(document, path):
        full_group = f"{prefix}/{group}" if prefix else group
        option = selections.get(full_group, option)
        if option is None:
            continue
        group_file = config_dir / full_group / f"{option}.yaml"
        content = _compose_file(group_file, config_dir, full_group, selections, chain + (key,))
        tree = _place(tree, group, content)
    return merge(tree, document)


def _group_names(main_path: Path) -> List[str]:
    return [group for group, _ in _defaults(load_yaml(main_path), main_path)]


def parse_override(override: str) -> Tuple[str, Any, bool]:
    """
    Split ``[+]dotted.path=value``.

    :return: The path, the parsed value and whether the key may be added.
    """
    if "=" not in override:
        raise ConfigError(f"Override '{override}' is not of the form 'dotted.path=value'.")
    path, text = override.split("=", 1)
    create = path.startswith("+")
    path = path.lstrip("+").strip()
    split_path(path)
    return path, parse_value(text), create


def compose_config(
        main_path: Union[str, Path],
        group_selections: Optional[Mapping[str, Optional[str]]] = None,
        overrides: Sequence[str] = (),
        config_dir: Optional[Union[str, Path]] = None,
) -> Dict[str, Any]:
    """
    Build a run configuration from a main file, group files and overrides.

    :param main_path: The main YAML file.
    :param group_selections: Options replacing those of the defaults list, by group.
    :param overrides: ``dotted.path=value`` strings applied left to right.
    :param config_dir: Root of the group directories, the main file's directory by default.
    :return: The composed tree.
    """
    main_path = Path(main_path)
    config_dir = Path(config_dir) if config_dir is not None else main_path.parent
    selections: Dict[str, Optional[str]] = dict(group_selections or {})

    groups = set(_group_names(main_path))
    parsed = []
    for override in overrides:
        path, value, create = parse_override(override)
        group = path.replace(".", "/")
        if group in groups and not create and isinstance(value, str):
            selections[group] = None if value.lower() in ("null", "none") else value
        else:
            parsed.append((path, value, create))

    config = _compose_file(main_path, config_dir, "", selections, ())
    for path, value, create in parsed:
        set_path(config, path, value, create=create)
        logger.debug(f"Override {path}={value!r}")
    return config


def dump_config(config: Mapping[str, Any]) -> str:
    """
    Stable YAML rendering of a config tree.
    """
    return yaml.safe_dump(dict(config), sort_keys=True, default_flow_style=False)


def config_digest(config: Mapping[str, Any]) -> str:
    return sha256_hex(config)


def save_resolved(config: Mapping[str, Any], run_dir: Union[str, Path]) -> Path:
    path = Path(run_dir) / RESOLVED_FILE
    atomic_write_text(path, dump_config(config))
    return path


def load_resolved(run_dir: Union[str, Path]) -> Dict[str, Any]:
    return load_yaml(Path(run_dir) / RESOLVED_FILE)
