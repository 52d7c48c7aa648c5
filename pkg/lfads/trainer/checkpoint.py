"""
Training checkpoints.

A checkpoint is an ``LFCK0001`` container holding parameter arrays under
``param/<name>``, Adam moments under ``adam_m/<name>`` and ``adam_v/<name>``,
the best parameters seen so far under ``best/<name>``,
and a ``meta`` entry with the canonical JSON of every scalar field.
"""
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np

from ..exceptions import (
    CheckpointError,
    ConfigHashMismatchError,
    ContainerFormatError,
    TruncatedCheckpointError,
)
from ..utils.container import decode_container, encode_container
from ..utils.files import atomic_write_bytes, canonical_json
from ..utils.logger import logger

CHECKPOINT_MAGIC = b"LFCK0001"
CHECKPOINT_VERSION = 1


@dataclass
class CheckpointRecord:
    params: Dict[str, np.ndarray]
    adam_m: Dict[str, np.ndarray]
    adam_v: Dict[str, np.ndarray]
    adam_t: int
    epoch: int
    step: int
    rng_state: Dict[str, Any]
    config_hash: str
    trainer_state: Dict[str, Any] = field(default_factory=dict)
    history: List[Dict[str, Any]] = field(default_factory=list)
    best_params: Dict[str, np.ndarray] = field(default_factory=dict)

    def meta(self) -> Dict[str, Any]:
        return {
            "version": CHECKPOINT_VERSION,
            "adam_t": self.adam_t,
            "epoch": self.epoch,
            "step": self.step,
            "rng_state": self.rng_state,
            "config_hash": self.config_hash,
            "trainer_state": self.trainer_state,
            "history": self.history,
        }


def encode_checkpoint(record: CheckpointRecord) -> bytes:
    arrays: Dict[str, np.ndarray] = {}
    for prefix, group in (("param", record.params), ("adam_m", record.adam_m), ("adam_v", record.adam_v),
                          ("best", record.best_params)):
        for name, value in group.items():
            arrays[f"{prefix}/{name}"] = np.asarray(value, dtype=np.float64)
    arrays["meta"] = np.frombuffer(canonical_json(record.meta()).encode("utf-8"), dtype=np.uint8)
    return encode_container(arrays, CHECKPOINT_MAGIC)


def save_checkpoint(record: CheckpointRecord, path: Union[str, Path]) -> None:
    """
    Atomically write a checkpoint.

    :param record: The state to save.
    :param path: Destination file.
    """
    atomic_write_bytes(path, encode_checkpoint(record))
    logger.info(f"Saved checkpoint at epoch {record.epoch}, step {record.step} to {path}")


def load_checkpoint(path: Union[str, Path], expected_hash: Optional[str] = None) -> CheckpointRecord:
    """
    Read a checkpoint.

    :param path: Checkpoint file.
    :param expected_hash: When given, the configuration hash the checkpoint must carry.
    :return: The stored state.
    """
    path = Path(path)
    payload = path.read_bytes()
    if payload[:len(CHECKPOINT_MAGIC)] != CHECKPOINT_MAGIC:
        if CHECKPOINT_MAGIC.startswith(payload):
            raise TruncatedCheckpointError(str(path))
        raise CheckpointError(f"'{path}' is not a checkpoint file.")
    try:
        arrays = decode_container(payload, CHECKPOINT_MAGIC, str(path))
    except ContainerFormatError as e:
        raise TruncatedCheckpointError(str(path)) from e
    if "meta" not in arrays:
        raise TruncatedCheckpointError(str(path))

    meta = json.loads(arrays.pop("meta").tobytes().decode("utf-8"))
    if meta.get("version") != CHECKPOINT_VERSION:
        raise CheckpointError(f"Unsupported checkpoint version {meta.get('version')!r} in '{path}'.")
    if expected_hash is not None and meta["config_hash"] != expected_hash:
        raise ConfigHashMismatchError(expected_hash, meta["config_hash"])

    groups: Dict[str, Dict[str, np.ndarray]] = {"param": {}, "adam_m": {}, "adam_v": {}, "best": {}}
    for key, value in arrays.items():
        prefix, _, name = key.partition("/")
        if prefix not in groups:
            raise CheckpointError(f"Unexpected entry '{key}' in checkpoint '{path}'.")
        groups[prefix][name] = value

    return CheckpointRecord(
        params=groups["param"],
        adam_m=groups["adam_m"],
        adam_v=groups["adam_v"],
        adam_t=meta["adam_t"],
        epoch=meta["epoch"],
        step=meta["step"],
        rng_state=meta["rng_state"],
        config_hash=meta["config_hash"],
        trainer_state=meta["trainer_state"],
        history=meta["history"],
        best_params=groups["best"],
    )
