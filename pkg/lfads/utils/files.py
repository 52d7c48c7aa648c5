import hashlib
import json
import os
import tempfile
from pathlib import Path
from typing import Any, Union


def atomic_write_bytes(path: Union[str, Path], payload: bytes) -> None:
    """
    Write bytes to a file so that readers never observe a partial file.

    The payload goes to a temporary file in the destination directory which
    is then renamed over the target.

    :param path: Destination file path.
    :param payload: The bytes to write.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise


def atomic_write_text(path: Union[str, Path], text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def canonical_json(data: Any) -> str:
    """
    Serialize data to JSON with sorted keys and no insignificant whitespace.

    :param data: A JSON-serializable object.
    :return: The canonical JSON string.
    """
    return json.dumps(data, sort_keys=True, separators=(",", ":"))


def sha256_hex(data: Any) -> str:
    """
    Hash a JSON-serializable object through its canonical JSON form.

    :param data: A JSON-serializable object.
    :return: The hexadecimal SHA-256 digest.
    """
    return hashlib.sha256(canonical_json(data).encode("utf-8")).hexdigest()
