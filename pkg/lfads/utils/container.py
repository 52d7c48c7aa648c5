"""
Keyed binary container for named n-dimensional arrays.

Layout (little-endian)::

    magic      8 bytes
    count      uint32
    entry*     name_len uint16 | name utf-8 | dtype_len uint8 | dtype str
               | ndim uint8 | shape uint64 * ndim | nbytes uint64 | payload

Payloads are row-major. Entries are written in sorted name order so that
equal mappings always encode to equal bytes.
"""
import struct
from pathlib import Path
from typing import Dict, Mapping, Union

import numpy as np

from .files import atomic_write_bytes
from .logger import logger
from ..exceptions import ContainerFormatError

MAGIC_SIZE = 8


def encode_container(arrays: Mapping[str, np.ndarray], magic: bytes) -> bytes:
    """
    Encode a mapping of arrays into container bytes.

    :param arrays: Mapping from array name to array.
    :param magic: The 8-byte file signature.
    :return: The encoded bytes.
    """
    if len(magic) != MAGIC_SIZE:
        raise ValueError(f"Magic must be {MAGIC_SIZE} bytes, got {len(magic)}.")

    chunks = [magic, struct.pack("<I", len(arrays))]
    for name in sorted(arrays):
        array = np.ascontiguousarray(arrays[name])
        dtype = array.dtype.newbyteorder("<") if array.dtype.byteorder == ">" else array.dtype
        array = array.astype(dtype, copy=False)
        name_bytes = name.encode("utf-8")
        dtype_bytes = dtype.str.encode("ascii")
        payload = array.tobytes(order="C")

        chunks.append(struct.pack("<H", len(name_bytes)))
        chunks.append(name_bytes)
        chunks.append(struct.pack("<B", len(dtype_bytes)))
        chunks.append(dtype_bytes)
        chunks.append(struct.pack("<B", array.ndim))
        chunks.append(struct.pack(f"<{array.ndim}Q", *array.shape))
        chunks.append(struct.pack("<Q", len(payload)))
        chunks.append(payload)

    return b"".join(chunks)


def decode_container(payload: bytes, magic: bytes, path: str = "<memory>") -> Dict[str, np.ndarray]:
    """
    Decode container bytes into a dictionary of arrays.

    :param payload: The encoded bytes.
    :param magic: The expected 8-byte file signature.
    :param path: Source name used in error messages.
    :return: Mapping from array name to array, in file order.
    """
    view = memoryview(payload)
    offset = 0

    def take(n: int) -> memoryview:
        nonlocal offset
        if offset + n > len(view):
            raise ContainerFormatError(path, f"unexpected end of data at byte {offset} (needed {n} more)")
        chunk = view[offset:offset + n]
        offset += n
        return chunk

    if bytes(take(MAGIC_SIZE)) != magic:
        raise ContainerFormatError(path, f"bad magic header (expected {magic!r})")

    (count,) = struct.unpack("<I", take(4))
    arrays: Dict[str, np.ndarray] = {}
    for _ in range(count):
        (name_len,) = struct.unpack("<H", take(2))
        name = bytes(take(name_len)).decode("utf-8")
        (dtype_len,) = struct.unpack("<B", take(1))
        dtype = np.dtype(bytes(take(dtype_len)).decode("ascii"))
        (ndim,) = struct.unpack("<B", take(1))
        shape = struct.unpack(f"<{ndim}Q", take(8 * ndim))
        (nbytes,) = struct.unpack("<Q", take(8))
        expected = int(np.prod(shape, dtype=np.int64)) * dtype.itemsize
        if nbytes != expected:
            raise ContainerFormatError(path, f"array '{name}' declares {nbytes} bytes, shape needs {expected}")
        data = np.frombuffer(bytes(take(nbytes)), dtype=dtype).reshape(shape).copy()
        arrays[name] = data

    if offset != len(view):
        raise ContainerFormatError(path, f"{len(view) - offset} trailing bytes after last array")

    return arrays


def write_container(path: Union[str, Path], arrays: Mapping[str, np.ndarray], magic: bytes) -> None:
    """
    Atomically write arrays to a container file.

    :param path: Destination path.
    :param arrays: Mapping from array name to array.
    :param magic: The 8-byte file signature.
    """
    atomic_write_bytes(path, encode_container(arrays, magic))
    logger.debug(f"Wrote {len(arrays)} arrays to {path}")


def read_container(path: Union[str, Path], magic: bytes) -> Dict[str, np.ndarray]:
    """
    Read a container file.

    :param path: Source path.
    :param magic: The expected 8-byte file signature.
    :return: Mapping from array name to array.
    """
    payload = Path(path).read_bytes()
    arrays = decode_container(payload, magic, str(path))
    logger.debug(f"Read {len(arrays)} arrays from {path}")
    return arrays
