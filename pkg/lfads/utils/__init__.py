from .container import (
    decode_container,
    encode_container,
    read_container,
    write_container,
)
from .files import (
    atomic_write_bytes,
    atomic_write_text,
    canonical_json,
    sha256_hex,
)
from .logger import configure_logging, logger

__all__ = [
    "decode_container",
    "encode_container",
    "read_container",
    "write_container",

    "atomic_write_bytes",
    "atomic_write_text",
    "canonical_json",
    "sha256_hex",

    "configure_logging",
    "logger",
]
