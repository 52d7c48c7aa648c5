from pathlib import Path
from typing import Union

CONFIG_DIR = Path(__file__).resolve().parent


def config_path(name: Union[str, Path]) -> Path:
    """
    Resolve a config argument: an existing file, or the name of a shipped config.

    :param name: A path, or a stem such as ``lorenz`` or ``spaces/pbt``.
    :return: The file to read.
    """
    path = Path(name)
    if path.is_file():
        return path
    shipped = CONFIG_DIR / (path if path.suffix == ".yaml" else path.with_suffix(".yaml"))
    return shipped if shipped.is_file() else path
