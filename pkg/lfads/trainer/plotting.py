from pathlib import Path
from typing import List, Union

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .metrics import MetricsRow  # noqa: E402


def plot_loss_curve(history: List[MetricsRow], path: Union[str, Path]) -> None:
    """
    Draw train, validation and smoothed validation loss per epoch as SVG.

    :param history: The training history.
    :param path: Destination ``.svg`` file.
    """
    epochs = [row.epoch for row in history]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(epochs, [row.train_total for row in history], label="train")
    ax.plot(epochs, [row.valid_total_full for row in history], label="valid")
    ax.plot(epochs, [row.valid_smoothed for row in history], label="valid (smoothed)", linestyle="--")
    ax.set_xlabel("epoch")
    ax.set_ylabel("loss")
    ax.legend()
    fig.tight_layout()
    fig.savefig(str(path), format="svg", metadata={"Date": None})
    plt.close(fig)
