"""Matplotlib rendering of rate-distortion curves to image files."""

from __future__ import annotations

from collections.abc import Sequence
from pathlib import Path

from .dataio import curve_quality
from .detmetrics import RDCurve
from .errors import ArgumentError

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def render_rd_figure(
    curves: Sequence[RDCurve],
    path: str | Path,
    x_label: str = "bitrate [kbps]",
    y_label: str | None = None,
    title: str | None = None,
) -> None:
    """Plot each curve with markers and save the figure (format from the suffix)."""
    if not curves:
        raise ArgumentError("need at least one curve")
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(7.2, 4.8), dpi=120)
    for idx, curve in enumerate(curves):
        ys, kind = curve_quality(curve)
        if y_label is None:
            y_label = kind
        ax.plot(
            curve.bitrates(),
            ys,
            marker="o",
            markersize=4,
            color=_PALETTE[idx % len(_PALETTE)],
            label=curve.label,
        )
    ax.set_xlabel(x_label)
    ax.set_ylabel(y_label)
    if title:
        ax.set_title(title)
    ax.grid(True, alpha=0.4)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
