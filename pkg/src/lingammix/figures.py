"""Figure rendering for experiment reports.

Figures are written to files next to the delimited output; nothing here
opens interactive windows.
"""

from __future__ import annotations

from pathlib import Path
from typing import Union

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .harness import ExperimentResult, _wilson_interval

__all__ = ["render_accuracy_figure"]


def render_accuracy_figure(result: ExperimentResult, path: Union[str, Path]) -> Path:
    """Bar chart of the correct-decision proportion per grid cell.

    Error bars are 95% Wilson intervals. Returns the written path.
    """
    path = Path(path)
    counts = result.cell_counts()
    cells = sorted(counts)
    labels = [f"N={N}\nl={l}" for N, l in cells]
    props, lo_err, hi_err = [], [], []
    for cell in cells:
        c, t = counts[cell]
        p, lo, hi = _wilson_interval(c, t)
        props.append(p)
        lo_err.append(p - lo)
        hi_err.append(hi - p)

    fig, ax = plt.subplots(figsize=(1.2 * max(4, len(cells)), 4))
    x = range(len(cells))
    ax.bar(x, props, color="tab:blue", width=0.6)
    ax.errorbar(x, props, yerr=[lo_err, hi_err], fmt="none", ecolor="black", capsize=4)
    ax.set_xticks(list(x))
    ax.set_xticklabels(labels)
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("proportion correct")
    ax.set_title("Correct causal-direction decisions (95% CI)")
    ax.axhline(0.5, color="gray", linestyle=":", linewidth=1)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
