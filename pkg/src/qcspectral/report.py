"""CSV/JSON writers and SVG comparison plots for the command line front end."""

from __future__ import annotations

import csv
import io
import json
import math
from typing import Iterable, Sequence

import numpy as np

SVG_SIZE = (800, 600)

__all__ = ["fmt_float", "jsonable", "dumps", "spectrum_csv", "plot_comparison"]


def fmt_float(x) -> str:
    """17 significant digits; non-finite values become ``nan``/``inf``/``-inf``."""
    if x is None:
        return ""
    return "%.17g" % float(x)


def jsonable(obj):
    """Recursively convert to JSON-ready values; non-finite floats become ``None``."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def dumps(obj) -> str:
    """Deterministic JSON (sorted keys); floats use the shortest round-trip repr."""
    return json.dumps(jsonable(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def spectrum_csv(eigenvalues: Sequence[float], reference: Sequence[float] | None = None) -> str:
    """Columns ``index,eigenvalue,reference,rel_error``; reference cells blank when absent."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["index", "eigenvalue", "reference", "rel_error"])
    for i, lam in enumerate(eigenvalues):
        if reference is not None:
            ref = float(reference[i])
            w.writerow([i + 1, fmt_float(lam), fmt_float(ref), fmt_float(abs(lam / ref - 1.0))])
        else:
            w.writerow([i + 1, fmt_float(lam), "", ""])
    return buf.getvalue()


def plot_comparison(path: str, index: Iterable[int], actual: Iterable[float],
                    bounds: dict[str, Iterable[float]], title: str, ylabel: str) -> None:
    """Mode index against the actual difference and each bound, log10 y-axis, 800x600 SVG."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    idx = np.asarray(list(index))
    with matplotlib.rc_context({"svg.hashsalt": "qcspectral", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(SVG_SIZE[0] / 72.0, SVG_SIZE[1] / 72.0), dpi=72)
        series = {"actual": np.asarray(list(actual), dtype=float)}
        series.update({k: np.asarray(list(v), dtype=float) for k, v in bounds.items()})
        markers = iter(["o", "s", "^", "v", "D", "x"])
        for name, y in series.items():
            ok = np.isfinite(y) & (y > 0)
            if np.any(ok):
                ax.plot(idx[ok], y[ok], marker=next(markers), linestyle="-" if name != "actual" else "none",
                        label=name)
        ax.set_yscale("log")
        ax.set_xlabel("eigenvalue index n")
        ax.set_ylabel(ylabel)
        ax.set_title(title)
        ax.set_xticks(idx)
        if ax.get_legend_handles_labels()[0]:
            ax.legend(loc="best")
        ax.grid(True, which="both", alpha=0.3)
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
