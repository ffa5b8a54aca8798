"""Static SVG figures: value panels (reference vs prediction) above absolute-error panels."""
from __future__ import annotations

import io
from dataclasses import dataclass

import matplotlib
import numpy as np
from matplotlib.backends.backend_svg import FigureCanvasSVG
from matplotlib.figure import Figure

# fixed element ids so identical inputs give byte-identical files
_RC = {"svg.hashsalt": "shallowpinn", "svg.fonttype": "path", "path.simplify": False}


@dataclass(frozen=True)
class Panel:
    component: str
    kind: str  # "value" or "error"
    times: np.ndarray
    lines: dict  # label -> y values


def build_panels(times, prediction: dict, reference: dict) -> list[Panel]:
    """Value panels for every component, followed by the matching error panels.

    ``prediction`` and ``reference`` map component names to sequences aligned
    with ``times``.
    """
    t = np.asarray(times, dtype=np.float64)
    if t.ndim != 1 or t.size == 0:
        raise ValueError("empty series: nothing to plot")
    if t.size < 2:
        raise ValueError("a series needs at least two points to draw a line")
    if not prediction:
        raise ValueError("no components given")
    if set(prediction) != set(reference):
        raise ValueError(f"component sets differ: {sorted(prediction)} vs {sorted(reference)}")
    values, errors = [], []
    for name in prediction:
        p = np.asarray(prediction[name], dtype=np.float64)
        r = np.asarray(reference[name], dtype=np.float64)
        if p.shape != t.shape or r.shape != t.shape:
            raise ValueError(f"component {name!r}: series lengths {p.size}/{r.size} differ from {t.size} times")
        values.append(Panel(name, "value", t, {"reference": r, "prediction": p}))
        errors.append(Panel(name, "error", t, {"abs error": np.abs(p - r)}))
    return values + errors


def emit_plot(times, prediction: dict, reference: dict, title: str = "") -> str:
    """Render the panels to a self-contained SVG document and return its text."""
    panels = build_panels(times, prediction, reference)
    ncols = len(panels) // 2
    with matplotlib.rc_context(_RC):
        fig = Figure(figsize=(3.2 * ncols, 5.6), layout="constrained")
        FigureCanvasSVG(fig)
        axes = fig.subplots(2, ncols, squeeze=False)
        for i, panel in enumerate(panels):
            ax = axes[0 if panel.kind == "value" else 1, i % ncols]
            ax.set_gid(f"panel-{panel.kind}-{panel.component}")
            if panel.kind == "value":
                ax.plot(panel.times, panel.lines["reference"], color="black", linewidth=1.2,
                        linestyle="-", label="reference", gid=f"reference-{panel.component}")
                ax.plot(panel.times, panel.lines["prediction"], color="red", linewidth=1.2,
                        linestyle="--", label="prediction", gid=f"prediction-{panel.component}")
                ax.set_ylabel(panel.component)
                if i == 0:
                    ax.legend(fontsize="small")
            else:
                ax.plot(panel.times, panel.lines["abs error"], color="tab:blue", linewidth=1.0,
                        gid=f"abserr-{panel.component}")
                ax.set_ylabel(f"|error| {panel.component}")
                ax.ticklabel_format(axis="y", style="sci", scilimits=(-2, 2))
            ax.set_xlabel("t")
        if title:
            fig.suptitle(title)
        buf = io.StringIO()
        fig.savefig(buf, format="svg", metadata={"Date": None, "Creator": "shallowpinn"})
    return buf.getvalue()
