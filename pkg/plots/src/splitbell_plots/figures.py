"""Figure builders: Bell-sweep curves and per-sector probability heatmaps.

Everything here is presentation: the numbers are read from splitbell CSV
files and drawn as-is.  Rendering is deterministic for a fixed FigureSpec --
the Agg/SVG backends are driven directly (no pyplot state), the SVG hash salt
is pinned, and no timestamps are embedded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import matplotlib
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

from .io import SchemaError, load_exact, load_sectors, load_sweep

QUANTUM_BOUND = 2.0 * math.sqrt(2.0)
CLASSICAL_BOUND = 2.0

KINDS = ("sweep-curves", "sector-heatmap")
FORMATS = ("png", "svg")

_APPROACH_COLORS = {"I": "tab:blue", "II": "tab:orange", "III": "tab:green"}
_GAMMA_STYLES = ("-", "--", "-.", ":")


@dataclass(frozen=True)
class StyleOptions:
    dpi: int = 150
    title: str | None = None
    formats: tuple[str, ...] = FORMATS

    def __post_init__(self):
        for fmt in self.formats:
            if fmt not in FORMATS:
                raise ValueError(f"format must be one of {FORMATS}, got {fmt!r}")
        if not self.formats:
            raise ValueError("at least one output format is required")


@dataclass(frozen=True)
class FigureSpec:
    """What to draw: input CSV path(s), figure kind, output path, style.

    ``output`` may carry a .png/.svg suffix to request that single format, or
    be a bare stem, in which case every format in the style is written.
    """

    kind: str
    inputs: tuple[str, ...]
    output: str
    style: StyleOptions = field(default_factory=StyleOptions)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if not self.inputs:
            raise ValueError("at least one input CSV is required")

    def targets(self) -> tuple[tuple[str, str], ...]:
        """(path, format) pairs to write."""
        for fmt in FORMATS:
            if self.output.endswith("." + fmt):
                return ((self.output, fmt),)
        return tuple((f"{self.output}.{fmt}", fmt) for fmt in self.style.formats)


def _new_figure(spec: FigureSpec, figsize: tuple[float, float]) -> Figure:
    fig = Figure(figsize=figsize, dpi=spec.style.dpi)
    FigureCanvasAgg(fig)
    return fig


def _save(fig: Figure, spec: FigureSpec) -> tuple[str, ...]:
    written = []
    with matplotlib.rc_context({"svg.hashsalt": "splitbell-plots"}):
        for path, fmt in spec.targets():
            metadata = {"Date": None} if fmt == "svg" else None
            fig.savefig(path, format=fmt, metadata=metadata)
            written.append(path)
    return tuple(written)


def build_sweep_figure(spec: FigureSpec) -> Figure:
    """Assemble the B-vs-r axes: data curves, bounds, optional exact overlay."""
    curves = load_sweep(spec.inputs[0])
    exact = load_exact(spec.inputs[1]) if len(spec.inputs) > 1 else None
    fig = _new_figure(spec, figsize=(6.4, 4.4))
    ax = fig.add_subplot(1, 1, 1)

    ax.axhline(CLASSICAL_BOUND, color="0.35", lw=1.0, ls="--", label="B = 2")
    ax.axhline(QUANTUM_BOUND, color="0.35", lw=1.0, ls=":", label=r"B = 2$\sqrt{2}$")
    if exact is not None:
        ax.plot(exact[0], exact[1], color="black", lw=1.0, label="closed form")

    gamma_order = sorted({c.gamma for c in curves}, reverse=True)
    for curve in curves:
        label = f"approach {curve.approach} ($\\gamma$={curve.gamma:g})"
        if curve.n_atoms is not None:
            label += f", N={curve.n_atoms}"
        ax.plot(
            curve.r,
            curve.b,
            color=_APPROACH_COLORS.get(curve.approach, "tab:red"),
            ls=_GAMMA_STYLES[gamma_order.index(curve.gamma) % len(_GAMMA_STYLES)],
            lw=1.4,
            label=label,
        )

    ax.set_xlabel("squeezing parameter r")
    ax.set_ylabel("Bell parameter B")
    if spec.style.title:
        ax.set_title(spec.style.title)
    ax.legend(fontsize=8, ncols=2)
    fig.tight_layout()
    return fig


def build_sectors_figure(spec: FigureSpec) -> Figure:
    """Assemble the heatmap grid, one panel per (N_A, N_B) sector."""
    sectors = load_sectors(spec.inputs[0])
    n = len(sectors)
    ncols = min(2, n)
    nrows = math.ceil(n / ncols)
    fig = _new_figure(spec, figsize=(3.4 * ncols, 3.0 * nrows))
    axes = fig.subplots(nrows, ncols, squeeze=False)
    for ax in axes.ravel()[n:]:
        ax.set_axis_off()
    for ax, ((n_a, n_b), mat) in zip(axes.ravel(), sectors):
        # each panel gets its own scale so sparse sectors stay readable
        vmax = mat.max() if mat.max() > 0 else 1.0
        image = ax.imshow(mat, origin="lower", cmap="viridis", vmin=0.0, vmax=vmax)
        fig.colorbar(image, ax=ax, shrink=0.85)
        ax.set_title(f"$(N_A, N_B) = ({n_a}, {n_b})$", fontsize=9)
        ax.set_xlabel("$k_B$", fontsize=8)
        ax.set_ylabel("$k_A$", fontsize=8)
        ax.set_xticks(range(0, n_b + 1, max(1, (n_b + 1) // 6)))
        ax.set_yticks(range(0, n_a + 1, max(1, (n_a + 1) // 6)))
    if spec.style.title:
        fig.suptitle(spec.style.title)
    fig.tight_layout()
    return fig


def plot_sweep(spec: FigureSpec) -> tuple[str, ...]:
    """Render Bell-sweep curves; returns the written image paths."""
    if spec.kind != "sweep-curves":
        raise SchemaError(f"plot_sweep wants kind 'sweep-curves', got {spec.kind!r}")
    return _save(build_sweep_figure(spec), spec)


def plot_sectors(spec: FigureSpec) -> tuple[str, ...]:
    """Render the sector heatmap grid; returns the written image paths."""
    if spec.kind != "sector-heatmap":
        raise SchemaError(f"plot_sectors wants kind 'sector-heatmap', got {spec.kind!r}")
    return _save(build_sectors_figure(spec), spec)
