"""Figure kinds rendered from coupled-dyson artifacts.

Each renderer takes a FigureSpec (input artifact paths, output image path,
display options), reads the artifacts read-only, and writes one deterministic
PNG (fixed size, fixed style, pinned metadata). The closed-form semicircle
curves used as references are evaluated locally; the simulation package is
never imported.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .io import EmptySeriesError, read_report, read_table

FIGSIZE = (7.0, 4.5)
DPI = 110
PNG_METADATA = {"Software": "coupled-dyson-plots"}


@dataclass
class FigureSpec:
    kind: str
    inputs: dict
    output: str
    options: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, doc):
        for key in ("kind", "inputs", "output"):
            if key not in doc:
                raise ValueError(f"figure spec missing {key!r}")
        return cls(kind=doc["kind"], inputs=dict(doc["inputs"]),
                   output=doc["output"], options=dict(doc.get("options", {})))


def _semicircle_density(x):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    inside = np.abs(x) < 2.0
    out[inside] = np.sqrt(4.0 - x[inside] ** 2) / (2.0 * np.pi)
    return out


def _semicircle_transform(z):
    z = np.asarray(z, dtype=complex)
    return 0.5 * (z - np.sqrt(z - 2.0) * np.sqrt(z + 2.0))


def _new_axes(title):
    fig, ax = plt.subplots(figsize=FIGSIZE, dpi=DPI)
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    return fig, ax


def _save(fig, output):
    out = Path(output)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, metadata=PNG_METADATA)
    plt.close(fig)
    return str(out)


def render_spectra_overlay(spec):
    """Histogram of terminal spectra with the semicircle density overlay."""
    table = read_table(spec.inputs["spectra"], require=("process", "lambda"))
    process = float(spec.options.get("process", 1))
    lam = table.col("lambda")[table.col("process") == process]
    if lam.size == 0:
        raise EmptySeriesError(f"no eigenvalues for process {process}")
    fig, ax = _new_axes(spec.options.get("title", "terminal spectrum vs semicircle"))
    ax.hist(lam, bins=spec.options.get("bins", 40), density=True, alpha=0.6,
            color="tab:blue", label="spectrum")
    xs = np.linspace(-2.4, 2.4, 481)
    ax.plot(xs, _semicircle_density(xs), "k-", lw=2, label="semicircle density")
    ax.set_xlabel("eigenvalue")
    ax.set_ylabel("density")
    ax.legend()
    return _save(fig, spec.output)


def render_field_error(spec):
    """Deviation of the Stieltjes field from the semicircle transform."""
    table = read_table(spec.inputs["field"], require=("re_z", "im_z"))
    x = table.col("re_z")
    z = x + 1j * table.col("im_z")
    reference = _semicircle_transform(z)
    fig, ax = _new_axes(spec.options.get("title", "Stieltjes field error"))
    p = 1
    while f"re_G_{p}" in table.columns:
        g = table.col(f"re_G_{p}") + 1j * table.col(f"im_G_{p}")
        ax.semilogy(x, np.abs(g - reference) + 1e-18, label=f"process {p}")
        p += 1
    if p == 1:
        raise EmptySeriesError("field artifact has no transform columns")
    ax.set_xlabel("Re z")
    ax.set_ylabel("|G - semicircle transform|")
    ax.legend()
    return _save(fig, spec.output)


def render_covariance_bars(spec):
    """Empirical vs closed-form stationary covariance, one bar pair per entry."""
    report = read_report(spec.inputs["report"],
                         require=("empirical_covariance", "closed_form_covariance"))
    emp = np.asarray(report["empirical_covariance"], dtype=float)
    closed = np.asarray(report["closed_form_covariance"], dtype=float)
    k = emp.shape[0]
    labels = [f"({i + 1},{j + 1})" for i in range(k) for j in range(i, k)]
    emp_vals = [emp[i, j] for i in range(k) for j in range(i, k)]
    closed_vals = [closed[i, j] for i in range(k) for j in range(i, k)]
    pos = np.arange(len(labels))
    fig, ax = _new_axes(spec.options.get("title", "stationary trace covariance"))
    width = 0.38
    ax.bar(pos - width / 2, emp_vals, width, label="empirical", color="tab:blue")
    ax.bar(pos + width / 2, closed_vals, width, label="closed form", color="tab:orange")
    ax.set_xticks(pos, labels)
    ax.set_xlabel("covariance entry")
    ax.set_ylabel("value")
    ax.legend()
    return _save(fig, spec.output)


def render_instanton_overlay(spec):
    """Instanton path drawn over rate-function contours."""
    path = read_table(spec.inputs["path"], require=("x", "y"))
    grid = read_table(spec.inputs["rate_grid"], require=("x", "y", "I"))
    gx = np.unique(grid.col("x"))
    gy = np.unique(grid.col("y"))
    values = grid.col("I").reshape(gx.size, gy.size).T
    fig, ax = _new_axes(spec.options.get("title", "instanton over rate contours"))
    cs = ax.contour(gx, gy, values, levels=spec.options.get("levels", 12),
                    cmap="viridis")
    ax.clabel(cs, inline=True, fontsize=7, fmt="%.2f")
    ax.plot(path.col("x"), path.col("y"), "r-", lw=2, label="instanton")
    ax.plot(path.col("x")[-1:], path.col("y")[-1:], "r.", ms=12, label="target")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.legend(loc="upper left")
    return _save(fig, spec.output)


def render_phase_diagram(spec):
    """det Sigma^-1 across the coupling sweep (zero at the critical coupling)."""
    report = read_report(spec.inputs["report"], require=("gammas", "det_sigma_inv"))
    gammas = np.asarray(report["gammas"], dtype=float)
    dets = np.asarray(report["det_sigma_inv"], dtype=float)
    if gammas.size == 0:
        raise EmptySeriesError("phase report has an empty sweep")
    fig, ax = _new_axes(spec.options.get("title", "fluctuation phase diagram"))
    ax.plot(gammas, dets, "b-", lw=2, label="det of inverse covariance")
    ax.axhline(0.0, color="k", lw=0.8)
    for gc in (-0.5, 0.5):
        ax.axvline(gc, color="tab:red", ls="--", lw=1, alpha=0.8)
    ax.set_xlabel("coupling")
    ax.set_ylabel("det")
    ax.legend()
    return _save(fig, spec.output)


def render_sff_curve(spec):
    """Spectral form factor on log-log axes with the plateau guide."""
    table = read_table(spec.inputs["sff"], require=("t", "sff"))
    fig, ax = _new_axes(spec.options.get("title", "spectral form factor"))
    ax.loglog(table.col("t"), table.col("sff"), "b-", lw=1.5, label="SFF")
    if "report" in spec.inputs:
        report = read_report(spec.inputs["report"], require=("plateau_reference",))
        ax.axhline(report["plateau_reference"], color="tab:red", ls="--", lw=1,
                   label="1/N plateau")
    ax.set_xlabel("t")
    ax.set_ylabel("SFF(t)")
    ax.legend(loc="lower left")
    return _save(fig, spec.output)


RENDERERS = {
    "spectra_overlay": render_spectra_overlay,
    "field_error": render_field_error,
    "covariance_bars": render_covariance_bars,
    "instanton_overlay": render_instanton_overlay,
    "phase_diagram": render_phase_diagram,
    "sff_curve": render_sff_curve,
}


def render(spec):
    """Render one figure; returns the output path."""
    if isinstance(spec, dict):
        spec = FigureSpec.from_dict(spec)
    if spec.kind not in RENDERERS:
        raise ValueError(f"unknown figure kind {spec.kind!r} "
                         f"(known: {sorted(RENDERERS)})")
    return RENDERERS[spec.kind](spec)
