"""Load ringsfwm CSV grid files and render normalized heatmaps with
optional marginal side panels.

The input format is the one the ringsfwm CLI writes: '#'-prefixed
metadata lines, a kappa_signal,kappa_idler,<value...> header, then one
row per grid point at fixed row-major order.  This package never
recomputes physics; it only presents the delimited output.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

__all__ = ["FigureJob", "GridData", "ParseError", "load_grid", "render"]

AXIS_SCALE = 1e9  # display angular detuning kappa*v in units of 1e9 s^-1


class ParseError(ValueError):
    """Malformed grid CSV; the message names the file and line number."""


@dataclass(frozen=True)
class GridData:
    """Parsed grid file: kappa axes [rad/m], group speeds [m/s], and the
    first value column reshaped to (n_signal, n_idler)."""

    kappa_signal: np.ndarray
    kappa_idler: np.ndarray
    values: np.ndarray
    v_S: float
    v_I: float
    value_name: str
    path: Path


@dataclass(frozen=True)
class FigureJob:
    """One rendering request: a grid file, an optional second panel,
    the output image path, and whether to draw marginal side panels."""

    grid_path: Path
    panel_path: Path | None
    out_path: Path
    marginals: bool = True
    labels: tuple[str, ...] = ("(a)", "(b)")


def _parse_meta(lines: list[str], path: Path) -> dict[str, str]:
    meta: dict[str, str] = {}
    for ln in lines:
        body = ln.lstrip("#").strip()
        for token in body.split():
            if "=" in token:
                key, _, val = token.partition("=")
                meta[key] = val
    return meta


def load_grid(path: str | Path) -> GridData:
    """Parse one CLI grid CSV.  Raises ParseError with the 1-based line
    number of the first offending line."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"{path}: cannot read: {exc}") from exc

    lines = text.splitlines()
    meta_lines = [ln for ln in lines if ln.startswith("#")]
    meta = _parse_meta(meta_lines, path)

    header_idx = None
    for i, ln in enumerate(lines):
        if not ln.startswith("#") and ln.strip():
            header_idx = i
            break
    if header_idx is None:
        raise ParseError(f"{path}:1: no header row found")
    header = lines[header_idx].split(",")
    if header[:2] != ["kappa_signal", "kappa_idler"] or len(header) < 3:
        raise ParseError(
            f"{path}:{header_idx + 1}: expected header starting "
            f"'kappa_signal,kappa_idler,<value>', got {lines[header_idx]!r}")
    value_name = header[2]

    ks, ki, vals = [], [], []
    for lineno, ln in enumerate(lines[header_idx + 1:],
                                start=header_idx + 2):
        if not ln.strip() or ln.startswith("#"):
            continue
        parts = ln.split(",")
        if len(parts) != len(header):
            raise ParseError(f"{path}:{lineno}: expected {len(header)} "
                             f"columns, got {len(parts)}")
        try:
            row = [float(p) for p in parts[:3]]
        except ValueError as exc:
            raise ParseError(f"{path}:{lineno}: {exc}") from exc
        ks.append(row[0])
        ki.append(row[1])
        vals.append(row[2])
    if not vals:
        raise ParseError(f"{path}:{header_idx + 2}: no data rows")

    kappa_s = np.unique(np.asarray(ks))
    kappa_i = np.unique(np.asarray(ki))
    n_s, n_i = len(kappa_s), len(kappa_i)
    if n_s * n_i != len(vals):
        raise ParseError(
            f"{path}:{header_idx + 2}: rows do not form a complete "
            f"{n_s} x {n_i} grid ({len(vals)} rows)")
    grid = np.asarray(vals).reshape(n_s, n_i)
    # rows were written signal-major with both axes ascending, so the
    # reshape above is already (signal, idler); verify the axis order
    if not np.array_equal(np.asarray(ks).reshape(n_s, n_i)[:, 0], kappa_s):
        raise ParseError(f"{path}:{header_idx + 2}: rows are not in "
                         f"signal-major ascending order")

    try:
        v_S = float(meta.get("v_S_m_per_s", "nan"))
        v_I = float(meta.get("v_I_m_per_s", "nan"))
    except ValueError as exc:
        raise ParseError(f"{path}: bad metadata speed: {exc}") from exc
    if not (np.isfinite(v_S) and np.isfinite(v_I)):
        raise ParseError(f"{path}: missing v_S_m_per_s / v_I_m_per_s "
                         f"metadata needed for axis scaling")
    return GridData(kappa_signal=kappa_s, kappa_idler=kappa_i, values=grid,
                    v_S=v_S, v_I=v_I, value_name=value_name, path=path)


def _normalize(values: np.ndarray) -> tuple[np.ndarray, bool]:
    peak = float(np.max(np.abs(values)))
    if peak == 0.0:
        return np.zeros_like(values), True
    return np.abs(values) / peak, False


def _draw_panel(fig, gs, col, grid: GridData, label: str, marginals: bool):
    norm, is_zero = _normalize(grid.values)
    x = grid.kappa_signal * grid.v_S / AXIS_SCALE
    y = grid.kappa_idler * grid.v_I / AXIS_SCALE

    ax = fig.add_subplot(gs[1, 2 * col])
    mesh = ax.pcolormesh(x, y, norm.T, shading="nearest", cmap="viridis",
                         vmin=0.0, vmax=1.0, rasterized=True)
    ax.set_xlabel(r"$\kappa v_S$ [$10^9\,\mathrm{s}^{-1}$]")
    ax.set_ylabel(r"$\kappa' v_I$ [$10^9\,\mathrm{s}^{-1}$]")
    ax.set_title(f"{label} {grid.value_name}", loc="left", fontsize=10)
    if is_zero:
        ax.annotate("all-zero grid", (0.5, 0.5),
                    xycoords="axes fraction", ha="center", va="center",
                    color="white", fontsize=12)
    if marginals and not is_zero:
        ax_top = fig.add_subplot(gs[0, 2 * col], sharex=ax)
        ax_top.plot(x, norm.sum(axis=1) / norm.sum(axis=1).max(),
                    color="tab:blue", lw=1.2)
        ax_top.tick_params(labelbottom=False)
        ax_top.set_yticks([0, 1])
        ax_side = fig.add_subplot(gs[1, 2 * col + 1], sharey=ax)
        ax_side.plot(norm.sum(axis=0) / norm.sum(axis=0).max(), y,
                     color="tab:orange", lw=1.2)
        ax_side.tick_params(labelleft=False)
        ax_side.set_xticks([0, 1])
    return mesh, norm


def render(job: FigureJob) -> list[np.ndarray]:
    """Render the job to job.out_path (format from its suffix).

    Returns the list of normalized (unit-peak) arrays actually drawn,
    one per panel, for verification against the inputs.
    """
    grids = [load_grid(job.grid_path)]
    if job.panel_path is not None:
        grids.append(load_grid(job.panel_path))
        same_s = np.array_equal(grids[0].kappa_signal,
                                grids[1].kappa_signal)
        same_i = np.array_equal(grids[0].kappa_idler, grids[1].kappa_idler)
        if not (same_s and same_i):
            raise ParseError(
                f"{job.panel_path}: panel grid axes differ from "
                f"{job.grid_path}; paneled grids must share axes")

    n = len(grids)
    width_ratios = []
    for _ in range(n):
        width_ratios += [4, 1] if job.marginals else [4, 0.0001]
    fig = plt.figure(figsize=(4.8 * n, 4.8))
    gs = fig.add_gridspec(2, 2 * n, width_ratios=width_ratios,
                          height_ratios=[1, 4], hspace=0.08, wspace=0.08)

    drawn = []
    for col, grid in enumerate(grids):
        label = job.labels[col] if col < len(job.labels) else ""
        _, norm = _draw_panel(fig, gs, col, grid, label, job.marginals)
        drawn.append(norm)

    out = Path(job.out_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, dpi=150, metadata=_deterministic_metadata(out))
    plt.close(fig)
    return drawn


def _deterministic_metadata(out: Path) -> dict | None:
    # strip timestamps so identical inputs give identical bytes
    suffix = out.suffix.lower()
    if suffix == ".png":
        return {"Software": "ringsfwm-figures"}
    if suffix == ".svg":
        return {"Date": None}
    return None
