"""Diagrams, barcodes, heatmaps and the perturbation experiment.

SVG is written by hand (SVG 1.1, fixed number formatting) so that equal
inputs always give byte-identical files. Heatmap images go through
matplotlib.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DegenerateRange, DegenerateResidue, EmptyData, TooShort
from .formats import bri_csv_text
from .geometry import as_backbone
from .invariant import BRI_COLUMNS, TRIN_COLUMNS, compute_bond_stats, compute_bri, compute_trin, linf

BID_COLORS = (
    "#1f77b4", "#ff7f0e", "#2ca02c",
    "#d62728", "#9467bd", "#8c564b",
    "#e377c2", "#7f7f7f", "#17becf",
)  # fmt: skip

_SVG_HEAD = '<?xml version="1.0" encoding="UTF-8"?>\n'


def _write(text: str, out) -> None:
    if isinstance(out, (str, os.PathLike)):
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        out.write(text)


def _need_rows(bri: np.ndarray) -> None:
    if bri.shape[0] < 2:
        raise TooShort(f"needs at least 2 residues, got {bri.shape[0]}")


# -- backbone invariant diagram ---------------------------------------------


def bid_csv(bri) -> str:
    """Raw diagram values: BRI rows ``2..m`` in BRI CSV layout."""
    bri = np.asarray(bri, dtype=np.float64)
    _need_rows(bri)
    return bri_csv_text(bri[1:], first_index=2)


def bid_svg(bri, width: int = 900, height: int = 420, title: str = "") -> str:
    """Nine polylines ``(i, BRI[i, c])`` for ``i = 2..m`` with a legend."""
    bri = np.asarray(bri, dtype=np.float64)
    _need_rows(bri)
    rows = bri[1:]
    m = bri.shape[0]
    left, right, top, bottom = 60, 110, 30, 40
    pw, ph = width - left - right, height - top - bottom
    lo, hi = float(rows.min()), float(rows.max())
    if hi - lo < 1e-12:
        lo, hi = lo - 1.0, hi + 1.0
    x0, x1 = (2.0, float(m)) if m > 2 else (1.5, 2.5)

    def px(i):
        return left + (i - x0) / (x1 - x0) * pw

    def py(v):
        return top + (hi - v) / (hi - lo) * ph

    parts = [
        _SVG_HEAD,
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">\n',
        f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="white" stroke="black"/>\n',
    ]
    if title:
        parts.append(f'<text x="{left}" y="{top - 10}" font-size="14">{title}</text>\n')
    for v in (lo, 0.0, hi) if lo < 0 < hi else (lo, hi):
        parts.append(
            f'<text x="{left - 6}" y="{py(v) + 4:.2f}" font-size="11" text-anchor="end">{v:.2f}</text>\n'
        )
    parts.append(f'<text x="{left}" y="{height - 12}" font-size="11">2</text>\n')
    parts.append(f'<text x="{left + pw}" y="{height - 12}" font-size="11" text-anchor="end">{m}</text>\n')
    idx = np.arange(2, m + 1, dtype=np.float64)
    for j, name in enumerate(BRI_COLUMNS):
        pts = " ".join(f"{px(i):.2f},{py(v):.2f}" for i, v in zip(idx, rows[:, j]))
        parts.append(
            f'<polyline fill="none" stroke="{BID_COLORS[j]}" stroke-width="1.2" points="{pts}"><title>{name}</title></polyline>\n'
        )
        ly = top + 14 + 16 * j
        lx = left + pw + 12
        parts.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 20}" y2="{ly}" stroke="{BID_COLORS[j]}" stroke-width="2"/>\n')
        parts.append(f'<text x="{lx + 26}" y="{ly + 4}" font-size="12">{name}</text>\n')
    parts.append("</svg>\n")
    return "".join(parts)


def emit_bid(bri, svg_out=None, csv_out=None, title: str = "") -> tuple[str, str]:
    svg, csv_text = bid_svg(bri, title=title), bid_csv(bri)
    if svg_out is not None:
        _write(svg, svg_out)
    if csv_out is not None:
        _write(csv_text, csv_out)
    return svg, csv_text


# -- backbone invariant barcode -----------------------------------------------


def column_ranges(bri) -> dict[str, tuple[float, float]]:
    """Per-column (min, max) over BRI rows ``2..m``."""
    rows = np.asarray(bri, dtype=np.float64)[1:]
    return {n: (float(rows[:, j].min()), float(rows[:, j].max())) for j, n in enumerate(BRI_COLUMNS)}


def bib_colors(bri, ranges: dict[str, tuple[float, float]] | None = None) -> np.ndarray:
    """RGB bars of shape ``(3, m-1, 3)``: bars N, A, C; channels from x, y, z.

    Each channel is ``clamp((v - min) / (max - min)) * 255`` rounded half up.
    """
    bri = np.asarray(bri, dtype=np.float64)
    _need_rows(bri)
    ranges = ranges or column_ranges(bri)
    rows = bri[1:]
    out = np.empty((3, rows.shape[0], 3), dtype=np.uint8)
    for j, name in enumerate(BRI_COLUMNS):
        lo, hi = ranges[name]
        if not hi > lo:
            raise DegenerateRange(f"column {name} has an empty range [{lo}, {hi}]")
        t = np.clip((rows[:, j] - lo) / (hi - lo), 0.0, 1.0)
        out[j // 3, :, j % 3] = np.floor(t * 255.0 + 0.5).astype(np.uint8)
    return out


def bib_svg(colors: np.ndarray, first_index: int = 2, cell: int = 6, bar: int = 28, title: str = "") -> str:
    n = colors.shape[1]
    left, top, gap = 30, 24 if title else 8, 6
    width = left + n * cell + 10
    height = top + 3 * bar + 2 * gap + 24
    parts = [
        _SVG_HEAD,
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" shape-rendering="crispEdges">\n',
    ]
    if title:
        parts.append(f'<text x="{left}" y="16" font-size="13">{title}</text>\n')
    for b, atom in enumerate(("N", "A", "C")):
        y = top + b * (bar + gap)
        parts.append(f'<text x="{left - 6}" y="{y + bar / 2 + 4:.1f}" font-size="12" text-anchor="end">{atom}</text>\n')
        for k in range(n):
            r, g, bl = (int(c) for c in colors[b, k])
            parts.append(
                f'<rect x="{left + k * cell}" y="{y}" width="{cell}" height="{bar}" fill="rgb({r},{g},{bl})"/>\n'
            )
    ty = top + 3 * bar + 2 * gap + 16
    parts.append(f'<text x="{left}" y="{ty}" font-size="11">{first_index}</text>\n')
    parts.append(
        f'<text x="{left + n * cell}" y="{ty}" font-size="11" text-anchor="end">{first_index + n - 1}</text>\n'
    )
    parts.append("</svg>\n")
    return "".join(parts)


def emit_bib(bri, ranges=None, out=None, title: str = "") -> str:
    svg = bib_svg(bib_colors(bri, ranges), title=title)
    if out is not None:
        _write(svg, out)
    return svg


# -- heatmaps ---------------------------------------------------------------


@dataclass
class Heatmap:
    xcol: str
    ycol: str
    counts: np.ndarray  # (nx, ny) integer bin counts
    xrange: tuple[float, float]
    yrange: tuple[float, float]
    n_values: int  # residues in the column domain, including any outside the ranges

    @property
    def total(self) -> int:
        return int(self.counts.sum())


def _column_values(coords: np.ndarray, col: str) -> tuple[np.ndarray, int]:
    """Values of a named column and the first row index (0-based) it is defined on."""
    if col in TRIN_COLUMNS:
        return compute_trin(coords)[:, TRIN_COLUMNS.index(col)], 0
    if col in BRI_COLUMNS:
        return compute_bri(coords)[:, BRI_COLUMNS.index(col)], 1
    raise ValueError(f"unknown column {col!r}; choose from {TRIN_COLUMNS + BRI_COLUMNS}")


def heatmap_counts(
    corpus: Iterable,
    xcol: str,
    ycol: str,
    bins: int | tuple[int, int] = 512,
    xrange: tuple[float, float] | None = None,
    yrange: tuple[float, float] | None = None,
) -> Heatmap:
    """2D histogram of a column pair over every residue of every chain.

    trin columns are defined on rows ``1..m`` and BRI columns on rows
    ``2..m``; a pair uses the rows where both are defined.
    """
    xs, ys = [], []
    for coords in corpus:
        coords = as_backbone(coords)
        xv, xs0 = _column_values(coords, xcol)
        yv, ys0 = _column_values(coords, ycol)
        start = max(xs0, ys0)
        xs.append(xv[start:])
        ys.append(yv[start:])
    x = np.concatenate(xs) if xs else np.empty(0)
    y = np.concatenate(ys) if ys else np.empty(0)
    if x.size == 0:
        raise EmptyData("no residues to bin")

    def span(v, given):
        if given is not None:
            return (float(given[0]), float(given[1]))
        lo, hi = float(v.min()), float(v.max())
        return (lo - 0.5, hi + 0.5) if hi - lo < 1e-12 else (lo, hi)

    xr, yr = span(x, xrange), span(y, yrange)
    counts, _, _ = np.histogram2d(x, y, bins=bins, range=[xr, yr])
    return Heatmap(xcol, ycol, counts.astype(np.int64), xr, yr, int(x.size))


def render_heatmap(hm: Heatmap, out, log: bool = True, cmap: str = "rainbow", title: str = "") -> None:
    """Save as PNG or SVG (chosen by the file extension); empty bins stay white."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    values = np.log10(1.0 + hm.counts) if log else hm.counts.astype(float)
    masked = np.ma.masked_where(hm.counts == 0, values)
    colormap = matplotlib.colormaps[cmap].copy()
    colormap.set_bad("white")
    fig, ax = plt.subplots(figsize=(6, 5), dpi=120)
    im = ax.imshow(
        masked.T,
        origin="lower",
        aspect="auto",
        cmap=colormap,
        extent=(*hm.xrange, *hm.yrange),
        interpolation="nearest",
    )
    ax.set_xlabel(f"{hm.xcol} (Å)")
    ax.set_ylabel(f"{hm.ycol} (Å)")
    if title:
        ax.set_title(title)
    fig.colorbar(im, ax=ax, label="log10(1 + residues)" if log else "residues")
    fig.tight_layout()
    fmt = "svg" if str(out).lower().endswith(".svg") else "png"
    fig.savefig(out, format=fmt, metadata={"Date": None} if fmt == "svg" else None)
    plt.close(fig)


def emit_heatmap(corpus, xcol, ycol, bins=512, out=None, log=True, xrange=None, yrange=None, cmap="rainbow"):
    hm = heatmap_counts(corpus, xcol, ycol, bins, xrange, yrange)
    if out is not None:
        render_heatmap(hm, out, log=log, cmap=cmap)
    return hm


# -- perturbation experiment ------------------------------------------------


@dataclass
class PerturbationCurve:
    eps: np.ndarray
    mean_linf: np.ndarray
    max_linf: np.ndarray
    trials: int
    slope: float  # least-squares slope through the origin
    lambda_bound: float  # 2(1 + 2LK) over the original and all perturbed copies

    def csv(self) -> str:
        lines = ["eps,mean_linf,max_linf,bound"]
        for e, a, b in zip(self.eps, self.mean_linf, self.max_linf):
            lines.append(f"{e:.17g},{a:.17g},{b:.17g},{self.lambda_bound * e:.17g}")
        return "\n".join(lines) + "\n"


def parse_eps(text: str) -> list[float]:
    """``"0.01:0.1:0.01"`` (inclusive range) or ``"0.01,0.05"``."""
    if ":" in text:
        start, stop, step = (float(p) for p in text.split(":"))
        if step <= 0:
            raise ValueError("eps step must be positive")
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [round(start + k * step, 12) for k in range(n)]
    return [float(p) for p in text.split(",") if p.strip()]


def perturb_experiment(coords, eps_list: Sequence[float], trials: int = 20, seed: int = 0) -> PerturbationCurve:
    """Mean L-infinity BRI change under uniform per-coordinate noise in ``[-eps, eps]``.

    A perturbed copy that turns degenerate is redrawn.
    """
    coords = as_backbone(coords)
    eps = np.asarray(eps_list, dtype=np.float64)
    if eps.size and (np.any(np.diff(eps) <= 0) or eps[0] < 0):
        raise ValueError("eps values must be non-negative and strictly increasing")
    rng = np.random.default_rng(seed)
    base = compute_bri(coords)
    means, maxes, copies = [], [], [coords]
    for e in eps:
        dists = []
        for _ in range(trials):
            for _attempt in range(100):
                q = coords + rng.uniform(-e, e, coords.shape)
                try:
                    dists.append(linf(base, compute_bri(q)))
                    break
                except DegenerateResidue:
                    continue
            else:  # pragma: no cover
                raise DegenerateResidue("could not draw a non-degenerate perturbation")
            copies.append(q)
        means.append(float(np.mean(dists)) if dists else 0.0)
        maxes.append(float(np.max(dists)) if dists else 0.0)
    means_a, maxes_a = np.array(means), np.array(maxes)
    denom = float(np.dot(eps, eps))
    slope = float(np.dot(eps, means_a) / denom) if denom > 0 else 0.0
    stats = compute_bond_stats(copies)
    lam = stats.lam if stats.L_CN is not None else math.nan
    return PerturbationCurve(eps, means_a, maxes_a, trials, max(slope, 0.0), lam)
