"""Normalized-Laplacian spectra, spectral distances and ensemble density summaries."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .graph import Graph, NormalizedMatrix, normalize

MAX_SPECTRAL_NODES = 5000


class SymmetryError(ValueError):
    pass


class ShapeError(ValueError):
    pass


@dataclass
class Spectrum:
    values: np.ndarray

    def __len__(self):
        return self.values.size


@dataclass
class DensityCurve:
    grid: np.ndarray
    mean: np.ndarray
    std: np.ndarray
    bandwidths: np.ndarray | None = None


def _values(s) -> np.ndarray:
    return np.asarray(s.values if isinstance(s, Spectrum) else s, dtype=np.float64)


def eigenvalues(matrix, return_vectors=False, sym_tol=1e-12):
    """Full ascending eigenvalue vector of a symmetric matrix.

    Accepts a :class:`NormalizedMatrix` or a plain array. With
    ``return_vectors`` also returns the orthonormal eigenvectors.
    """
    m = matrix.values if isinstance(matrix, NormalizedMatrix) else np.asarray(matrix, float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ShapeError("matrix must be square")
    scale = max(1.0, float(np.abs(m).max(initial=0.0)))
    if np.abs(m - m.T).max(initial=0.0) > sym_tol * scale:
        raise SymmetryError("matrix is not symmetric")
    if return_vectors:
        w, q = np.linalg.eigh(m)
        return Spectrum(w), q
    return Spectrum(np.linalg.eigvalsh(m))


def graph_spectrum(graph: Graph) -> Spectrum:
    """Spectrum of the normalized Laplacian of ``graph``.

    Isolated nodes contribute a zero row/column, i.e. eigenvalue 0, which
    keeps the spectrum length equal to ``n`` for edge-dropped views.
    """
    if graph.n > MAX_SPECTRAL_NODES:
        raise ValueError(f"spectral work is capped at n={MAX_SPECTRAL_NODES}")
    deg = graph.degrees()
    if (deg > 0).all():
        return eigenvalues(normalize(graph, "laplacian", self_loops=False))
    a = graph.adjacency()
    inv = np.zeros(graph.n)
    inv[deg > 0] = 1.0 / np.sqrt(deg[deg > 0])
    lap = np.diag((deg > 0).astype(float)) - inv[:, None] * a * inv[None, :]
    return eigenvalues(0.5 * (lap + lap.T))


def spectral_distance(a, b) -> float:
    va, vb = np.sort(_values(a)), np.sort(_values(b))
    if va.shape != vb.shape:
        raise ShapeError(
            f"spectra have lengths {va.size} and {vb.size}; "
            "compare graphs of different sizes with kde_curve instead"
        )
    diff = va - vb
    scale = float(np.abs(diff).max()) if diff.size else 0.0
    if scale == 0.0:
        return 0.0
    # scaled so that tiny differences do not underflow to zero when squared
    return scale * float(np.linalg.norm(diff / scale))


def scott_bandwidth(x) -> float:
    x = np.asarray(x, float)
    sigma = x.std(ddof=1) if x.size > 1 else 0.0
    bw = sigma * x.size ** (-1.0 / 5.0)
    # degenerate spectra (all eigenvalues equal) still need a positive width
    return float(bw) if bw > 0 else 0.05


def _gaussian_kde(x, grid, bw):
    # reflect at both ends of [0, 2] so no kernel mass leaks off the domain
    pts = np.concatenate([x, -x, 4.0 - x])
    z = (grid[:, None] - pts[None, :]) / bw
    return np.exp(-0.5 * z * z).sum(axis=1) / (x.size * bw * np.sqrt(2.0 * np.pi))


def kde_curve(spectra, bandwidth="auto", grid_points=256) -> DensityCurve:
    """Gaussian KDE of each spectrum on a uniform grid over [0, 2].

    Returns the pointwise mean and std across the ensemble members. The
    kernel is reflected at 0 and 2 so each member integrates to one on
    the grid domain.
    """
    spectra = list(spectra)
    if not spectra:
        raise ValueError("need at least one spectrum")
    if grid_points < 16:
        raise ValueError("grid_points must be >= 16")
    grid = np.linspace(0.0, 2.0, grid_points)
    curves, bws = [], []
    for s in spectra:
        x = _values(s)
        bw = scott_bandwidth(x) if bandwidth == "auto" else float(bandwidth)
        if bw <= 0:
            raise ValueError("bandwidth must be positive")
        bws.append(bw)
        curves.append(_gaussian_kde(x, grid, bw))
    stack = np.vstack(curves)
    return DensityCurve(grid, stack.mean(axis=0), stack.std(axis=0), np.array(bws))


def histogram(spectrum, bins=50):
    """Density histogram over [0, 2]; returns ``(densities, edges)``."""
    if bins < 2:
        raise ValueError("bins must be >= 2")
    x = np.clip(_values(spectrum), 0.0, 2.0)
    dens, edges = np.histogram(x, bins=bins, range=(0.0, 2.0), density=True)
    return dens, edges


def ensemble_mean_spectrum(spectra):
    """Entrywise mean and std of sorted, equal-length spectra."""
    arrs = [np.sort(_values(s)) for s in spectra]
    if not arrs:
        raise ValueError("need at least one spectrum")
    if len({a.size for a in arrs}) != 1:
        raise ShapeError("spectra in an ensemble must have equal length")
    stack = np.vstack(arrs)
    return Spectrum(stack.mean(axis=0)), stack.std(axis=0)


# ------------------------------------------------------------------ output


def _fmt(x) -> str:
    return repr(float(x))


def write_curve_csv(path, curve: DensityCurve) -> None:
    lines = ["grid,mean,std"]
    lines += [f"{_fmt(g)},{_fmt(m)},{_fmt(s)}" for g, m, s in zip(curve.grid, curve.mean, curve.std)]
    Path(path).write_text("\n".join(lines) + "\n")


def write_histogram_csv(path, densities, edges) -> None:
    lines = ["bin_left,bin_right,density"]
    lines += [
        f"{_fmt(lo)},{_fmt(hi)},{_fmt(d)}" for lo, hi, d in zip(edges[:-1], edges[1:], densities)
    ]
    Path(path).write_text("\n".join(lines) + "\n")


def write_spectrum_csv(path, spectrum) -> None:
    lines = ["index,eigenvalue"] + [f"{i},{_fmt(v)}" for i, v in enumerate(_values(spectrum))]
    Path(path).write_text("\n".join(lines) + "\n")


def curves_svg(curves: dict, width=640, height=360, title="") -> str:
    """Self-contained SVG line plot of named density curves (mean with a std band)."""
    palette = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]
    pad = 40
    ymax = max(float((c.mean + c.std).max()) for c in curves.values()) or 1.0

    def sx(x):
        return pad + (width - 2 * pad) * x / 2.0

    def sy(y):
        return height - pad - (height - 2 * pad) * y / ymax

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>',
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>',
        f'<text x="{width / 2}" y="{pad / 2}" text-anchor="middle">{title}</text>',
    ]
    for tick in (0.0, 0.5, 1.0, 1.5, 2.0):
        parts.append(
            f'<text x="{sx(tick):.1f}" y="{height - pad + 15}" text-anchor="middle" '
            f'font-size="10">{tick}</text>'
        )
    for i, (name, c) in enumerate(curves.items()):
        color = palette[i % len(palette)]
        upper = " ".join(f"{sx(g):.2f},{sy(m + s):.2f}" for g, m, s in zip(c.grid, c.mean, c.std))
        lower = " ".join(
            f"{sx(g):.2f},{sy(max(m - s, 0.0)):.2f}"
            for g, m, s in zip(c.grid[::-1], c.mean[::-1], c.std[::-1])
        )
        parts.append(f'<polygon points="{upper} {lower}" fill="{color}" fill-opacity="0.2"/>')
        line = " ".join(f"{sx(g):.2f},{sy(m):.2f}" for g, m in zip(c.grid, c.mean))
        parts.append(f'<polyline points="{line}" fill="none" stroke="{color}"/>')
        parts.append(
            f'<text x="{width - pad - 5}" y="{pad + 14 * (i + 1)}" text-anchor="end" '
            f'fill="{color}" font-size="11">{name}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts)
