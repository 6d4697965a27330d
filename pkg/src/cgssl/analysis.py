"""Regression statistics for sweep results and wallclock timing of augmentation steps."""

from __future__ import annotations

import csv
import time
import warnings
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
from scipy.special import betainc

from .augment import add_edge, drop_edge
from .graph import Graph
from .spectrum import graph_spectrum

SWEEP_COLUMNS = ("p", "og_aug", "aug_aug", "accuracy")
# method labels used in the timing table
METHOD_NAMES = {
    "spectrum": "Spectrum calculation",
    "drop_edge": "DropEdge",
    "add_edge": "AddEdge",
}


class CollinearityError(ValueError):
    pass


class DegenerateInstrumentError(ValueError):
    pass


class WeakInstrumentWarning(UserWarning):
    pass


@dataclass
class RegressionResult:
    coefficients: np.ndarray
    r_squared: float
    adj_r_squared: float
    f_statistic: float
    p_value: float
    n: int
    dof: int
    first_stage_f: float | None = None

    def to_dict(self):
        d = asdict(self)
        d["coefficients"] = [float(c) for c in self.coefficients]
        return d


@dataclass
class TimingRow:
    method: str
    n: int
    m: int
    seconds_per_call: float


def f_sf(f, dfn, dfd) -> float:
    """Upper tail of the F(dfn, dfd) distribution."""
    if not np.isfinite(f):
        return 0.0
    if f <= 0:
        return 1.0
    x = dfd / (dfd + dfn * f)
    return float(min(1.0, max(0.0, betainc(dfd / 2.0, dfn / 2.0, x))))


def design_matrix(x, order) -> np.ndarray:
    x = np.asarray(x, float)
    return np.vander(x, order + 1, increasing=True)


def _qr_solve(X, y, rtol=1e-10):
    q, r = np.linalg.qr(X)
    diag = np.abs(np.diag(r))
    if diag.size == 0 or diag.min() <= rtol * max(diag.max(), 1.0):
        raise CollinearityError("design matrix is rank deficient")
    return np.linalg.solve(r, q.T @ y)


def _fit_stats(y, resid, k, n):
    ssr = float(resid @ resid)
    sst = float(np.sum((y - y.mean()) ** 2))
    dof = n - k - 1
    if sst == 0.0:
        r2 = 1.0 if ssr == 0.0 else 0.0
    else:
        r2 = 1.0 - ssr / sst
    adj = 1.0 - (1.0 - r2) * (n - 1) / dof
    if ssr == 0.0:
        f = np.inf
    else:
        f = ((sst - ssr) / k) / (ssr / dof)
    return r2, adj, float(f), f_sf(f, k, dof), dof


def poly_regression(x, y, order=1) -> RegressionResult:
    """Least squares of ``y`` on ``[1, x, ..., x^order]`` with R^2, adjusted R^2 and overall F."""
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    n = x.size
    if y.size != n:
        raise ValueError("x and y lengths differ")
    if n < order + 2:
        raise ValueError(f"need at least {order + 2} observations")
    if np.unique(x).size < 2:
        raise CollinearityError("x needs at least two distinct values")
    X = design_matrix(x, order)
    beta = _qr_solve(X, y)
    r2, adj, f, p, dof = _fit_stats(y, y - X @ beta, order, n)
    return RegressionResult(beta, r2, adj, f, p, n, dof)


def ols(x, y) -> RegressionResult:
    return poly_regression(x, y, 1)


def iv2sls(y, x, z, weak_threshold=10.0) -> RegressionResult:
    """Two-stage least squares with one endogenous regressor and one instrument.

    Stage-2 statistics use the structural residuals ``y - [1, x] beta``.
    """
    y, x, z = (np.asarray(a, float) for a in (y, x, z))
    n = y.size
    if not (x.size == n and z.size == n):
        raise ValueError("y, x, z lengths differ")
    if n < 4:
        raise ValueError("need at least 4 observations")
    if np.var(z) == 0.0:
        raise DegenerateInstrumentError("instrument has zero variance")
    first = poly_regression(z, x, 1)
    if first.f_statistic < weak_threshold:
        warnings.warn(
            f"weak instrument: first-stage F = {first.f_statistic:.3g} < {weak_threshold}",
            WeakInstrumentWarning, stacklevel=2,
        )
    x_hat = first.coefficients[0] + first.coefficients[1] * z
    if np.var(x_hat) == 0.0:
        raise DegenerateInstrumentError("instrument does not move the fitted regressor")
    X_hat = design_matrix(x_hat, 1)
    beta = _qr_solve(X_hat, y)
    resid = y - design_matrix(x, 1) @ beta
    r2, adj, _, _, dof = _fit_stats(y, resid, 1, n)
    # Wald F for the slope with the IV variance estimate
    sigma2 = float(resid @ resid) / dof
    xtx_inv = np.linalg.inv(X_hat.T @ X_hat)
    var_slope = sigma2 * xtx_inv[1, 1]
    f = beta[1] ** 2 / var_slope if var_slope > 0 else np.inf
    return RegressionResult(beta, r2, adj, float(f), f_sf(f, 1, dof), n, dof, first.f_statistic)


def time_benchmark(op, g: Graph, repeats=5, p=0.2, q=None, seed=0) -> TimingRow:
    """Median wallclock per call after one untimed warm-up call."""
    if repeats < 3:
        raise ValueError("repeats must be >= 3")
    rng = np.random.default_rng(seed)
    if op == "spectrum":
        fn = lambda: graph_spectrum(g)  # noqa: E731
    elif op == "drop_edge":
        fn = lambda: drop_edge(g, p, rng)  # noqa: E731
    elif op == "add_edge":
        qq = q if q is not None else p * g.m / max(g.n * (g.n - 1) / 2 - g.m, 1)
        fn = lambda: add_edge(g, qq, rng)  # noqa: E731
    else:
        raise ValueError(f"unknown op {op!r}")
    fn()
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return TimingRow(METHOD_NAMES[op], g.n, g.m, max(float(np.median(times)), 1e-12))


def loglog_slope(ns, seconds) -> float:
    return float(np.polyfit(np.log(ns), np.log(seconds), 1)[0])


# ---------------------------------------------------------------- sweep CSV


def read_sweep_csv(path) -> dict[str, np.ndarray]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise ValueError(f"{path}: no rows")
    missing = [c for c in SWEEP_COLUMNS if c not in rows[0]]
    if missing:
        raise ValueError(f"{path}: missing columns {missing}")
    return {c: np.array([float(r[c]) for r in rows]) for c in SWEEP_COLUMNS}


def regression_table(data: dict[str, np.ndarray], orders=(1, 2)) -> list[dict]:
    """Univariate regressions of accuracy on each sweep regressor."""
    out = []
    for reg in ("p", "og_aug", "aug_aug"):
        for order in orders:
            res = poly_regression(data[reg], data["accuracy"], order)
            out.append({"regressor": reg, "order": order, **_flat(res)})
    return out


def iv_table(data: dict[str, np.ndarray]) -> list[dict]:
    """IV2SLS of accuracy on each spectral distance, instrumented by the drop rate."""
    out = []
    for reg in ("og_aug", "aug_aug"):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", WeakInstrumentWarning)
            res = iv2sls(data["accuracy"], data[reg], data["p"])
        out.append({"regressor": reg, "instrument": "p", **_flat(res)})
    return out


def _flat(res: RegressionResult):
    d = res.to_dict()
    coefs = d.pop("coefficients")
    for i, c in enumerate(coefs):
        d[f"beta{i}"] = c
    return d


def write_rows_csv(path, rows: list[dict]) -> None:
    if not rows:
        Path(path).write_text("")
        return
    keys = list(dict.fromkeys(k for r in rows for k in r))
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=keys)
        w.writeheader()
        for r in rows:
            w.writerow({k: _fmt(r.get(k)) for k in keys})


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return "" if v is None else v
