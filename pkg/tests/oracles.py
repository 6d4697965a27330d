"""Independent reference implementations used as test oracles.

These deliberately avoid the package code paths: loops instead of
vectorization, textbook algorithms instead of LAPACK, arbitrary precision
where it matters.
"""

from __future__ import annotations

import math
from collections import deque

import mpmath
import numpy as np


def jacobi_eigenvalues(m, tol=1e-13, max_sweeps=100):
    """Cyclic Jacobi rotations; sorted eigenvalues of a small symmetric matrix."""
    a = np.array(m, dtype=float)
    n = a.shape[0]
    for _ in range(max_sweeps):
        off = math.sqrt(sum(a[i, j] ** 2 for i in range(n) for j in range(n) if i != j))
        if off < tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if abs(a[p, q]) < 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * a[p, q])
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                rot = np.eye(n)
                rot[p, p] = rot[q, q] = c
                rot[p, q] = s
                rot[q, p] = -s
                a = rot.T @ a @ rot
    return np.sort(np.diag(a))


def laplacian_loop(n, edges):
    """Normalized Laplacian entry by entry; isolated nodes get a zero row."""
    deg = [0] * n
    for u, v in edges:
        deg[u] += 1
        deg[v] += 1
    adj = [[0.0] * n for _ in range(n)]
    for u, v in edges:
        adj[u][v] = adj[v][u] = 1.0
    lap = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            if i == j:
                lap[i, j] = 1.0 if deg[i] > 0 else 0.0
            elif adj[i][j]:
                lap[i, j] = -1.0 / math.sqrt(deg[i] * deg[j])
    return lap


def bfs_hops(n, edges, source):
    nbrs = [[] for _ in range(n)]
    for u, v in edges:
        nbrs[u].append(v)
        nbrs[v].append(u)
    dist = {source: 0}
    q = deque([source])
    while q:
        u = q.popleft()
        for w in nbrs[u]:
            if w not in dist:
                dist[w] = dist[u] + 1
                q.append(w)
    return dist


def local_delta_loop(n, edges_g, edges_h, k):
    """Definition-level perturbation strength by explicit set algebra."""
    eg = {tuple(sorted(e)) for e in edges_g}
    eh = {tuple(sorted(e)) for e in edges_h}
    worst = 0.0
    for v in range(n):
        ng = {u for u, d in bfs_hops(n, eg, v).items() if d <= k}
        nh = {u for u, d in bfs_hops(n, eh, v).items() if d <= k}
        local_g = {e for e in eg if e[0] in ng and e[1] in ng}
        local_h = {e for e in eh if e[0] in nh and e[1] in nh}
        if not local_g:
            continue
        worst = max(worst, len(local_g ^ local_h) / len(local_g))
    return worst


def central_difference(f, x, h=1e-6):
    """Numerical gradient of scalar ``f`` at array ``x``."""
    x = np.array(x, dtype=float)
    g = np.zeros_like(x)
    it = np.nditer(x, flags=["multi_index"])
    for _ in it:
        idx = it.multi_index
        orig = x[idx]
        x[idx] = orig + h
        fp = f(x)
        x[idx] = orig - h
        fm = f(x)
        x[idx] = orig
        g[idx] = (fp - fm) / (2.0 * h)
    return g


def infonce_loop(z1, z2, tau):
    n = len(z1)
    u1 = [np.asarray(z) / np.linalg.norm(z) for z in z1]
    u2 = [np.asarray(z) / np.linalg.norm(z) for z in z2]
    total = 0.0
    for i in range(n):
        num = math.exp(float(u1[i] @ u2[i]) / tau)
        den = sum(math.exp(float(u1[i] @ u2[j]) / tau) for j in range(n))
        total += -math.log(num / den)
    return total / n


def jse_loop(z1, z2):
    n = len(z1)
    sp = lambda x: math.log1p(math.exp(x)) if x < 30 else x  # noqa: E731
    pos = sum(sp(-float(z1[i] @ z2[i])) for i in range(n)) / n
    neg = sum(sp(float(z1[i] @ z2[j])) for i in range(n) for j in range(n) if i != j) / (n * (n - 1))
    return pos + neg - 2.0 * math.log(2.0)


def barlow_loop(z1, z2, lam, eps=1e-8):
    n, d = z1.shape
    a = np.zeros_like(z1)
    b = np.zeros_like(z2)
    for j in range(d):
        for src, dst in ((z1, a), (z2, b)):
            col = src[:, j]
            mu = sum(col) / n
            sd = math.sqrt(sum((c - mu) ** 2 for c in col) / n)
            dst[:, j] = (col - mu) / (sd + eps)
    total = 0.0
    for i in range(d):
        for j in range(d):
            c = sum(a[r, i] * b[r, j] for r in range(n)) / n
            total += (1.0 - c) ** 2 if i == j else lam * c * c
    return total


def normal_equations(x, y, order):
    """Least squares via X^T X beta = X^T y plus the summary statistics."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    n = x.size
    X = np.column_stack([x**p for p in range(order + 1)])
    beta = np.linalg.solve(X.T @ X, X.T @ y)
    resid = y - X @ beta
    ssr = float(resid @ resid)
    sst = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - ssr / sst
    dof = n - order - 1
    adj = 1.0 - (1.0 - r2) * (n - 1) / dof
    f = ((sst - ssr) / order) / (ssr / dof)
    return beta, r2, adj, f, f_pvalue_mp(f, order, dof), dof


def f_pvalue_mp(f, d1, d2):
    """F upper tail by arbitrary-precision regularized incomplete beta."""
    mpmath.mp.dps = 40
    x = mpmath.mpf(d2) / (d2 + d1 * mpmath.mpf(f))
    return float(mpmath.betainc(mpmath.mpf(d2) / 2, mpmath.mpf(d1) / 2, 0, x, regularized=True))


def infonce_bounds_naive(n, tau, eps, eps_prime):
    """Bounds evaluated literally in floating point (valid for small exponents)."""
    lower = -math.log(math.exp(1 / tau) / (math.exp(1 / tau) + (n - 1) * math.exp(-eps_prime / tau)))
    a = (1 - eps**2 / 2) / tau
    upper = -math.log(math.exp(a) / (math.exp(a) + (n - 1) * math.exp(eps_prime / tau)))
    return lower, upper


def gcn_forward_loop(adj, x, weights, proj, self_loops=True, normalize=True):
    """Per-node message passing with explicit neighbour sums."""
    n = adj.shape[0]
    a = adj + (np.eye(n) if self_loops else 0)
    deg = a.sum(axis=1)
    h = np.asarray(x, float)
    for w in weights:
        new = np.zeros((n, w.shape[1]))
        for i in range(n):
            acc = np.zeros(h.shape[1])
            for j in range(n):
                if a[i, j]:
                    acc += a[i, j] / math.sqrt(deg[i] * deg[j]) * h[j]
            new[i] = np.maximum(acc @ w, 0.0)
        h = new
    z = h @ proj
    if normalize:
        z = z / np.linalg.norm(z, axis=1, keepdims=True)
    return z, h
