"""Contrastive objectives with analytic gradients for both views.

Every loss returns ``(value, dL/dZ1, dL/dZ2)``.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
from scipy.special import expit, log_expit, logsumexp, softmax

from .encoder import DegenerateEmbeddingError

LOSS_KINDS = ("infonce", "jse", "byol", "barlow_twins")
BT_EPS = 1e-8
_LN4 = 2.0 * np.log(2.0)


@dataclass
class LossConfig:
    kind: str = "infonce"
    tau: float | None = None
    lam: float | None = None

    def __post_init__(self):
        if self.kind not in LOSS_KINDS:
            raise ValueError(f"unknown loss {self.kind!r}")
        if self.kind == "infonce":
            self.tau = 0.5 if self.tau is None else float(self.tau)
            if self.tau <= 0:
                raise ValueError("tau must be positive")
        if self.kind == "barlow_twins" and self.lam is not None and self.lam < 0:
            raise ValueError("lambda must be non-negative")

    def to_dict(self):
        return asdict(self)


def _check(z1, z2):
    z1 = np.asarray(z1, float)
    z2 = np.asarray(z2, float)
    if z1.shape != z2.shape or z1.ndim != 2:
        raise ValueError(f"view shapes differ: {z1.shape} vs {z2.shape}")
    return z1, z2


def _unit_rows(z):
    norms = np.linalg.norm(z, axis=1)
    zero = np.flatnonzero(norms == 0.0)
    if zero.size:
        raise DegenerateEmbeddingError(int(zero[0]))
    return z / norms[:, None], norms


def _unit_rows_backward(u, norms, grad_u):
    return (grad_u - u * np.sum(u * grad_u, axis=1, keepdims=True)) / norms[:, None]


def infonce(z1, z2, tau=0.5, grad=True):
    """Cross-view InfoNCE with cosine similarity and temperature ``tau``.

    With ``grad=False`` the gradients are skipped and returned as ``None``.
    """
    z1, z2 = _check(z1, z2)
    n = z1.shape[0]
    u1, n1 = _unit_rows(z1)
    u2, n2 = _unit_rows(z2)
    s = u1 @ u2.T / tau
    value = float(np.mean(logsumexp(s, axis=1) - np.diag(s)))
    if not grad:
        return value, None, None
    gs = (softmax(s, axis=1) - np.eye(n)) / n
    g1 = _unit_rows_backward(u1, n1, gs @ u2 / tau)
    g2 = _unit_rows_backward(u2, n2, gs.T @ u1 / tau)
    return value, g1, g2


def jse(z1, z2):
    """Jensen-Shannon contrastive loss with an inner-product discriminator.

    Positives are matching rows, negatives every cross-view pair ``u != v``
    (the exact expectation of uniform negative shuffling). The value is
    ``E_neg[softplus(s)] + E_pos[softplus(-s)] - 2 ln 2``, which is zero for an
    uninformative discriminator.
    """
    z1, z2 = _check(z1, z2)
    n = z1.shape[0]
    if n < 2:
        raise ValueError("jse needs at least two nodes for negatives")
    s = z1 @ z2.T
    off = ~np.eye(n, dtype=bool)
    pos = np.diag(s)
    value = float(np.mean(-log_expit(-s[off])) + np.mean(-log_expit(pos)) - _LN4)
    gs = np.where(off, expit(s) / (n * (n - 1)), 0.0)
    gs[np.diag_indices(n)] = -expit(-pos) / n
    return value, gs @ z2, gs.T @ z1


def byol(z1, z2):
    """Negative-free alignment ``mean(2 - 2 cos(z1_v, z2_v))`` with identity predictor."""
    z1, z2 = _check(z1, z2)
    n = z1.shape[0]
    u1, n1 = _unit_rows(z1)
    u2, n2 = _unit_rows(z2)
    cos = np.sum(u1 * u2, axis=1)
    value = float(np.mean(2.0 - 2.0 * cos))
    g1 = _unit_rows_backward(u1, n1, -2.0 * u2 / n)
    g2 = _unit_rows_backward(u2, n2, -2.0 * u1 / n)
    return value, g1, g2


def _standardize(z):
    mu = z.mean(axis=0)
    c = z - mu
    sigma = np.sqrt(np.mean(c * c, axis=0))
    return c / (sigma + BT_EPS), c, sigma


def _standardize_backward(grad_a, c, sigma):
    n = c.shape[0]
    s = sigma + BT_EPS
    g_centered = (grad_a - grad_a.mean(axis=0)) / s
    coupling = np.sum(grad_a * c, axis=0) / (s * s)
    dsigma = np.divide(c, n * sigma, out=np.zeros_like(c), where=sigma > 0)
    return g_centered - coupling * dsigma


def cross_correlation(z1, z2):
    a, _, _ = _standardize(np.asarray(z1, float))
    b, _, _ = _standardize(np.asarray(z2, float))
    return a.T @ b / a.shape[0]


def barlow_twins(z1, z2, lam=None):
    """Redundancy-reduction loss on the cross-view column correlation matrix.

    ``lam`` weights the off-diagonal terms and defaults to ``1 / d``.
    """
    z1, z2 = _check(z1, z2)
    n, d = z1.shape
    if n < 2:
        raise ValueError("barlow_twins needs n >= 2 for column statistics")
    lam = 1.0 / d if lam is None else lam
    a, c1, s1 = _standardize(z1)
    b, c2, s2 = _standardize(z2)
    corr = a.T @ b / n
    diag = np.diag(corr)
    off = corr - np.diag(diag)
    value = float(np.sum((1.0 - diag) ** 2) + lam * np.sum(off**2))
    gc = 2.0 * lam * off
    gc[np.diag_indices(d)] = -2.0 * (1.0 - diag)
    ga = b @ gc.T / n
    gb = a @ gc / n
    return value, _standardize_backward(ga, c1, s1), _standardize_backward(gb, c2, s2)


def loss_value_and_grad(config: LossConfig, z1, z2):
    if hasattr(z1, "Z"):
        z1 = z1.Z
    if hasattr(z2, "Z"):
        z2 = z2.Z
    if config.kind == "infonce":
        return infonce(z1, z2, config.tau)
    if config.kind == "jse":
        return jse(z1, z2)
    if config.kind == "byol":
        return byol(z1, z2)
    return barlow_twins(z1, z2, config.lam)
