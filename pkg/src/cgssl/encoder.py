"""Shallow bias-free GCN encoder with a linear projection head and exact gradients."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .graph import Graph, normalized_adjacency_dense


class DegenerateEmbeddingError(ValueError):
    def __init__(self, node):
        super().__init__(f"embedding of node {node} has zero norm and cannot be normalized")
        self.node = node


@dataclass
class EncoderConfig:
    dims: list[int]
    proj_dim: int
    L_W: float | None = None
    self_loops: bool = True
    normalize_output: bool = True

    def __post_init__(self):
        self.dims = [int(d) for d in self.dims]
        if len(self.dims) < 2:
            raise ValueError("dims needs at least [d0, d1]")
        if self.proj_dim < 1:
            raise ValueError("proj_dim must be >= 1")
        if self.L_W is not None and self.L_W <= 0:
            raise ValueError("L_W must be positive")

    @property
    def k(self) -> int:
        return len(self.dims) - 1


@dataclass
class EncoderState:
    weights: list[np.ndarray]
    projection: np.ndarray

    def copy(self) -> "EncoderState":
        return EncoderState([w.copy() for w in self.weights], self.projection.copy())

    def params(self) -> list[np.ndarray]:
        return [*self.weights, self.projection]

    def to_json(self) -> str:
        return json.dumps(
            {
                "weights": [w.tolist() for w in self.weights],
                "projection": self.projection.tolist(),
            }
        )

    @classmethod
    def from_json(cls, text) -> "EncoderState":
        obj = json.loads(text)
        return cls([np.array(w, dtype=float) for w in obj["weights"]], np.array(obj["projection"], dtype=float))

    def save(self, path) -> None:
        Path(path).write_text(self.to_json())

    @classmethod
    def load(cls, path) -> "EncoderState":
        return cls.from_json(Path(path).read_text())


@dataclass
class Embeddings:
    Z: np.ndarray
    normalized: bool
    hidden: np.ndarray | None = field(default=None, repr=False)


def spectral_norm(w, tol=1e-10, max_iter=20000) -> float:
    """Largest singular value by power iteration on ``W^T W``."""
    w = np.asarray(w, float)
    if not w.any():
        return 0.0
    gram = w.T @ w if w.shape[0] >= w.shape[1] else w @ w.T
    x = np.random.default_rng(0).standard_normal(gram.shape[0])
    x /= np.linalg.norm(x)
    lam = 0.0
    for _ in range(max_iter):
        y = gram @ x
        lam_new = float(x @ y)
        norm = np.linalg.norm(y)
        if norm == 0.0:
            return 0.0
        x = y / norm
        if abs(lam_new - lam) <= tol * lam_new:
            lam = lam_new
            break
        lam = lam_new
    return float(np.sqrt(max(lam, 0.0)))


def spectral_norm_cap(state: EncoderState, L_W) -> EncoderState:
    """Rescale every weight matrix whose spectral norm exceeds ``L_W``."""
    if L_W <= 0:
        raise ValueError("L_W must be positive")
    weights = []
    for w in state.weights:
        s = spectral_norm(w)
        weights.append(w * (L_W / s) if s > L_W else w.copy())
    return EncoderState(weights, state.projection.copy())


def glorot_uniform(fan_in, fan_out, rng) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


def init_encoder(config: EncoderConfig, rng=None) -> EncoderState:
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    weights = [glorot_uniform(a, b, rng) for a, b in zip(config.dims[:-1], config.dims[1:])]
    proj = glorot_uniform(config.dims[-1], config.proj_dim, rng)
    state = EncoderState(weights, proj)
    if config.L_W is not None:
        state = spectral_norm_cap(state, config.L_W)
    return state


def propagation_matrix(g, self_loops=True) -> np.ndarray:
    """Dense operator used for message passing.

    A :class:`Graph` is normalized symmetrically; a square array (for
    example a PPR diffusion matrix) is used as given.
    """
    if isinstance(g, Graph):
        return normalized_adjacency_dense(g.adjacency(), self_loops=self_loops)
    return np.asarray(g, float)


def _forward(state, config, prop, x):
    if x.shape[1] != config.dims[0]:
        raise ValueError(f"feature dim {x.shape[1]} does not match dims[0]={config.dims[0]}")
    if len(state.weights) != config.k:
        raise ValueError("state has the wrong number of layers")
    hs, pres = [x], []
    h = x
    for w in state.weights:
        pre = prop @ h @ w
        pres.append(pre)
        h = np.maximum(pre, 0.0)
        hs.append(h)
    z_raw = h @ state.projection
    norms = np.linalg.norm(z_raw, axis=1)
    return hs, pres, z_raw, norms


def encode(state: EncoderState, config: EncoderConfig, g, features=None) -> Embeddings:
    """Forward pass ``H <- ReLU(A_hat H W)`` per layer, then ``Z = H P``.

    ``g`` is a :class:`Graph` or a dense propagation matrix, in which case
    ``features`` must be given. Rows of ``Z`` are unit-normalized when
    ``config.normalize_output`` is set.
    """
    x = g.features if features is None else np.asarray(features, float)
    prop = propagation_matrix(g, config.self_loops)
    hs, _, z_raw, norms = _forward(state, config, prop, x)
    if not config.normalize_output:
        return Embeddings(z_raw, False, hs[-1])
    zero = np.flatnonzero(norms == 0.0)
    if zero.size:
        raise DegenerateEmbeddingError(int(zero[0]))
    return Embeddings(z_raw / norms[:, None], True, hs[-1])


def encode_grad(state: EncoderState, config: EncoderConfig, g, upstream, features=None):
    """Gradients of a scalar loss w.r.t. every ``W`` and ``P`` given ``dL/dZ``.

    Returns ``(weight_grads, projection_grad)``.
    """
    x = g.features if features is None else np.asarray(features, float)
    prop = propagation_matrix(g, config.self_loops)
    hs, pres, z_raw, norms = _forward(state, config, prop, x)
    upstream = np.asarray(upstream, float)
    if upstream.shape != z_raw.shape:
        raise ValueError(f"upstream shape {upstream.shape} does not match Z {z_raw.shape}")
    if config.normalize_output:
        zero = np.flatnonzero(norms == 0.0)
        if zero.size:
            raise DegenerateEmbeddingError(int(zero[0]))
        z = z_raw / norms[:, None]
        g_raw = (upstream - z * np.sum(z * upstream, axis=1, keepdims=True)) / norms[:, None]
    else:
        g_raw = upstream
    grad_p = hs[-1].T @ g_raw
    g_h = g_raw @ state.projection.T
    grads = [None] * config.k
    for layer in range(config.k - 1, -1, -1):
        g_pre = g_h * (pres[layer] > 0)
        agg = prop @ hs[layer]
        grads[layer] = agg.T @ g_pre
        g_h = prop.T @ g_pre @ state.weights[layer].T
    return grads, grad_p


def feature_norm(x) -> float:
    """Spectral norm of a feature matrix, by power iteration."""
    return spectral_norm(x)


def config_to_dict(config: EncoderConfig) -> dict:
    return asdict(config)
