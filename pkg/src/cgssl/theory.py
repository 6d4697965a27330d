"""InfoNCE bound constants and empirical checks of the supporting lemmas.

All bounds are evaluated in log space; ``log`` is the natural logarithm.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .encoder import EncoderConfig, encode, init_encoder, spectral_norm
from .graph import Graph, generate_er, k_hop_nodes, perturbation_strength
from .objectives import infonce


class BoundDomainError(ValueError):
    pass


class SamplingError(RuntimeError):
    def __init__(self, msg, achieved):
        super().__init__(f"{msg} (achieved delta {achieved:.4g})")
        self.achieved = achieved


class ConstructionError(ValueError):
    pass


@dataclass
class BoundInputs:
    n: int
    d: int
    n_v: float
    d_min: float
    d_max: float
    k: int
    L_W: float
    x_norm: float
    p_norm: float
    tau: float
    delta: float
    c_z: float = 1.0

    def validate(self):
        if not 0.0 <= self.delta < 1.0:
            raise BoundDomainError(f"delta must lie in [0, 1), got {self.delta}")
        if self.d_min < 1:
            raise BoundDomainError("d_min must be >= 1")
        for name in ("n", "d", "n_v", "d_max", "k", "L_W", "x_norm", "p_norm", "tau", "c_z"):
            if getattr(self, name) <= 0:
                raise BoundDomainError(f"{name} must be positive")


APPENDIX_D = BoundInputs(
    n=1000, d=4096, n_v=30, d_min=10, d_max=30, k=1, L_W=0.5,
    x_norm=1.0, p_norm=1.0, tau=0.5, delta=0.1,
)


@dataclass
class BoundResult:
    A: float
    B: float
    epsilon: float
    epsilon_prime: float
    lower: float | None = None
    upper: float | None = None

    @property
    def gap(self):
        return None if self.lower is None else self.upper - self.lower

    def to_dict(self):
        d = asdict(self)
        d["gap"] = self.gap
        return d


def degree_constant(n_v, d_min, d_max) -> float:
    return math.sqrt(n_v * d_max) / d_min


def perturbation_constant(delta) -> float:
    if not 0.0 <= delta < 1.0:
        raise BoundDomainError(f"delta must lie in [0, 1), got {delta}")
    return math.sqrt(delta) + delta / (1.0 - delta) ** 1.5


def epsilon_prime(n, d) -> float:
    return math.sqrt(2.0 * math.log(n) / d)


def bound_params(inputs: BoundInputs) -> BoundResult:
    inputs.validate()
    a = degree_constant(inputs.n_v, inputs.d_min, inputs.d_max)
    b = perturbation_constant(inputs.delta)
    k = inputs.k
    eps = k * a**k * b * inputs.L_W**k * inputs.x_norm * inputs.p_norm / inputs.c_z
    return BoundResult(a, b, eps, epsilon_prime(inputs.n, inputs.d))


def _neg_log_ratio(pos, n, neg):
    """``-log(e^pos / (e^pos + (n - 1) e^neg))`` without overflow."""
    if n == 1:
        return 0.0
    return float(np.logaddexp(pos, math.log(n - 1) + neg) - pos)


def bounds_from_eps(n, tau, eps, eps_prime):
    lower = _neg_log_ratio(1.0 / tau, n, -eps_prime / tau)
    upper = _neg_log_ratio((1.0 - eps**2 / 2.0) / tau, n, eps_prime / tau)
    return lower, upper


def infonce_bounds(inputs: BoundInputs) -> BoundResult:
    """Lower/upper InfoNCE bounds for the given graph, encoder and perturbation constants."""
    res = bound_params(inputs)
    res.lower, res.upper = bounds_from_eps(inputs.n, inputs.tau, res.epsilon, res.epsilon_prime)
    return res


# --------------------------------------------------------- perturbation sampler


def sample_er_graph(n, mean_degree, rng, max_tries=200) -> Graph:
    """ER graph without isolated nodes (normalization needs positive degrees)."""
    p = min(1.0, mean_degree / max(n - 1, 1))
    for _ in range(max_tries):
        g = generate_er(n, p, seed=int(rng.integers(2**32)))
        if g.n == 1 or (g.degrees() > 0).all():
            return g
    raise SamplingError("could not draw an ER graph without isolated nodes", 0.0)


def sample_perturbation(g: Graph, k, target, rng, tol=0.1, max_candidates=400):
    """Random edge flips kept only while the perturbation strength stays <= ``target``.

    Flips are drops or additions with equal odds and never isolate a node.
    Stops once the strength reaches ``(1 - tol) * target``; raises
    :class:`SamplingError` if that cannot be reached.
    """
    edges = g.edge_set()
    deg = g.degrees().copy()
    current = g
    delta = 0.0
    if target <= 0:
        return g.with_edges(g.edges), 0.0
    for _ in range(max_candidates):
        if rng.random() < 0.5 and edges:
            pool = sorted(edges)
            u, v = pool[int(rng.integers(len(pool)))]
            if deg[u] <= 1 or deg[v] <= 1:
                continue
            trial = set(edges)
            trial.remove((u, v))
            dd = -1
        else:
            u, v = sorted(int(x) for x in rng.choice(g.n, size=2, replace=False))
            if (u, v) in edges:
                continue
            trial = set(edges)
            trial.add((u, v))
            dd = 1
        cand = g.with_edges(sorted(trial))
        strength = perturbation_strength(g, cand, k).delta
        if strength <= target:
            edges, current, delta = trial, cand, strength
            deg[u] += dd
            deg[v] += dd
            if delta >= (1.0 - tol) * target:
                return current, delta
    raise SamplingError(f"could not reach delta target {target}", delta)


# ----------------------------------------------------------- lemma checks


def _local_matrices(g: Graph, h: Graph, v, k):
    """Adjacency of the k-hop subgraph of ``v`` in ``g`` and of the same node set in ``h``."""
    nodes = k_hop_nodes(g, v, k)
    a = g.adjacency()[np.ix_(nodes, nodes)]
    b = h.adjacency()[np.ix_(nodes, nodes)]
    return nodes, a, b


def _inv_sqrt(deg):
    out = np.zeros_like(deg, dtype=float)
    pos = deg > 0
    out[pos] = 1.0 / np.sqrt(deg[pos])
    return out


def lemma1_margins(g, h, k, delta=None):
    """``sqrt(2 delta |E_v|) - ||A_v - A'_v||_F`` per node.

    Each side's subgraph is the k-hop neighbourhood in its own graph, placed
    on the union of both node sets. ``delta=None`` uses the node's own
    change fraction (the equality case).
    """
    margins = []
    adj_g, adj_h = g.adjacency(), h.adjacency()
    for v in range(g.n):
        ng, nh = k_hop_nodes(g, v, k), k_hop_nodes(h, v, k)
        nodes = np.union1d(ng, nh)
        a = np.zeros((nodes.size, nodes.size))
        b = np.zeros_like(a)
        ig = np.isin(nodes, ng)
        ih = np.isin(nodes, nh)
        a[np.ix_(ig, ig)] = adj_g[np.ix_(ng, ng)]
        b[np.ix_(ih, ih)] = adj_h[np.ix_(nh, nh)]
        n_edges = a.sum() / 2.0
        if n_edges == 0:
            continue
        lhs = float(np.linalg.norm(a - b))
        dv = np.sum(np.abs(a - b)) / 2.0 / n_edges if delta is None else delta
        margins.append(math.sqrt(2.0 * dv * n_edges) - lhs)
    return np.array(margins)


def lemma2_margins(g, h, k, delta):
    """Margins of the degree-change and inverse-sqrt-degree inequalities per node.

    Three margins per node: full-graph degree change against ``delta * d_v``,
    then the Frobenius and max-entry bounds on ``D_v^{-1/2} - D'_v^{-1/2}``
    with subgraph degrees (a degree that drops to zero contributes ``0``).
    """
    margins = []
    full_g, full_h = g.degrees(), h.degrees()
    for v in range(g.n):
        nodes, a, b = _local_matrices(g, h, v, k)
        deg_a, deg_b = a.sum(axis=1), b.sum(axis=1)
        if deg_a.min() <= 0:
            continue
        d_min = deg_a.min()
        margins.append(delta * full_g[v] - abs(full_g[v] - full_h[v]))
        diff = np.abs(_inv_sqrt(deg_a) - _inv_sqrt(deg_b))
        denom = 2.0 * math.sqrt(d_min) * (1.0 - delta) ** 1.5
        margins.append(delta * math.sqrt(nodes.size) / denom - float(np.linalg.norm(diff)))
        margins.append(delta / denom - float(diff.max()))
    return np.array(margins)


def lemma3_margins(g, h, k, delta):
    """``A B - ||A~_v - A~'_v||_F`` per node (degrees taken inside the subgraph)."""
    b_const = perturbation_constant(delta)
    margins = []
    for v in range(g.n):
        nodes, a, b = _local_matrices(g, h, v, k)
        deg_a, deg_b = a.sum(axis=1), b.sum(axis=1)
        if deg_a.min() <= 0:
            continue
        na = _inv_sqrt(deg_a)[:, None] * a * _inv_sqrt(deg_a)[None, :]
        nb = _inv_sqrt(deg_b)[:, None] * b * _inv_sqrt(deg_b)[None, :]
        a_const = degree_constant(nodes.size, deg_a.min(), deg_a.max())
        margins.append(a_const * b_const - float(np.linalg.norm(na - nb)))
    return np.array(margins)


def node_degree_constants(g: Graph, k) -> np.ndarray:
    """``sqrt(n_v d_max) / d_min`` of every node's k-hop subgraph."""
    adj = g.adjacency()
    out = np.full(g.n, np.nan)
    for v in range(g.n):
        nodes = k_hop_nodes(g, v, k)
        deg = adj[np.ix_(nodes, nodes)].sum(axis=1)
        if deg.min() > 0:
            out[v] = degree_constant(nodes.size, deg.min(), deg.max())
    return out


def lemma4_margins(g, h, k, delta, state, config):
    """``k (A_v L_W)^k B ||X||_2 - ||h_v - h'_v||`` per node, whole-graph forward pass."""
    e_g = encode(state, config, g)
    e_h = encode(state, config, h)
    a_v = node_degree_constants(g, k)
    bound = k * (a_v * config.L_W) ** k * perturbation_constant(delta) * spectral_norm(g.features)
    lhs = np.linalg.norm(e_g.hidden - e_h.hidden, axis=1)
    keep = ~np.isnan(a_v)
    return bound[keep] - lhs[keep]


def lemma5_margins(g, h, k, delta, state, config):
    """``sim(z_v, z'_v) - (1 - eps_v^2 / 2)`` per node with ``c_z`` from the raw projections."""
    e_g = encode(state, config, g)
    e_h = encode(state, config, h)
    raw = np.vstack([e_g.hidden @ state.projection, e_h.hidden @ state.projection])
    c_z = float(np.linalg.norm(raw, axis=1).min())
    if c_z == 0:
        return np.array([-np.inf])
    a_v = node_degree_constants(g, k)
    eps = (
        k * a_v**k * perturbation_constant(delta) * config.L_W**k
        * spectral_norm(g.features) * spectral_norm(state.projection) / c_z
    )
    sim = np.sum(e_g.Z * e_h.Z, axis=1)
    keep = ~np.isnan(a_v)
    return sim[keep] - (1.0 - eps[keep] ** 2 / 2.0)


@dataclass
class LemmaReport:
    lemma: int
    trials: int
    pass_count: int
    worst_margin: float
    params: dict = field(default_factory=dict)
    deltas: list[float] = field(default_factory=list)
    predicted_pass_fraction: float | None = None

    @property
    def pass_fraction(self):
        return self.pass_count / self.trials if self.trials else 0.0

    def to_dict(self):
        d = asdict(self)
        d["pass_fraction"] = self.pass_fraction
        return d


def lemma6_fraction(n, d, pairs, rng):
    """Fraction of random unit-vector pairs with ``|<z, z'>| <= sqrt(2 ln n / d)``."""
    eps_p = epsilon_prime(n, d)
    hits = 0
    done = 0
    batch = 2000
    while done < pairs:
        m = min(batch, pairs - done)
        # single precision halves the cost; cosine error is ~1e-7
        z = rng.standard_normal((m, d), dtype=np.float32)
        w = rng.standard_normal((m, d), dtype=np.float32)
        cos = np.sum(z * w, axis=1) / (np.linalg.norm(z, axis=1) * np.linalg.norm(w, axis=1))
        hits += int(np.sum(np.abs(cos) <= eps_p))
        done += m
    return hits, eps_p


def verify_lemma(
    lemma, trials=100, n=40, delta=0.2, k=1, seed=0, mean_degree=6.0,
    feature_dim=8, hidden=16, proj_dim=8, L_W=0.5, pairs=100_000, d=4096,
    equality_case=False, tol=1e-9,
) -> LemmaReport:
    """Randomised check of one lemma; margin = RHS - LHS, pass iff margin >= -tol.

    Lemma 6 is a Monte Carlo over ``pairs`` random unit vectors in ``R^d``;
    its report compares the observed fraction with ``1 - 2/n``.
    """
    rng = np.random.default_rng(seed)
    params = dict(lemma=lemma, trials=trials, n=n, delta=delta, k=k, seed=seed,
                  mean_degree=mean_degree, L_W=L_W)
    if lemma == 6:
        hits, eps_p = lemma6_fraction(n, d, pairs, rng)
        params.update(d=d, pairs=pairs, epsilon_prime=eps_p)
        return LemmaReport(6, pairs, hits, float("nan"), params,
                           predicted_pass_fraction=1.0 - 2.0 / n)
    if lemma not in (1, 2, 3, 4, 5):
        raise ValueError(f"unknown lemma {lemma}")
    config = EncoderConfig(
        dims=[feature_dim] + [hidden] * k, proj_dim=proj_dim, L_W=L_W,
        self_loops=False, normalize_output=True,
    )
    passes, worst, deltas = 0, math.inf, []
    for _ in range(trials):
        g = sample_er_graph(n, mean_degree, rng)
        h, achieved = sample_perturbation(g, k, delta, rng)
        deltas.append(achieved)
        if lemma == 1:
            m = lemma1_margins(g, h, k, None if equality_case else achieved)
        elif lemma == 2:
            m = lemma2_margins(g, h, k, achieved)
        elif lemma == 3:
            m = lemma3_margins(g, h, k, achieved)
        else:
            state = init_encoder(config, rng)
            fn = lemma4_margins if lemma == 4 else lemma5_margins
            m = fn(g, h, k, achieved, state, config)
        low = float(m.min()) if m.size else math.inf
        if equality_case:
            low = -float(np.abs(m).max())
        worst = min(worst, low)
        passes += int(low >= -tol)
    return LemmaReport(lemma, trials, passes, worst, params, deltas)


# ----------------------------------------------------------- theorem check


@dataclass
class TheoremCheck:
    loss: float
    lower: float
    upper: float
    within: bool
    min_positive_sim: float
    max_negative_sim: float


def construct_embeddings(n, d, epsilon, epsilon_prime_, rng, positive_floor=None, max_tries=20,
                         complement=False):
    """Unit embedding pairs with positive cosine >= ``positive_floor`` and |cross cosine| <= eps'.

    ``Z`` holds the first ``n`` standard basis vectors (cosines are invariant
    under a global rotation, so any orthonormal frame is equivalent);
    ``Z'_v = c_v z_v + s_v u_v`` with ``u_v`` a random unit vector orthogonal
    to ``z_v``. ``positive_floor`` defaults to
    ``1 - epsilon^2 / 2`` and each ``c_v`` is drawn uniformly from
    ``[positive_floor, 1]``. With ``complement=True`` each ``u_v`` lies in the
    orthogonal complement of the row space of ``Z``, so every cross-pair
    cosine is exactly zero (needs ``d > n``).
    """
    if d < 2.0 * math.log(n) / epsilon_prime_**2 or d < n:
        raise ConstructionError(
            f"need d >= 2 ln n / eps'^2 = {2.0 * math.log(n) / epsilon_prime_**2:.1f} and d >= n"
        )
    floor = 1.0 - epsilon**2 / 2.0 if positive_floor is None else positive_floor
    floor = max(floor, -1.0)
    z = np.eye(n, d)
    c = floor + (1.0 - floor) * rng.random(n)
    for _ in range(max_tries):
        u = rng.standard_normal((n, d))
        if complement:
            if d <= n:
                raise ConstructionError("complement construction needs d > n")
            u[:, :n] = 0.0
        else:
            u[np.arange(n), np.arange(n)] = 0.0
        u /= np.linalg.norm(u, axis=1, keepdims=True)
        zp = c[:, None] * z + np.sqrt(np.clip(1.0 - c**2, 0.0, None))[:, None] * u
        cross = z @ zp.T
        np.fill_diagonal(cross, 0.0)
        if np.abs(cross).max() <= epsilon_prime_:
            return z, zp
    raise ConstructionError("could not keep all cross-pair similarities within eps'")


def verify_theorem(n, d, tau, epsilon, epsilon_prime_, seed=0, violate=False) -> TheoremCheck:
    """InfoNCE of a constructed embedding pair against the theorem's bounds.

    With ``violate=True`` the positive cosines are set to ``1 - epsilon^2``,
    breaking the positive-pair hypothesis (negative control).
    """
    rng = np.random.default_rng(seed)
    floor = 1.0 - epsilon**2 if violate else None
    # the violating pair keeps every cross cosine at zero so only the
    # positive-pair hypothesis is broken
    z, zp = construct_embeddings(n, d, epsilon, epsilon_prime_, rng, positive_floor=floor, complement=violate)
    if violate:
        c = 1.0 - epsilon**2
        u = zp - np.sum(zp * z, axis=1, keepdims=True) * z
        u /= np.linalg.norm(u, axis=1, keepdims=True)
        zp = c * z + math.sqrt(max(0.0, 1.0 - c * c)) * u
    loss, _, _ = infonce(z, zp, tau, grad=False)
    lower, upper = bounds_from_eps(n, tau, epsilon, epsilon_prime_)
    sims = z @ zp.T
    pos = np.diag(sims).copy()
    np.fill_diagonal(sims, 0.0)
    within = lower - 1e-9 <= loss <= upper + 1e-9
    return TheoremCheck(loss, lower, upper, within, float(pos.min()), float(np.abs(sims).max()))
