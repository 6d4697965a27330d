"""Topological augmentations: edge dropping/adding, PPR diffusion, SPAN-style and SPA views.

Every operator leaves the feature matrix untouched (the returned graph
shares the source's feature array) and is deterministic for a seeded
``numpy.random.Generator``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from .graph import Graph, normalized_adjacency_dense
from .spectrum import MAX_SPECTRAL_NODES, graph_spectrum, spectral_distance

KINDS = ("identity", "drop_edge", "add_edge", "ppr", "span", "spa")

# enumerate all node pairs for add_edge below this many pairs, else sample
_DENSE_PAIR_LIMIT = 5_000_000


@dataclass
class AugmentationSpec:
    kind: str = "identity"
    p: float = 0.0
    q: float = 0.0
    alpha: float = 0.2
    budget: int = 0
    candidates: int | str = 8
    r_spa: float = 0.02
    d_spa: float = 0.0
    max_attempts: int = 50
    pool: int = 10
    seed: int | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown augmentation kind {self.kind!r}")
        if self.kind == "drop_edge" and not 0.0 <= self.p <= 1.0:
            raise ValueError("drop rate p must lie in [0, 1]")
        if self.kind == "add_edge" and not 0.0 <= self.q <= 1.0:
            raise ValueError("add rate q must lie in [0, 1]")
        if self.kind == "ppr" and not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        if self.kind == "span" and (self.budget < 0 or (self.candidates != "all" and self.candidates < 1)):
            raise ValueError("span needs budget >= 0 and candidates >= 1")
        if self.kind == "spa" and not (0.0 < self.r_spa <= 1.0 and self.d_spa >= 0):
            raise ValueError("spa needs r_spa in (0, 1] and d_spa >= 0")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d) -> "AugmentationSpec":
        return cls(**d)


@dataclass
class AugmentedView:
    graph: Graph
    report: dict = field(default_factory=dict)


def _rng(rng):
    return rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)


def _diff_report(g: Graph, edges) -> dict:
    before, after = g.edge_set(), {(int(u), int(v)) for u, v in edges}
    return {"edges_removed": len(before - after), "edges_added": len(after - before)}


def identity(g: Graph) -> AugmentedView:
    return AugmentedView(g.with_edges(g.edges), {"edges_removed": 0, "edges_added": 0})


def drop_edge(g: Graph, p, rng=None) -> AugmentedView:
    """Keep each undirected edge independently with probability ``1 - p``."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    rng = _rng(rng)
    keep = rng.random(g.m) >= p
    return AugmentedView(
        g.with_edges(g.edges[keep]),
        {"edges_removed": int(g.m - keep.sum()), "edges_added": 0},
    )


def _pair_index(u, v, n):
    return u * n + v


def add_edge(g: Graph, q, rng=None) -> AugmentedView:
    """Add each absent pair ``u < v`` independently with probability ``q``."""
    if not 0.0 <= q <= 1.0:
        raise ValueError("q must lie in [0, 1]")
    rng = _rng(rng)
    n = g.n
    n_pairs = n * (n - 1) // 2
    existing = _pair_index(g.edges[:, 0], g.edges[:, 1], n)
    if n_pairs <= _DENSE_PAIR_LIMIT:
        iu, ju = np.triu_indices(n, k=1)
        absent = ~np.isin(_pair_index(iu, ju, n), existing)
        iu, ju = iu[absent], ju[absent]
        pick = rng.random(iu.size) < q
        new = np.stack([iu[pick], ju[pick]], axis=1)
    else:
        # same distribution: binomial count, then uniform distinct absent pairs
        count = rng.binomial(n_pairs - g.m, q)
        taken = set(existing.tolist())
        chosen = []
        while len(chosen) < count:
            u, v = rng.integers(0, n, size=2)
            if u == v:
                continue
            u, v = (u, v) if u < v else (v, u)
            key = int(u) * n + int(v)
            if key not in taken:
                taken.add(key)
                chosen.append((u, v))
        new = np.array(chosen, dtype=np.int64).reshape(-1, 2)
    edges = np.vstack([g.edges, new]) if new.size else g.edges
    return AugmentedView(g.with_edges(edges), {"edges_removed": 0, "edges_added": int(len(new))})


def ppr_diffusion(g, alpha=0.2, variant="symmetric") -> np.ndarray:
    """Personalized-PageRank diffusion ``alpha (I - (1 - alpha) T)^-1``.

    ``T`` is the self-looped symmetric normalized adjacency, or the
    row-stochastic ``D^-1 (A + I)`` when ``variant="row"``. ``g`` may also be
    a dense adjacency matrix.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    adj = g.adjacency() if isinstance(g, Graph) else np.asarray(g, float)
    n = adj.shape[0]
    if variant == "symmetric":
        t = normalized_adjacency_dense(adj, self_loops=True)
    elif variant == "row":
        a = adj + np.eye(n)
        t = a / a.sum(axis=1, keepdims=True)
    else:
        raise ValueError(f"unknown variant {variant!r}")
    system = np.eye(n) - (1.0 - alpha) * t
    try:
        s = alpha * np.linalg.solve(system, np.eye(n))
    except np.linalg.LinAlgError as exc:
        raise FloatingPointError("PPR system is singular") from exc
    if variant == "symmetric":
        s = 0.5 * (s + s.T)
    return s


# ------------------------------------------------------------------ spectral


def _flip(edge_set: set, u, v) -> None:
    key = (u, v) if u < v else (v, u)
    if key in edge_set:
        edge_set.remove(key)
    else:
        edge_set.add(key)


def _spec_of(g: Graph, edge_set) -> np.ndarray:
    return graph_spectrum(g.with_edges(sorted(edge_set))).values


def span_pair(g: Graph, budget, candidates=8, rng=None):
    """Two views whose normalized-Laplacian spectra are pushed apart greedily.

    The views take turns: at each of ``budget`` steps the active view tries
    ``candidates`` random single-pair flips (``"all"`` tries every pair) and
    keeps the one maximising the squared spectral distance to the other view,
    provided it does not decrease it. Returns ``(view1, view2)``; both reports
    carry the final divergence and the per-step ``history``.
    """
    if budget < 0:
        raise ValueError("budget must be >= 0")
    if g.n > MAX_SPECTRAL_NODES:
        raise ValueError(f"span_pair is limited to n <= {MAX_SPECTRAL_NODES}")
    rng = _rng(rng)
    sets = [g.edge_set(), g.edge_set()]
    specs = [_spec_of(g, sets[0]), _spec_of(g, sets[1])]
    objective = float(np.sum((specs[0] - specs[1]) ** 2))
    history = [objective]
    all_pairs = list(zip(*np.triu_indices(g.n, k=1)))
    changed_any = False
    for step in range(budget):
        side = step % 2
        other = specs[1 - side]
        if candidates == "all":
            pool = all_pairs
        else:
            idx = rng.choice(len(all_pairs), size=min(int(candidates), len(all_pairs)), replace=False)
            pool = [all_pairs[i] for i in idx]
        best = None
        for u, v in pool:
            trial = set(sets[side])
            _flip(trial, int(u), int(v))
            spec = _spec_of(g, trial)
            val = float(np.sum((spec - other) ** 2))
            if best is None or val > best[0]:
                best = (val, int(u), int(v), spec)
        if best is not None and best[0] > objective:
            objective = best[0]
            _flip(sets[side], best[1], best[2])
            specs[side] = best[3]
            changed_any = True
        history.append(objective)
    if budget > 0 and not changed_any:
        warnings.warn("span_pair: no sampled flip increased the spectral distance", RuntimeWarning)
    views = []
    for s in sets:
        report = _diff_report(g, s)
        report.update(achieved_spectral_divergence=math.sqrt(objective), history=history)
        views.append(AugmentedView(g.with_edges(sorted(s)), report))
    return views[0], views[1]


def spa_flip_count(m, r_spa) -> int:
    # round before ceil so 0.02 * 100 stays 2 rather than 3
    return int(math.ceil(round(r_spa * m, 9)))


def _random_flips(g: Graph, count, rng) -> set:
    """Toggle ``count`` distinct pair slots, each a drop or an add with equal odds."""
    edges = g.edge_set()
    edge_list = sorted(edges)
    n = g.n
    n_pairs = n * (n - 1) // 2
    touched = set()
    out = set(edges)
    while len(touched) < count:
        can_drop = len(edge_list) > 0
        can_add = g.m < n_pairs
        if not (can_drop or can_add):
            break
        if can_drop and (not can_add or rng.random() < 0.5):
            key = edge_list[int(rng.integers(len(edge_list)))]
        else:
            u, v = (int(x) for x in rng.integers(0, n, size=2))
            if u == v:
                continue
            key = (u, v) if u < v else (v, u)
            if key in edges:
                continue
        if key in touched:
            continue
        touched.add(key)
        _flip(out, *key)
    return out


def spa_perturb(g: Graph, r_spa=0.02, d_spa=0.0, max_attempts=50, rng=None) -> AugmentedView:
    """Small random edge perturbation rejection-sampled for spectral divergence.

    Flips ``ceil(r_spa * |E|)`` pair slots per attempt and accepts the first
    attempt whose spectral distance to ``g`` reaches ``d_spa``. When all
    attempts fail, the most divergent candidate is returned with
    ``report["target_met"] = False``.
    """
    if not 0.0 < r_spa <= 1.0:
        raise ValueError("r_spa must lie in (0, 1]")
    if max_attempts < 1:
        raise ValueError("max_attempts must be >= 1")
    rng = _rng(rng)
    count = spa_flip_count(g.m, r_spa)
    base = graph_spectrum(g).values
    best = None
    for attempt in range(1, max_attempts + 1):
        edges = _random_flips(g, count, rng)
        dist = float(np.linalg.norm(_spec_of(g, edges) - base))
        if best is None or dist > best[0]:
            best = (dist, edges)
        if dist >= d_spa:
            best = (dist, edges)  # the accepted sample, even if an earlier one was farther
            met = True
            break
    else:
        met = False
        warnings.warn(
            f"spa_perturb: target divergence {d_spa} not met after {max_attempts} attempts",
            RuntimeWarning,
        )
    report = _diff_report(g, best[1])
    report.update(
        flips=count,
        attempts=attempt,
        achieved_spectral_divergence=best[0],
        target_met=met,
    )
    return AugmentedView(g.with_edges(sorted(best[1])), report)


def augment(g: Graph, spec: AugmentationSpec, rng=None) -> AugmentedView:
    """Apply a single-view augmentation described by ``spec``."""
    rng = _rng(rng if rng is not None else spec.seed)
    if spec.kind == "identity":
        return identity(g)
    if spec.kind == "drop_edge":
        return drop_edge(g, spec.p, rng)
    if spec.kind == "add_edge":
        return add_edge(g, spec.q, rng)
    if spec.kind == "spa":
        return spa_perturb(g, spec.r_spa, spec.d_spa, spec.max_attempts, rng)
    if spec.kind == "span":
        return span_pair(g, spec.budget, spec.candidates, rng)[0]
    raise ValueError(f"{spec.kind} does not produce a graph view; call ppr_diffusion")


def spectral_divergence(g: Graph, view: AugmentedView) -> float:
    return spectral_distance(graph_spectrum(g), graph_spectrum(view.graph))
