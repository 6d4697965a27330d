"""Undirected attributed graphs, synthetic generators and normalization operators."""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class GraphError(ValueError):
    """Raised when a graph violates its structural invariants."""


class DegreeZeroError(GraphError):
    def __init__(self, node):
        super().__init__(f"node {node} has degree zero; use self_loops=True")
        self.node = node


def _canonical_edges(edges, n):
    """Return a sorted (m, 2) int array of unique undirected pairs u < v."""
    arr = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    if arr.size == 0:
        return np.zeros((0, 2), dtype=np.int64)
    if (arr < 0).any() or (arr >= n).any():
        bad = arr[((arr < 0) | (arr >= n)).any(axis=1)][0]
        raise GraphError(f"edge {bad.tolist()} has an endpoint outside [0, {n})")
    if (arr[:, 0] == arr[:, 1]).any():
        bad = arr[arr[:, 0] == arr[:, 1]][0]
        raise GraphError(f"self-loop {bad.tolist()} is not allowed")
    arr = np.sort(arr, axis=1)
    return np.unique(arr, axis=0)


@dataclass(eq=False)
class Graph:
    """Undirected graph with node features.

    Edges are stored once as sorted pairs ``u < v``. ``labels`` is either a
    per-node vector, a single graph-level class id, or ``None``.
    """

    n: int
    edges: np.ndarray
    features: np.ndarray
    labels: np.ndarray | int | None = None
    node_map: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        self.n = int(self.n)
        if self.n < 0:
            raise GraphError("node count must be non-negative")
        self.edges = _canonical_edges(self.edges, self.n)
        feats = np.asarray(self.features, dtype=np.float64)
        if feats.ndim == 1:
            feats = feats.reshape(self.n, -1) if self.n else feats.reshape(0, 0)
        if feats.shape[0] != self.n:
            raise GraphError(f"features has {feats.shape[0]} rows, expected {self.n}")
        self.features = feats
        if self.labels is not None and not np.isscalar(self.labels):
            self.labels = np.asarray(self.labels, dtype=np.int64)
            if self.labels.shape != (self.n,):
                raise GraphError("node labels must have length n")
        elif self.labels is not None:
            self.labels = int(self.labels)

    @property
    def m(self) -> int:
        return len(self.edges)

    def edge_set(self) -> set[tuple[int, int]]:
        return {(int(u), int(v)) for u, v in self.edges}

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=np.int64)
        np.add.at(deg, self.edges[:, 0], 1)
        np.add.at(deg, self.edges[:, 1], 1)
        return deg

    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.n, self.n))
        if self.m:
            a[self.edges[:, 0], self.edges[:, 1]] = 1.0
            a[self.edges[:, 1], self.edges[:, 0]] = 1.0
        return a

    def neighbors(self) -> list[list[int]]:
        nbrs: list[list[int]] = [[] for _ in range(self.n)]
        for u, v in self.edges:
            nbrs[u].append(int(v))
            nbrs[v].append(int(u))
        return nbrs

    def with_edges(self, edges) -> "Graph":
        """Copy sharing the feature array, with a new edge set."""
        g = Graph.__new__(Graph)
        g.n = self.n
        g.edges = _canonical_edges(edges, self.n)
        g.features = self.features
        g.labels = self.labels
        g.node_map = self.node_map
        return g

    def relabel(self, perm) -> "Graph":
        """Return the graph with node ``i`` renamed to ``perm[i]``."""
        perm = np.asarray(perm)
        inv = np.argsort(perm)
        labels = self.labels
        if isinstance(labels, np.ndarray):
            labels = labels[inv]
        edges = perm[self.edges] if self.m else self.edges
        return Graph(self.n, edges, self.features[inv], labels)


@dataclass
class DegreeInfo:
    degrees: np.ndarray
    d_min: int
    d_max: int


def degree_info(graph: Graph, nodes=None) -> DegreeInfo:
    deg = graph.degrees()
    sel = deg if nodes is None else deg[np.asarray(nodes, dtype=np.int64)]
    if sel.size == 0:
        return DegreeInfo(deg, 0, 0)
    return DegreeInfo(deg, int(sel.min()), int(sel.max()))


# --------------------------------------------------------------------- I/O


def _graph_to_dict(g: Graph) -> dict:
    if isinstance(g.labels, np.ndarray):
        labels = g.labels.tolist()
    else:
        labels = g.labels
    return {
        "n": g.n,
        "edges": g.edges.tolist(),
        "features": [[float(x) for x in row] for row in g.features],
        "labels": labels,
    }


def _graph_from_dict(obj, where="graph") -> Graph:
    if not isinstance(obj, dict):
        raise GraphError(f"{where}: expected an object")
    for key in ("n", "edges", "features"):
        if key not in obj:
            raise GraphError(f"{where}: missing field '{key}'")
    n = obj["n"]
    if not isinstance(n, int) or isinstance(n, bool):
        raise GraphError(f"{where}: field 'n' must be an integer")
    edges = obj["edges"]
    if not isinstance(edges, list) or any(
        not isinstance(e, list) or len(e) != 2 or not all(isinstance(x, int) for x in e)
        for e in edges
    ):
        raise GraphError(f"{where}: field 'edges' must be a list of [u, v] integer pairs")
    feats = obj["features"]
    if not isinstance(feats, list) or len(feats) != n:
        raise GraphError(f"{where}: field 'features' must have n rows")
    try:
        farr = np.array(feats, dtype=np.float64).reshape(n, -1)
    except (TypeError, ValueError) as exc:
        raise GraphError(f"{where}: field 'features' is not a numeric matrix") from exc
    if not np.isfinite(farr).all():
        raise GraphError(f"{where}: field 'features' contains non-finite values")
    labels = obj.get("labels")
    if labels is not None and not isinstance(labels, (int, list)):
        raise GraphError(f"{where}: field 'labels' must be int, list or null")
    return Graph(n, edges, farr, labels)


def save_graph(path, graph) -> None:
    """Write a graph (or a list of graphs) as a JSON container."""
    if isinstance(graph, Graph):
        payload = _graph_to_dict(graph)
    else:
        payload = [_graph_to_dict(g) for g in graph]
    Path(path).write_text(json.dumps(payload, allow_nan=False))


def load_graph(path):
    """Read a JSON graph container; a JSON array yields a list of graphs."""
    try:
        obj = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise GraphError(f"{path}: not valid JSON ({exc.msg})") from exc
    if isinstance(obj, list):
        return [_graph_from_dict(o, where=f"graph[{i}]") for i, o in enumerate(obj)]
    return _graph_from_dict(obj)


def graph_io(path, direction, graph=None):
    if direction == "load":
        return load_graph(path)
    if direction == "save":
        if graph is None:
            raise GraphError("save requires a graph")
        save_graph(path, graph)
        return None
    raise ValueError(f"unknown direction {direction!r}")


# -------------------------------------------------------------- generators


def _check_prob(name, p):
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {p}")


def _bernoulli_pairs(n, prob_fn, rng):
    iu, ju = np.triu_indices(n, k=1)
    probs = prob_fn(iu, ju)
    keep = rng.random(iu.size) < probs
    return np.stack([iu[keep], ju[keep]], axis=1)


def generate_er(n, p, seed=0, feature_dim=8) -> Graph:
    """Erdos-Renyi G(n, p) with standard-normal features."""
    if n < 1:
        raise ValueError("n must be >= 1")
    _check_prob("p", p)
    rng = np.random.default_rng(seed)
    edges = _bernoulli_pairs(n, lambda i, j: np.full(i.shape, p), rng)
    feats = rng.standard_normal((n, feature_dim))
    return Graph(n, edges, feats)


def generate_sbm(sizes, p_in, p_out, seed=0, feature_dim=8, feature_signal=0.0) -> Graph:
    """Stochastic block model with block ids as node labels.

    Features are standard normal noise plus ``feature_signal`` times a
    per-block unit mean vector; ``feature_signal=0`` makes them label-free.
    """
    sizes = [int(s) for s in sizes]
    if not sizes or min(sizes) < 1:
        raise ValueError("block sizes must be >= 1")
    _check_prob("p_in", p_in)
    _check_prob("p_out", p_out)
    rng = np.random.default_rng(seed)
    labels = np.repeat(np.arange(len(sizes)), sizes)
    n = labels.size
    edges = _bernoulli_pairs(
        n, lambda i, j: np.where(labels[i] == labels[j], p_in, p_out), rng
    )
    feats = rng.standard_normal((n, feature_dim))
    if feature_signal:
        means = rng.standard_normal((len(sizes), feature_dim))
        means /= np.linalg.norm(means, axis=1, keepdims=True)
        feats += feature_signal * means[labels]
    return Graph(n, edges, feats, labels)


def generate_synthetic(kind, params, seed=0) -> Graph:
    params = dict(params)
    if kind == "er":
        return generate_er(params.pop("n"), params.pop("p"), seed=seed, **params)
    if kind == "sbm":
        return generate_sbm(
            params.pop("sizes"), params.pop("p_in"), params.pop("p_out"), seed=seed, **params
        )
    raise ValueError(f"unknown generator {kind!r}")


# ------------------------------------------------------------ normalization


@dataclass
class NormalizedMatrix:
    kind: str
    values: np.ndarray
    self_loops: bool


def normalized_adjacency_dense(adj, self_loops=True) -> np.ndarray:
    """D^{-1/2} A D^{-1/2} for a dense symmetric (possibly weighted) matrix."""
    a = np.array(adj, dtype=np.float64)
    if self_loops:
        a = a + np.eye(a.shape[0])
    deg = a.sum(axis=1)
    zero = np.flatnonzero(deg <= 0)
    if zero.size:
        raise DegreeZeroError(int(zero[0]))
    inv_sqrt = 1.0 / np.sqrt(deg)
    return inv_sqrt[:, None] * a * inv_sqrt[None, :]


def normalize(graph: Graph, kind="laplacian", self_loops=False) -> NormalizedMatrix:
    if kind not in ("adjacency", "laplacian"):
        raise ValueError(f"unknown kind {kind!r}")
    a_norm = normalized_adjacency_dense(graph.adjacency(), self_loops=self_loops)
    if kind == "laplacian":
        values = np.eye(graph.n) - a_norm
    else:
        values = a_norm
    values = 0.5 * (values + values.T)
    return NormalizedMatrix(kind, values, self_loops)


# ----------------------------------------------------------------- subgraphs


def bfs_distances(graph: Graph, source, nbrs=None) -> np.ndarray:
    nbrs = graph.neighbors() if nbrs is None else nbrs
    dist = np.full(graph.n, -1, dtype=np.int64)
    dist[source] = 0
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for w in nbrs[u]:
            if dist[w] < 0:
                dist[w] = dist[u] + 1
                queue.append(w)
    return dist


def k_hop_nodes(graph: Graph, v, k, nbrs=None) -> np.ndarray:
    """Sorted node ids within shortest-path distance ``k`` of ``v``."""
    if not 0 <= v < graph.n:
        raise GraphError(f"node {v} outside [0, {graph.n})")
    if k < 0:
        raise ValueError("k must be >= 0")
    nbrs = graph.neighbors() if nbrs is None else nbrs
    seen = {v}
    frontier = [v]
    for _ in range(k):
        nxt = []
        for u in frontier:
            for w in nbrs[u]:
                if w not in seen:
                    seen.add(w)
                    nxt.append(w)
        frontier = nxt
        if not frontier:
            break
    return np.array(sorted(seen), dtype=np.int64)


def induced_edges(graph: Graph, nodes) -> np.ndarray:
    """Edges of ``graph`` with both endpoints in ``nodes`` (original ids)."""
    mask = np.zeros(graph.n, dtype=bool)
    mask[np.asarray(nodes, dtype=np.int64)] = True
    if not graph.m:
        return graph.edges
    keep = mask[graph.edges[:, 0]] & mask[graph.edges[:, 1]]
    return graph.edges[keep]


def k_hop_subgraph(graph: Graph, v, k) -> Graph:
    """Induced k-hop subgraph around ``v``; ``node_map[i]`` is the original id of node ``i``."""
    nodes = k_hop_nodes(graph, v, k)
    remap = -np.ones(graph.n, dtype=np.int64)
    remap[nodes] = np.arange(nodes.size)
    edges = remap[induced_edges(graph, nodes)]
    labels = graph.labels[nodes] if isinstance(graph.labels, np.ndarray) else graph.labels
    sub = Graph(nodes.size, edges, graph.features[nodes], labels)
    sub.node_map = nodes
    return sub


# ------------------------------------------------------ perturbation strength


@dataclass
class PerturbationStrength:
    delta: float
    k: int
    argmax_node: int
    skipped: list[int] = field(default_factory=list)
    per_node: np.ndarray | None = field(default=None, repr=False)


def local_edge_sets(graph: Graph, k, nbrs=None) -> list[set[tuple[int, int]]]:
    nbrs = graph.neighbors() if nbrs is None else nbrs
    out = []
    for v in range(graph.n):
        nodes = k_hop_nodes(graph, v, k, nbrs)
        out.append({(int(a), int(b)) for a, b in induced_edges(graph, nodes)})
    return out


def reachability(graph: Graph, k) -> np.ndarray:
    """Boolean matrix ``R[v, u]``: ``u`` is within ``k`` hops of ``v``."""
    reach = np.eye(graph.n, dtype=bool)
    step = graph.adjacency().astype(bool) | reach
    for _ in range(k):
        nxt = (reach.astype(np.int64) @ step.astype(np.int64)) > 0
        if np.array_equal(nxt, reach):
            break
        reach = nxt
    return reach


def perturbation_strength(g: Graph, g_prime: Graph, k) -> PerturbationStrength:
    """Worst-case fraction of edge changes over all k-hop neighbourhoods.

    For each node the k-hop subgraph is taken in its own graph, so edges
    that enter or leave the neighbourhood through a flip count as changes.
    Nodes whose k-hop subgraph in ``g`` has no edges are skipped and listed.
    """
    if g.n != g_prime.n:
        raise GraphError(f"node counts differ: {g.n} vs {g_prime.n}")
    union = np.unique(np.vstack([g.edges, g_prime.edges]), axis=0)
    if union.size == 0:
        return PerturbationStrength(0.0, k, -1, list(range(g.n)), np.full(g.n, np.nan))
    in_g = _member(union, g.edges)
    in_h = _member(union, g_prime.edges)
    r, rp = reachability(g, k), reachability(g_prime, k)
    local = r[:, union[:, 0]] & r[:, union[:, 1]] & in_g[None, :]
    local_p = rp[:, union[:, 0]] & rp[:, union[:, 1]] & in_h[None, :]
    size = local.sum(axis=1)
    changed = (local ^ local_p).sum(axis=1)
    ratios = np.full(g.n, np.nan)
    ok = size > 0
    ratios[ok] = changed[ok] / size[ok]
    skipped = np.flatnonzero(~ok).tolist()
    if not ok.any():
        return PerturbationStrength(0.0, k, -1, skipped, ratios)
    arg = int(np.nanargmax(ratios))
    return PerturbationStrength(float(ratios[arg]), k, arg, skipped, ratios)


def _member(pairs, edges) -> np.ndarray:
    if not len(edges):
        return np.zeros(len(pairs), dtype=bool)
    n = int(max(pairs.max(), edges.max())) + 1
    return np.isin(pairs[:, 0] * n + pairs[:, 1], edges[:, 0] * n + edges[:, 1])

def disjoint_union(graphs):
    """Block-diagonal union of graphs; returns ``(graph, segment_ids)``."""
    graphs = list(graphs)
    if not graphs:
        raise GraphError("need at least one graph")
    offsets = np.cumsum([0] + [g.n for g in graphs])
    edges = [g.edges + off for g, off in zip(graphs, offsets[:-1]) if g.m]
    edges = np.vstack(edges) if edges else np.zeros((0, 2), dtype=np.int64)
    feats = np.vstack([g.features for g in graphs])
    segments = np.repeat(np.arange(len(graphs)), [g.n for g in graphs])
    return Graph(int(offsets[-1]), edges, feats), segments
