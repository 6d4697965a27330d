"""Two-view contrastive training loop, data splits and linear-probe evaluation."""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.special import log_softmax, softmax

from .augment import AugmentationSpec, augment, ppr_diffusion, span_pair
from .encoder import EncoderConfig, EncoderState, encode, encode_grad, init_encoder, spectral_norm_cap
from .graph import Graph, disjoint_union
from .objectives import LossConfig, loss_value_and_grad
from .spectrum import Spectrum, graph_spectrum

FRAMEWORK_LOSS = {"grace": "infonce", "mvgrl": "jse", "gbt": "barlow_twins", "bgrl": "byol"}


class ConfigError(ValueError):
    pass


class TrainingError(RuntimeError):
    pass


class DegenerateSplitError(ValueError):
    pass


@dataclass
class TrainConfig:
    framework: str
    augmentation_1: AugmentationSpec
    augmentation_2: AugmentationSpec
    encoder: EncoderConfig
    loss: LossConfig | None = None
    epochs: int = 100
    lr: float = 5e-4
    momentum: float = 0.9
    seed: int = 0
    spectrum_logging: bool = False

    def __post_init__(self):
        if self.framework not in FRAMEWORK_LOSS:
            raise ConfigError(f"unknown framework {self.framework!r}")
        expected = FRAMEWORK_LOSS[self.framework]
        if self.loss is None:
            self.loss = LossConfig(expected)
        if self.loss.kind != expected:
            raise ConfigError(f"{self.framework} requires the {expected} loss, got {self.loss.kind}")
        if self.epochs < 1:
            raise ConfigError("epochs must be >= 1")
        if self.lr < 0:
            raise ConfigError("lr must be non-negative")
        if self.augmentation_1.kind == "ppr":
            raise ConfigError("the diffusion view must be augmentation_2")
        if self.augmentation_2.kind == "ppr" and self.framework != "mvgrl":
            raise ConfigError("ppr views are only used by mvgrl")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d) -> "TrainConfig":
        d = dict(d)
        return cls(
            framework=d.pop("framework"),
            augmentation_1=AugmentationSpec(**d.pop("augmentation_1")),
            augmentation_2=AugmentationSpec(**d.pop("augmentation_2")),
            encoder=EncoderConfig(**d.pop("encoder")),
            loss=LossConfig(**d.pop("loss")) if d.get("loss") else d.pop("loss", None),
            **d,
        )


@dataclass
class RunRecord:
    loss_history: list[float]
    final_state: EncoderState
    initial_state: EncoderState
    wallclock_per_epoch: list[float]
    augmented_spectra: list[Spectrum] | None = None
    spectrum_cadence: str = "both views, every epoch"
    view_reports: list[dict] = field(default_factory=list)


@dataclass
class Split:
    train: np.ndarray
    val: np.ndarray
    test: np.ndarray


def split(n, fractions=(0.1, 0.1, 0.8), seed=0) -> Split:
    """Random train/val/test split with floor sizes and the remainder in test."""
    if n < 3:
        raise ValueError("need at least 3 items to split")
    fr = np.asarray(fractions, float)
    if fr.shape != (3,) or (fr <= 0).any() or abs(fr.sum() - 1.0) > 1e-9:
        raise ValueError("fractions must be three positive numbers summing to 1")
    perm = np.random.default_rng(seed).permutation(n)
    n_train = int(np.floor(n * fr[0] + 1e-9))
    n_val = int(np.floor(n * fr[1] + 1e-9))
    return Split(
        np.sort(perm[:n_train]),
        np.sort(perm[n_train : n_train + n_val]),
        np.sort(perm[n_train + n_val :]),
    )


def graph_readout(node_embeddings) -> np.ndarray:
    """Mean over node rows for each graph in a list of ``(n_i, d)`` arrays."""
    rows = []
    for i, z in enumerate(node_embeddings):
        z = z.Z if hasattr(z, "Z") else np.asarray(z, float)
        if z.shape[0] == 0:
            raise ValueError(f"graph {i} has no nodes")
        rows.append(z.mean(axis=0))
    return np.vstack(rows)


def _segment_mean(z, segments, n_graphs):
    counts = np.bincount(segments, minlength=n_graphs).astype(float)
    out = np.zeros((n_graphs, z.shape[1]))
    np.add.at(out, segments, z)
    return out / counts[:, None]


# ------------------------------------------------------------------- views


class _ViewSource:
    """Produces the two views for each epoch from the configured specs."""

    def __init__(self, config: TrainConfig, graphs: list[Graph], rng):
        self.config = config
        self.graphs = graphs
        a1, a2 = config.augmentation_1, config.augmentation_2
        self.ppr = None
        if a2.kind == "ppr":
            self.ppr = [ppr_diffusion(g, a2.alpha) for g in graphs]
        # spectral augmentations are expensive; draw a fixed pool up front and sample from it
        self.pools = {}
        for idx, spec in ((0, a1), (1, a2)):
            if spec.kind == "span" and idx == 0:
                pool = []
                for _ in range(max(1, spec.pool)):
                    pool.append([span_pair(g, spec.budget, spec.candidates, rng) for g in graphs])
                self.pools["span"] = pool
            elif spec.kind == "spa":
                self.pools[idx] = [
                    [augment(g, spec, rng) for g in graphs] for _ in range(max(1, spec.pool))
                ]

    def draw(self, rng):
        a1, a2 = self.config.augmentation_1, self.config.augmentation_2
        if "span" in self.pools:
            pair = self.pools["span"][int(rng.integers(len(self.pools["span"])))]
            v1 = [p[0] for p in pair]
            v2 = [p[1] for p in pair] if a2.kind == "span" else None
        else:
            v1 = self._single(0, a1, rng)
            v2 = None
        if v2 is None:
            v2 = None if a2.kind == "ppr" else self._single(1, a2, rng)
        return v1, v2

    def _single(self, idx, spec, rng):
        if idx in self.pools:
            pool = self.pools[idx]
            return pool[int(rng.integers(len(pool)))]
        return [augment(g, spec, rng) for g in self.graphs]


def _encode_views(state, cfg, views, graphs, ppr):
    if views is None:
        # diffusion view: block-diagonal PPR operators
        n_tot = sum(g.n for g in graphs)
        prop = np.zeros((n_tot, n_tot))
        off = 0
        for g, s in zip(graphs, ppr):
            prop[off : off + g.n, off : off + g.n] = s
            off += g.n
        feats = np.vstack([g.features for g in graphs])
        return prop, feats
    if len(views) == 1:
        return views[0].graph, None
    union, _ = disjoint_union([v.graph for v in views])
    return union, None


def train(config: TrainConfig, data) -> RunRecord:
    """Optimise encoder and projection on two augmented views per epoch.

    ``data`` is one graph (node-level) or a list of graphs (graph-level,
    contrasted on mean-pooled readouts). Updates use gradient descent with
    momentum; when ``encoder.L_W`` is set the weights are re-capped after
    every step.
    """
    graphs = [data] if isinstance(data, Graph) else list(data)
    graph_level = not isinstance(data, Graph)
    cfg = config.encoder
    seq = np.random.SeedSequence(config.seed)
    init_seed, pool_seed, epoch_seq = seq.spawn(3)
    state = init_encoder(cfg, np.random.default_rng(init_seed))
    initial = state.copy()
    source = _ViewSource(config, graphs, np.random.default_rng(pool_seed))
    velocity = [np.zeros_like(p) for p in state.params()]
    segments = None
    if graph_level:
        _, segments = disjoint_union(graphs)

    losses, times, spectra, reports = [], [], [] if config.spectrum_logging else None, []
    for epoch, sub in enumerate(epoch_seq.spawn(config.epochs)):
        t0 = time.perf_counter()
        rng = np.random.default_rng(sub)
        v1, v2 = source.draw(rng)
        if spectra is not None:
            for views in (v1, v2):
                if views is not None:
                    spectra.extend(graph_spectrum(v.graph) for v in views)
        reports.append({"view1": [v.report for v in v1], "view2": None if v2 is None else [v.report for v in v2]})

        g1, f1 = _encode_views(state, cfg, v1, graphs, source.ppr)
        g2, f2 = _encode_views(state, cfg, v2, graphs, source.ppr)
        e1 = encode(state, cfg, g1, f1).Z
        e2 = encode(state, cfg, g2, f2).Z
        if graph_level:
            r1 = _segment_mean(e1, segments, len(graphs))
            r2 = _segment_mean(e2, segments, len(graphs))
            value, d1, d2 = loss_value_and_grad(config.loss, r1, r2)
            counts = np.bincount(segments).astype(float)
            d1 = d1[segments] / counts[segments, None]
            d2 = d2[segments] / counts[segments, None]
        else:
            value, d1, d2 = loss_value_and_grad(config.loss, e1, e2)
        if not np.isfinite(value):
            norms = [float(np.linalg.norm(p)) for p in state.params()]
            raise TrainingError(f"non-finite loss at epoch {epoch}; parameter norms {norms}")
        losses.append(float(value))

        gw1, gp1 = encode_grad(state, cfg, g1, d1, f1)
        gw2, gp2 = encode_grad(state, cfg, g2, d2, f2)
        grads = [a + b for a, b in zip(gw1, gw2)] + [gp1 + gp2]
        params = state.params()
        for p, v, g in zip(params, velocity, grads):
            v *= config.momentum
            v += g
            p -= config.lr * v
        if cfg.L_W is not None:
            state = spectral_norm_cap(state, cfg.L_W)
        times.append(time.perf_counter() - t0)

    return RunRecord(losses, state, initial, times, spectra, view_reports=reports)


def embed(state: EncoderState, config: EncoderConfig, data, representation="hidden") -> np.ndarray:
    """Frozen-encoder features for probing.

    ``representation`` selects the encoder output (``"hidden"``) or the
    projected embedding (``"projected"``). Lists of graphs are mean-pooled.
    """
    graphs = [data] if isinstance(data, Graph) else list(data)
    out = []
    for g in graphs:
        e = encode(state, config, g)
        z = e.hidden if representation == "hidden" else e.Z
        out.append(z)
    if isinstance(data, Graph):
        return out[0]
    return graph_readout(out)


# -------------------------------------------------------------- evaluation


@dataclass
class ProbeResult:
    accuracy: float
    val_accuracy: float
    best_step: int


def linear_probe(
    embeddings, labels, split: Split, steps=500, lr=0.1, l2=1e-4, return_details=False
):
    """Multinomial logistic regression on frozen embeddings.

    Trained by full-batch gradient descent on the train indices with features
    standardized by train statistics; the step with the best validation
    accuracy is evaluated on the test indices.
    """
    x = embeddings.Z if hasattr(embeddings, "Z") else np.asarray(embeddings, float)
    y = np.asarray(labels, dtype=np.int64)
    if y.shape[0] != x.shape[0]:
        raise ValueError("labels must cover every embedding row")
    train_y = y[split.train]
    if np.unique(train_y).size < 2:
        raise DegenerateSplitError("training split contains a single class")
    mu = x[split.train].mean(axis=0)
    sd = x[split.train].std(axis=0)
    sd[sd == 0] = 1.0
    xs = (x - mu) / sd
    xs = np.hstack([xs, np.ones((xs.shape[0], 1))])
    n_cls = int(y.max()) + 1
    onehot = np.eye(n_cls)[train_y]
    w = np.zeros((xs.shape[1], n_cls))
    xt = xs[split.train]
    best = (-1.0, 0, w.copy())
    for step in range(steps):
        prob = softmax(xt @ w, axis=1)
        grad = xt.T @ (prob - onehot) / xt.shape[0] + l2 * w
        w -= lr * grad
        val_acc = _accuracy(xs, y, split.val, w) if split.val.size else _accuracy(xs, y, split.train, w)
        if val_acc > best[0]:
            best = (val_acc, step, w.copy())
    acc = _accuracy(xs, y, split.test, best[2])
    if return_details:
        return ProbeResult(acc, best[0], best[1])
    return acc


def _accuracy(xs, y, idx, w) -> float:
    pred = np.argmax(xs[idx] @ w, axis=1)
    return float(np.mean(pred == y[idx]))


def probe_loss(xs, y, w):
    return float(-np.mean(log_softmax(xs @ w, axis=1)[np.arange(y.size), y]))
