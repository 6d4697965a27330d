"""Desk-scale benchmark recipes shared by the demos and the acceptance suite.

The node-level benchmark is a two-block SBM whose features carry no label
information, so any probe accuracy above the untrained encoder comes from
what training extracted out of the topology.
"""

from __future__ import annotations

import warnings

import numpy as np

from .augment import AugmentationSpec, augment
from .encoder import EncoderConfig, init_encoder
from .graph import Graph, generate_sbm
from .spectrum import graph_spectrum, spectral_distance
from .trainer import TrainConfig, embed, linear_probe, split, train

FEATURE_DIM = 128
HIDDEN = 32
EPOCHS = 200
LR = 0.005
DROP_RATES = tuple(round(0.1 * i, 1) for i in range(1, 10))


def sbm_benchmark(seed, p_in=0.1, p_out=0.01, sizes=(100, 100)) -> Graph:
    return generate_sbm(list(sizes), p_in, p_out, seed=seed, feature_dim=FEATURE_DIM)


def encoder_config(k=1) -> EncoderConfig:
    return EncoderConfig([FEATURE_DIM] + [HIDDEN] * k, HIDDEN, normalize_output=False)


def gbt_config(aug1: AugmentationSpec, aug2: AugmentationSpec | None = None, seed=0, epochs=EPOCHS, k=1,
               lr=LR, spectrum_logging=False) -> TrainConfig:
    return TrainConfig(
        "gbt", aug1, aug2 if aug2 is not None else aug1, encoder_config(k),
        epochs=epochs, lr=lr, seed=seed, spectrum_logging=spectrum_logging,
    )


def probe_accuracy(state, config: TrainConfig, g: Graph, seed) -> float:
    z = embed(state, config.encoder, g)
    return linear_probe(z, g.labels, split(g.n, (0.1, 0.1, 0.8), seed))


def run_probe(g: Graph, config: TrainConfig):
    """Train once and return ``(trained_accuracy, untrained_accuracy, record)``."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        record = train(config, g)
    trained = probe_accuracy(record.final_state, config, g, config.seed)
    untrained = probe_accuracy(record.initial_state, config, g, config.seed)
    return trained, untrained, record


def untrained_accuracy(g: Graph, seed, k=1) -> float:
    cfg = encoder_config(k)
    state = init_encoder(cfg, np.random.default_rng(seed))
    return linear_probe(embed(state, cfg, g), g.labels, split(g.n, (0.1, 0.1, 0.8), seed))


def drop_rate_sweep(g: Graph, seed, rates=DROP_RATES, epochs=EPOCHS) -> dict[float, float]:
    """Probe accuracy of G-BT + DropEdge at every drop rate."""
    out = {}
    for p in rates:
        spec = AugmentationSpec("drop_edge", p=p)
        out[p] = run_probe(g, gbt_config(spec, seed=seed, epochs=epochs))[0]
    return out


def best_rate(sweep: dict[float, float]) -> float:
    """Argmax of a sweep; ties go to the smaller rate."""
    return max(sorted(sweep), key=lambda p: sweep[p])


def mean_augmented_spectrum(g: Graph, spec: AugmentationSpec, samples, rng) -> np.ndarray:
    return np.mean([graph_spectrum(augment(g, spec, rng).graph).values for _ in range(samples)], axis=0)


def degeneration_ratio(g1: Graph, g2: Graph, p, samples=50, seed=0) -> tuple[float, float, float]:
    """Distance between the DropEdge ensemble means relative to the distance between the originals.

    Returns ``(ratio, augmented_distance, original_distance)``.
    """
    rng = np.random.default_rng(seed)
    spec = AugmentationSpec("drop_edge", p=p)
    d_orig = spectral_distance(graph_spectrum(g1), graph_spectrum(g2))
    d_aug = spectral_distance(
        mean_augmented_spectrum(g1, spec, samples, rng), mean_augmented_spectrum(g2, spec, samples, rng)
    )
    return d_aug / d_orig, d_aug, d_orig
