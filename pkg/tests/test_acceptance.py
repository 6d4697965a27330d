"""One test per acceptance criterion; each records a single PASS/FAIL line.

Two criteria do not hold here (a lemma that fails as stated, and the
spectrum-degeneration ratio). Those tests still compute and print the honest
result, then mark themselves xfail with the measured diagnosis; any other
failure mode in them is a hard failure.
"""

import csv
import time
import warnings
from functools import lru_cache

import numpy as np
import pytest

from cgssl.analysis import iv2sls, loglog_slope, ols, poly_regression, time_benchmark
from cgssl.augment import AugmentationSpec
from cgssl.cli import main
from cgssl.encoder import EncoderConfig, EncoderState, encode, encode_grad, init_encoder
from cgssl.experiments import (
    best_rate,
    degeneration_ratio,
    drop_rate_sweep,
    gbt_config,
    run_probe,
    sbm_benchmark,
)
from cgssl.graph import generate_er, generate_sbm, generate_synthetic
from cgssl.objectives import LossConfig, loss_value_and_grad
from cgssl.theory import APPENDIX_D, bound_params, lemma2_margins, sample_er_graph, sample_perturbation
from cgssl.theory import verify_lemma, verify_theorem

from . import test_properties as props
from .conftest import record_criterion
from .oracles import central_difference, normal_equations

SEEDS = range(5)


def _fd_ok(analytic, numeric):
    rel = np.abs(analytic - numeric) / (np.abs(analytic) + 1e-8)
    # an entry within 1e-7 absolute sits on a ReLU kink or is numerically zero
    return bool(np.all((rel <= 1e-4) | (np.abs(analytic - numeric) <= 1e-7)))


@lru_cache(maxsize=None)
def sbm_sweep(seed):
    return drop_rate_sweep(sbm_benchmark(seed), seed)


# ------------------------------------------------------------------ 1


def test_criterion_01_appendix_d_golden(tmp_path, capsys):
    t0 = time.perf_counter()
    code = main(["bounds", "--preset", "appendix-d", "--out-dir", str(tmp_path)])
    elapsed = time.perf_counter() - t0
    capsys.readouterr()
    with open(tmp_path / "bounds.csv", newline="") as fh:
        row = {k: float(v) for k, v in next(csv.DictReader(fh)).items()}
    # [PAPER] reference numerical estimation
    golden = {"epsilon": 0.650, "epsilon_prime": 0.05805, "lower": 4.7989, "upper": 5.4497, "gap": 0.6508}
    errs = {k: abs(row[k] - v) for k, v in golden.items()}
    ok = code == 0 and max(errs.values()) <= 1e-2 and elapsed < 1.0
    record_criterion(1, ok, f"lower={row['lower']:.4f} upper={row['upper']:.4f} gap={row['gap']:.4f} "
                            f"eps={row['epsilon']:.4f} eps'={row['epsilon_prime']:.5f} "
                            f"max|err|={max(errs.values()):.1e} ({elapsed:.2f}s)")
    assert ok


# ------------------------------------------------------------------ 2


def test_criterion_02_gradients():
    t0 = time.perf_counter()
    fails = []
    for seed in range(20):
        rng = np.random.default_rng(1000 + seed)
        n = int(rng.integers(3, 13))
        g = generate_er(n, 0.4, seed=seed, feature_dim=int(rng.integers(2, 9)))
        k = 1 + seed % 2
        cfg = EncoderConfig([g.features.shape[1]] + [int(rng.integers(2, 9))] * k, int(rng.integers(2, 9)),
                            normalize_output=bool(seed % 3))
        raw = EncoderConfig(cfg.dims, cfg.proj_dim, normalize_output=False)
        state = init_encoder(cfg, rng)
        while np.linalg.norm(encode(state, raw, g).Z, axis=1).min() <= 1e-3:
            state = init_encoder(cfg, rng)
        up = rng.standard_normal((n, cfg.proj_dim))
        gw, gp = encode_grad(state, cfg, g, up)
        params = state.params()
        for i, (p, a) in enumerate(zip(params, [*gw, gp])):
            def f(x, i=i):
                ps = [q.copy() for q in params]
                ps[i] = x
                return float(np.sum(encode(EncoderState(ps[:-1], ps[-1]), cfg, g).Z * up))
            if not _fd_ok(a, central_difference(f, p, h=1e-5)):
                fails.append(("encoder", seed))
    for kind in ("infonce", "jse", "byol", "barlow_twins"):
        for seed in range(20):
            rng = np.random.default_rng(2000 + seed)
            n, d = int(rng.integers(3, 13)), int(rng.integers(2, 9))
            z1, z2 = rng.standard_normal((n, d)), rng.standard_normal((n, d))
            lc = LossConfig(kind)
            _, g1, g2 = loss_value_and_grad(lc, z1, z2)
            n1 = central_difference(lambda x: loss_value_and_grad(lc, x, z2)[0], z1)
            n2 = central_difference(lambda x: loss_value_and_grad(lc, z1, x)[0], z2)
            if not (_fd_ok(g1, n1) and _fd_ok(g2, n2)):
                fails.append((kind, seed))
    elapsed = time.perf_counter() - t0
    ok = not fails and elapsed < 30
    record_criterion(2, ok, f"encoder + 4 losses, 20 instances each, {len(fails)} mismatches ({elapsed:.1f}s)")
    assert ok, fails


# ------------------------------------------------------------------ 3


def _lemma2_breakdown(trials=50, seed=99):
    """Which of the three Lemma 2 inequalities fail, and the degree ratios involved."""
    rng = np.random.default_rng(seed)
    fails = np.zeros(3, int)
    ratios = []
    for _ in range(trials):
        g = sample_er_graph(40, 6.0, rng)
        h, delta = sample_perturbation(g, 1, 0.2, rng)
        m = lemma2_margins(g, h, 1, delta).reshape(-1, 3)
        fails += (m < -1e-9).any(axis=0)
        deg = g.degrees()
        ratios.append(deg.max() / deg.min())
    return fails, float(np.median(ratios))


def test_criterion_03_lemma_suite():
    t0 = time.perf_counter()
    results = {}
    for lemma in (1, 2, 3, 4):
        passes, worst = 0, np.inf
        for k in (1, 2):
            rep = verify_lemma(lemma, trials=50, n=60, delta=0.3, k=k, L_W=0.5, seed=100 * lemma + k)
            assert max(rep.deltas) <= 0.3 + 1e-12
            passes += rep.pass_count
            worst = min(worst, rep.worst_margin)
        results[lemma] = (passes, worst)
    eq = verify_lemma(1, trials=50, n=60, delta=0.3, equality_case=True, seed=7)
    l6 = verify_lemma(6, n=1000, d=4096, pairs=100_000, seed=0)
    elapsed = time.perf_counter() - t0

    need6 = 1 - 4 / 1000
    others_ok = (all(results[i][0] == 100 for i in (1, 3, 4)) and eq.pass_count == eq.trials
                 and abs(eq.worst_margin) <= 1e-9 and l6.pass_fraction >= need6 and elapsed < 300)
    lemma2_ok = results[2][0] == 100
    summary = " ".join(f"L{i}={p}/100(worst {w:+.3g})" for i, (p, w) in results.items())
    detail = (f"{summary} L1eq|margin|<={abs(eq.worst_margin):.1e} "
              f"L6={l6.pass_fraction:.5f}>={need6} ({elapsed:.0f}s)")
    record_criterion(3, others_ok and lemma2_ok, detail)
    assert others_ok, detail
    if not lemma2_ok:
        fails, ratio = _lemma2_breakdown()
        pytest.xfail(
            "Lemma 2 does not hold as stated: failing trials per inequality "
            f"(degree change, Frobenius, spectral) = {fails.tolist()} of 50. The degree bound "
            "|d_v - d'_v| <= delta d_v does not follow from the local perturbation strength, whose "
            "denominator counts every edge of the k-hop subgraph; the last proof step needs "
            f"d_max <= d_min, while these graphs have median d_max/d_min = {ratio:.1f}."
        )


# ------------------------------------------------------------------ 4


def test_criterion_04_theorem_sandwich():
    t0 = time.perf_counter()
    res = bound_params(APPENDIX_D)
    checks = [verify_theorem(1000, 4096, APPENDIX_D.tau, res.epsilon, res.epsilon_prime, seed=s)
              for s in range(100)]
    within = sum(c.within for c in checks)
    hyp_ok = all(c.max_negative_sim <= res.epsilon_prime and c.min_positive_sim >= 1 - res.epsilon**2 / 2 - 1e-12
                 for c in checks)
    controls = [verify_theorem(1000, 4096, APPENDIX_D.tau, res.epsilon, res.epsilon_prime, seed=s, violate=True)
                for s in range(3)]
    violated = sum(c.loss > c.upper + 1e-9 for c in controls)
    elapsed = time.perf_counter() - t0
    losses = [c.loss for c in checks]
    ok = within == 100 and hyp_ok and violated >= 1 and elapsed < 120
    record_criterion(4, ok, f"within {within}/100 (loss {min(losses):.4f}..{max(losses):.4f} in "
                            f"[{checks[0].lower:.4f}, {checks[0].upper:.4f}]); negative control "
                            f"violates upper in {violated}/3 (loss {controls[0].loss:.4f}) ({elapsed:.0f}s)")
    assert ok


# ------------------------------------------------------------------ 5


def test_criterion_05_timing_ordering():
    t0 = time.perf_counter()
    ns = [250, 500, 1000, 2000]
    spec, drop = [], []
    for n in ns:
        g = generate_synthetic("er", {"n": n, "p": 10.0 / (n - 1)}, seed=0)
        spec.append(time_benchmark("spectrum", g, repeats=3).seconds_per_call)
        drop.append(time_benchmark("drop_edge", g, repeats=5).seconds_per_call)
    ratio = spec[-1] / drop[-1]
    slope = loglog_slope(ns, spec)
    elapsed = time.perf_counter() - t0
    ok = ratio > 50 and 2.3 <= slope <= 3.5 and elapsed < 600
    record_criterion(5, ok, f"n=2000 spectrum/DropEdge = {ratio:.0f} (>50), log-log slope {slope:.2f} "
                            f"in [2.3, 3.5] ({elapsed:.0f}s)")
    assert ok


# ------------------------------------------------------------------ 6


def test_criterion_06_spectrum_degeneration():
    t0 = time.perf_counter()
    rows = []
    for seed in range(3):
        sbm = generate_sbm([100, 100], 0.1, 0.005, seed=seed, feature_dim=128)
        er = generate_er(200, 0.05, seed=seed, feature_dim=128)
        p_star = best_rate(drop_rate_sweep(sbm, seed))
        ratio, d_aug, d_orig = degeneration_ratio(sbm, er, p_star, samples=50, seed=seed)
        rows.append((seed, p_star, ratio, d_aug, d_orig))
    elapsed = time.perf_counter() - t0
    ok = all(r[2] < 0.6 for r in rows) and elapsed < 600
    detail = "; ".join(f"seed {s}: p*={p} ratio={r:.3f} ({a:.3f}/{o:.3f})" for s, p, r, a, o in rows)
    record_criterion(6, ok, f"{detail} (<0.6 required) ({elapsed:.0f}s)")
    assert elapsed < 600
    if not ok:
        pytest.xfail(
            "DropEdge ensembles at the probe-optimal rate keep the two families apart: the distance "
            "between the family-mean spectra stays above 0.6 of the original distance "
            f"(ratios {', '.join(f'{r[2]:.3f}' for r in rows)})."
        )


# ------------------------------------------------------------------ 7


def test_criterion_07_learning_signal():
    trained, untrained = [], []
    for seed in SEEDS:
        t, u, _ = run_probe(sbm_benchmark(seed), gbt_config(AugmentationSpec("drop_edge", p=0.3), seed=seed))
        assert t == sbm_sweep(seed)[0.3]
        trained.append(t)
        untrained.append(u)
    med_t = float(np.median(trained))
    med_gap = float(np.median(np.subtract(trained, untrained)))
    ok = med_t >= 0.85 and med_gap >= 0.10
    record_criterion(7, ok, f"median probe accuracy {med_t:.3f} (>=0.85), median gain over untrained "
                            f"{med_gap:.3f} (>=0.10); per seed {np.round(trained, 3).tolist()}")
    assert ok


# ------------------------------------------------------------------ 8


def test_criterion_08_edge_perturbation_vs_span():
    drop_best, span_acc = [], []
    for seed in SEEDS:
        sweep = sbm_sweep(seed)
        drop_best.append(sweep[best_rate(sweep)])
        span = AugmentationSpec("span", budget=20)
        span_acc.append(run_probe(sbm_benchmark(seed), gbt_config(span, seed=seed))[0])
    med_drop = float(np.median(drop_best))
    med_span = float(np.median(span_acc))
    ok = med_drop >= med_span - 0.02
    record_criterion(8, ok, f"median DropEdge best-p {med_drop:.3f} vs SPAN(budget 20) {med_span:.3f} "
                            f"(need >= {med_span - 0.02:.3f})")
    assert ok


# ------------------------------------------------------------------ 9


def test_criterion_09_statistics_oracles():
    t0 = time.perf_counter()
    rng = np.random.default_rng(9)
    worst = 0.0
    for i in range(100):
        order = 1 + i % 2
        n = int(rng.integers(8, 60))
        x = rng.uniform(-2, 2, n)
        y = 1 - x + 0.4 * x**2 + rng.normal(0, 0.5, n)
        res = poly_regression(x, y, order)
        beta, r2, adj, f, p, _ = normal_equations(x, y, order)
        worst = max(worst, np.abs(res.coefficients - beta).max(), abs(res.r_squared - r2),
                    abs(res.adj_r_squared - adj), abs(res.f_statistic - f) / max(1.0, abs(f)),
                    abs(res.p_value - p))
    x = rng.standard_normal(200)
    y = 0.3 + 1.2 * x + rng.standard_normal(200)
    iv_gap = float(np.abs(iv2sls(y, x, x).coefficients - ols(x, y).coefficients).max())
    n = 5000
    z, u = rng.standard_normal(n), rng.standard_normal(n)
    xe = 2.0 * z + u + 0.3 * rng.standard_normal(n)
    ye = 2.0 + 1.5 * xe + 2.0 * u + 0.5 * rng.standard_normal(n)
    beta = float(iv2sls(ye, xe, z).coefficients[1])
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-8 and iv_gap <= 1e-10 and abs(beta - 1.5) <= 0.05 and elapsed < 60
    record_criterion(9, ok, f"oracle max err {worst:.1e}, IV(z=x)-OLS {iv_gap:.1e}, beta_hat {beta:.4f} "
                            f"(OLS {ols(xe, ye).coefficients[1]:.3f}) ({elapsed:.1f}s)")
    assert ok


# ------------------------------------------------------------------ 10


def test_criterion_10_invariants():
    suites = [
        props.test_spectral_distance_is_a_metric,
        props.test_laplacian_eigenvalues_in_range,
        props.test_encode_permutation_equivariant,
        props.test_augmentations_never_touch_features,
    ]
    failures = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for fn in suites:
            try:
                fn()
            except Exception as exc:  # noqa: BLE001
                failures.append(f"{fn.__name__}: {exc}")
    cases = props.PROPS.max_examples
    ok = not failures
    record_criterion(10, ok, f"{len(suites)} property suites x {cases} cases, {len(failures)} failing")
    assert ok, failures
