import math

import numpy as np
import pytest
from scipy.stats import ortho_group

from cgssl.encoder import DegenerateEmbeddingError
from cgssl.objectives import (
    LossConfig,
    barlow_twins,
    byol,
    cross_correlation,
    infonce,
    jse,
    loss_value_and_grad,
)

from .oracles import barlow_loop, central_difference, infonce_loop, jse_loop

KINDS = ("infonce", "jse", "byol", "barlow_twins")


def test_infonce_identical_rows_is_log_n():
    z = np.tile([[1.0, 2.0, 0.5]], (4, 1))
    for tau in (0.1, 0.5, 2.0):
        assert infonce(z, z, tau)[0] == pytest.approx(math.log(4))


def test_infonce_orthonormal_closed_form():
    # orthonormal rows: positives cos 1, negatives cos 0
    z = np.eye(6)
    tau = 0.5
    assert infonce(z, z, tau)[0] == pytest.approx(math.log(1 + 5 * math.exp(-1 / tau)))


def test_infonce_loop_oracle():
    rng = np.random.default_rng(0)
    z1, z2 = rng.standard_normal((8, 4)), rng.standard_normal((8, 4))
    assert infonce(z1, z2, 0.3)[0] == pytest.approx(infonce_loop(z1, z2, 0.3), abs=1e-10)


def test_byol_aligned_is_zero_and_bounded():
    z = np.random.default_rng(1).standard_normal((5, 3))
    assert byol(z, z)[0] == pytest.approx(0.0, abs=1e-12)
    assert byol(z, -z)[0] == pytest.approx(4.0)


def test_barlow_decorrelated_is_zero():
    z = np.array([[1.0, 1.0], [1.0, -1.0], [-1.0, 1.0], [-1.0, -1.0]])
    assert barlow_twins(z, z, lam=0.5)[0] == pytest.approx(0.0, abs=1e-12)
    assert np.allclose(cross_correlation(z, z), np.eye(2), atol=1e-7)


def test_barlow_loop_oracle():
    rng = np.random.default_rng(2)
    z1, z2 = rng.standard_normal((7, 3)), rng.standard_normal((7, 3))
    assert barlow_twins(z1, z2, 0.2)[0] == pytest.approx(barlow_loop(z1, z2, 0.2), rel=1e-10)
    assert barlow_twins(z1, z2)[0] == pytest.approx(barlow_loop(z1, z2, 1 / 3), rel=1e-10)


def test_jse_uninformative_is_zero():
    z1 = np.random.default_rng(0).standard_normal((4, 3))
    z2 = np.zeros((4, 3))
    # every score is 0, i.e. discriminator output 1/2
    assert jse(z1, z2)[0] == pytest.approx(0.0, abs=1e-12)


def test_jse_loop_oracle():
    rng = np.random.default_rng(3)
    z1, z2 = rng.standard_normal((6, 3)), rng.standard_normal((6, 3))
    assert jse(z1, z2)[0] == pytest.approx(jse_loop(z1, z2), abs=1e-10)


def test_jse_rewards_alignment():
    rng = np.random.default_rng(4)
    z = rng.standard_normal((10, 4))
    assert jse(z, z)[0] < jse(z, rng.standard_normal((10, 4)))[0]


def test_infonce_nonnegative_and_monotone():
    rng = np.random.default_rng(5)
    assert infonce(rng.standard_normal((6, 4)), rng.standard_normal((6, 4)))[0] >= 0
    # rotate one positive towards its anchor through a direction orthogonal to
    # every other anchor, so all negative similarities stay fixed at 0
    z1 = np.eye(8)[:6]
    values = []
    for theta in np.linspace(np.pi / 2, 0.0, 7):
        z2 = z1.copy()
        z2[0] = np.cos(theta) * np.eye(8)[0] + np.sin(theta) * np.eye(8)[7]
        values.append(infonce(z1, z2, 0.5)[0])
    assert all(b < a for a, b in zip(values, values[1:]))


def test_infonce_rotation_invariant():
    rng = np.random.default_rng(6)
    z1, z2 = rng.standard_normal((6, 5)), rng.standard_normal((6, 5))
    q = ortho_group.rvs(5, random_state=0)
    assert infonce(z1 @ q, z2 @ q)[0] == pytest.approx(infonce(z1, z2)[0], abs=1e-9)


def test_shape_and_degenerate_errors():
    with pytest.raises(ValueError):
        infonce(np.ones((3, 2)), np.ones((4, 2)))
    z = np.ones((3, 2))
    z[1] = 0
    with pytest.raises(DegenerateEmbeddingError) as err:
        byol(z, np.ones((3, 2)))
    assert err.value.node == 1
    with pytest.raises(ValueError):
        barlow_twins(np.ones((1, 2)), np.ones((1, 2)))


def test_config_rules():
    assert LossConfig("infonce").tau == 0.5
    with pytest.raises(ValueError):
        LossConfig("infonce", tau=0)
    with pytest.raises(ValueError):
        LossConfig("mine")
    with pytest.raises(ValueError):
        LossConfig("barlow_twins", lam=-1)


@pytest.mark.parametrize("kind", KINDS)
@pytest.mark.parametrize("seed", range(20))
def test_gradients_finite_difference(kind, seed):
    rng = np.random.default_rng(seed)
    n, d = int(rng.integers(3, 13)), int(rng.integers(2, 9))
    z1, z2 = rng.standard_normal((n, d)), rng.standard_normal((n, d))
    cfg = LossConfig(kind, tau=float(rng.uniform(0.2, 1.0)) if kind == "infonce" else None,
                     lam=float(rng.uniform(0, 1)) if kind == "barlow_twins" else None)
    _, g1, g2 = loss_value_and_grad(cfg, z1, z2)
    n1 = central_difference(lambda x: loss_value_and_grad(cfg, x, z2)[0], z1)
    n2 = central_difference(lambda x: loss_value_and_grad(cfg, z1, x)[0], z2)
    for a, b in ((g1, n1), (g2, n2)):
        rel = np.abs(a - b) / (np.abs(a) + 1e-8)
        assert np.all((rel <= 1e-4) | (np.abs(a - b) <= 1e-8))
