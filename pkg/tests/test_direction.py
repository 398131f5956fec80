import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nsdfo.clustering import SampleSet
from nsdfo.direction import compute_direction, default_epsilon
from nsdfo.minnorm import SpdMetric, min_norm_point


def maxl_samples(n):
    I = np.eye(n)
    return SampleSet.from_arrays(np.vstack([I, -I]), np.r_[np.ones(n), np.zeros(n)])


def piecewise_samples(rng, n, p, r):
    """Exact quotients of a max of p linear pieces measured at a kink point."""
    W = rng.normal(size=(p, n))
    D = rng.normal(size=(r, n))
    D /= np.linalg.norm(D, axis=1, keepdims=True)
    return SampleSet.from_arrays(D, np.max(D @ W.T, axis=1))


def test_maxl_golden_example():
    out = compute_direction(maxl_samples(5), epsilon=1e-6)
    assert out.found
    assert out.p_used == 5
    np.testing.assert_allclose(out.xi_star.point, np.full(5, 0.2), atol=1e-10)
    np.testing.assert_allclose(out.direction, -np.ones(5) / np.sqrt(5), atol=1e-10)
    # descent on the true objective max_i x_i at x = e
    assert np.max(np.ones(5) + 1e-3 * out.direction) < 1.0


def test_single_sample_is_not_enough():
    out = compute_direction(SampleSet.from_arrays([[1.0, 0.0]], [1.0]))
    assert not out.found
    np.testing.assert_array_equal(out.direction, np.zeros(2))


def test_no_samples():
    out = compute_direction(SampleSet(), metric=SpdMetric.identity(3))
    assert not out.found
    assert out.direction.shape == (3,)


def test_straddling_generators_look_stationary():
    S = SampleSet.from_arrays([[1.0, 0.0], [-1.0, 0.0]], [1.0, 1.0])
    out = compute_direction(S)
    assert not out.found
    np.testing.assert_array_equal(out.direction, np.zeros(2))
    # the guard, not the threshold, rejected it
    assert out.p_used == 2
    ref = min_norm_point(out.model.generators.T)
    assert np.linalg.norm(ref.point) <= 1e-12


def test_unexplained_samples_rejected():
    rng = np.random.default_rng(0)
    S = SampleSet.from_arrays(rng.normal(size=(40, 2)), rng.normal(size=40))
    assert not compute_direction(S, epsilon=1e-10).found


def test_default_epsilon_scales_with_sample_energy():
    S = SampleSet.from_arrays(np.eye(2), [30.0, 40.0])
    assert default_epsilon(S) == pytest.approx(1e-4 * 2500)
    assert default_epsilon(SampleSet.from_arrays(np.eye(2), [0.1, 0.1])) == 1e-4


def test_nonpositive_epsilon_rejected():
    with pytest.raises(ValueError):
        compute_direction(maxl_samples(3), epsilon=0.0)


def test_metric_dimension_checked():
    with pytest.raises(ValueError):
        compute_direction(maxl_samples(3), metric=SpdMetric.identity(4))


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 5), st.integers(2, 4), st.integers(0, 2**32 - 1))
def test_descent_certificate(n, p, seed):
    rng = np.random.default_rng(seed)
    S = piecewise_samples(rng, n, p, 6 * n)
    A = rng.normal(size=(n, n))
    metric = SpdMetric(A @ A.T + np.eye(n))
    out = compute_direction(S, metric, epsilon=1e-6, seed=seed)
    if not out.found:
        return
    assert np.linalg.norm(out.direction) == pytest.approx(1.0, abs=1e-12)
    w = metric.solve(out.xi_star.point)
    np.testing.assert_allclose(out.direction, -w / np.linalg.norm(w), atol=1e-12)
    expected = -(out.xi_star.point @ w) / np.linalg.norm(w)
    assert expected < 0
    used = [j for j, g in enumerate(out.model.assignments) if len(g)]
    assert np.max(out.model.generators[used] @ out.direction) == pytest.approx(expected, abs=1e-8)


def test_deterministic():
    rng = np.random.default_rng(7)
    S = piecewise_samples(rng, 4, 3, 24)
    a = compute_direction(S, seed=3)
    b = compute_direction(S, seed=3)
    assert a.found == b.found and a.p_used == b.p_used
    np.testing.assert_array_equal(a.direction, b.direction)


@pytest.mark.parametrize("seed", range(15))
def test_threshold_monotone(seed):
    # the largest qualifying p is kept, so loosening epsilon never lowers p_used
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 5))
    S = piecewise_samples(rng, n, int(rng.integers(2, 4)), 4 * n)
    S = SampleSet.from_arrays(S.directions, S.quotients + 1e-3 * rng.normal(size=len(S)))
    used = [compute_direction(S, epsilon=eps, seed=seed).p_used for eps in np.logspace(-8, 1, 10)]
    assert used == sorted(used)
