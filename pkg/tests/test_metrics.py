import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mklkit.core import validate_gram
from mklkit.kernels import hpk
from mklkit.metrics import (alignment, center, centered_alignment, frobenius_norm, margin,
                            normalize_kernel, radius, spectral_ratio, trace_norm)

from oracles import bisimplex_grid_min, random_labels, random_psd, simplex_grid_min


def test_margin_examples():
    res = margin(np.eye(2), [1, -1])
    assert res.hull_distance_sq == pytest.approx(2, abs=1e-12)
    assert res.margin == pytest.approx(np.sqrt(2) / 2, abs=1e-12)
    assert margin(np.eye(4), [1, 1, -1, -1]).margin == pytest.approx(0.5, abs=1e-7)


def test_margin_of_overlapping_classes_is_zero():
    X = np.array([[1.0, 0], [0, 1], [1.0, 0], [0.5, 0.5]])
    K = X @ X.T
    assert margin(K, [1, 1, -1, -1]).margin == pytest.approx(0, abs=1e-7)


def test_margin_needs_two_classes():
    with pytest.raises(ValueError):
        margin(np.eye(2), [1, 1])


def test_radius_examples():
    assert radius(np.array([[3.0]])).radius == 0
    res = radius(np.eye(2))
    assert res.radius_sq == pytest.approx(0.5, abs=1e-12)
    np.testing.assert_allclose(res.gamma, 0.5)
    assert radius(np.full((4, 4), 2.0)).radius == pytest.approx(0, abs=1e-7)


def test_radius_of_orthonormal_points_matches_grid():
    K = np.eye(3)
    val, _ = simplex_grid_min(2 * K, -np.diag(K))
    # grid misses 1/3 exactly
    assert radius(K).radius_sq == pytest.approx(-val, abs=2e-2)
    assert radius(K).radius_sq == pytest.approx(2 / 3, abs=1e-7)


@pytest.mark.parametrize("seed", range(8))
def test_margin_and_radius_match_grid(seed):
    rng = np.random.default_rng(100 + seed)
    n = int(rng.integers(2, 6))
    K = random_psd(rng, n)
    y = random_labels(rng, n)
    grid, _ = bisimplex_grid_min(2 * np.outer(y, y) * K, y)
    assert abs(margin(K, y).hull_distance_sq - grid) <= 2e-2
    grid, _ = simplex_grid_min(2 * K, -np.diag(K))
    assert abs(radius(K).radius_sq - (-grid)) <= 2e-2


def test_spectral_ratio_examples():
    for n in (2, 5, 9):
        assert spectral_ratio(np.eye(n), norm=False) == pytest.approx(np.sqrt(n), abs=1e-12)
        assert spectral_ratio(np.eye(n)) == pytest.approx(1, abs=1e-12)
        assert spectral_ratio(np.ones((n, n)), norm=False) == pytest.approx(1, abs=1e-12)
        assert spectral_ratio(np.ones((n, n))) == pytest.approx(0, abs=1e-12)
    K = np.diag([2.0, 0])
    assert spectral_ratio(K, norm=False) == 1
    assert spectral_ratio(K) == 0
    with pytest.raises(ValueError):
        spectral_ratio(np.zeros((2, 2)))
    with pytest.raises(ValueError):
        spectral_ratio(np.eye(1))
    assert spectral_ratio(np.eye(1), norm=False) == 1


def test_alignment_examples():
    K = random_psd(np.random.default_rng(0), 5)
    assert alignment(K, K) == pytest.approx(1, abs=1e-12)
    assert alignment(K, 3.5 * K) == pytest.approx(1, abs=1e-12)
    assert alignment(np.eye(2), np.ones((2, 2))) == pytest.approx(1 / np.sqrt(2), abs=1e-12)
    with pytest.raises(ValueError):
        alignment(np.eye(2), np.eye(3))
    with pytest.raises(ValueError):
        alignment(np.eye(2), np.zeros((2, 2)))


def test_centered_alignment_examples():
    K = random_psd(np.random.default_rng(1), 5)
    assert centered_alignment(K, K) == pytest.approx(1, abs=1e-12)
    assert centered_alignment(np.eye(3), 2 * np.eye(3)) == pytest.approx(1, abs=1e-12)
    np.testing.assert_allclose(center(np.ones((4, 4))), 0, atol=1e-15)
    with pytest.raises(ValueError):
        centered_alignment(np.ones((3, 3)), np.eye(3))


def test_center_matches_projection():
    K = random_psd(np.random.default_rng(2), 6)
    H = np.eye(6) - np.ones((6, 6)) / 6
    np.testing.assert_allclose(center(K), H @ K @ H, atol=1e-12)


def test_normalize_examples():
    K = np.array([[1, 0.3], [0.3, 1]])
    np.testing.assert_allclose(normalize_kernel(K), K, atol=1e-12)
    np.testing.assert_allclose(normalize_kernel([[4, 2], [2, 1]]), np.ones((2, 2)), atol=1e-12)
    np.testing.assert_allclose(normalize_kernel(np.diag([9.0, 4])), np.eye(2), atol=0)
    with pytest.raises(ValueError):
        normalize_kernel(np.diag([1.0, 0]))


def test_norms():
    assert trace_norm(np.eye(4)) == 4
    assert frobenius_norm(np.eye(4)) == pytest.approx(2)
    assert frobenius_norm(np.ones((3, 3))) == pytest.approx(3)
    K = np.array([[2.0, 1], [1, 3]])
    assert trace_norm(K) == 5
    assert frobenius_norm(K) == pytest.approx(np.sqrt(15))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(2, 12))
def test_metric_properties(seed, n):
    rng = np.random.default_rng(seed)
    K = random_psd(rng, n) + 1e-3 * np.eye(n)
    Kn = normalize_kernel(K)
    np.testing.assert_allclose(np.diag(Kn), 1, atol=1e-12)
    assert validate_gram(Kn)
    assert radius(Kn).radius <= 1 + 1e-9
    sr = spectral_ratio(K, norm=False)
    assert 1 - 1e-12 <= sr <= np.sqrt(n) + 1e-12
    assert -1e-12 <= spectral_ratio(K) <= 1 + 1e-12
    K2 = random_psd(rng, n)
    assert alignment(K, K2) == pytest.approx(alignment(K2, K), abs=1e-12)
    assert alignment(2.5 * K, 0.3 * K2) == pytest.approx(alignment(K, K2), abs=1e-12)


@pytest.mark.parametrize("seed", range(10))
def test_hpk_complexity_grows_with_degree(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(5, 31))
    X = rng.standard_normal((n, int(rng.integers(2, 6))))
    srs = [spectral_ratio(normalize_kernel(hpk(X, degree=d))) for d in range(1, 6)]
    assert all(b >= a - 1e-12 for a, b in zip(srs, srs[1:]))
