import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from varsamp.hilbert import InnerProductSpace, inner, norm, orth_range, orthonormalize, truncate

vec5 = arrays(np.float64, 5, elements=st.floats(-1e3, 1e3))
pos5 = arrays(np.float64, 5, elements=st.floats(1e-3, 10))


def test_inner_orthogonal_unit_vectors():
    sp = InnerProductSpace.euclidean(3)
    assert inner(sp, np.eye(3)[0], np.eye(3)[1]) == 0.0


def test_inner_weighted_definition():
    sp = InnerProductSpace(np.array([0.5, 1.0]))
    e1 = np.array([1.0, 0.0])
    assert inner(sp, e1, e1) == 0.5


def test_inner_matches_trapezoid_oracle(rng, grid33):
    x, y = rng.standard_normal(33), rng.standard_normal(33)
    t = np.linspace(-1, 1, 33)
    oracle = np.trapezoid(x * y, t) / 2.0
    assert abs(inner(grid33, x, y) - oracle) < 1e-12


def test_inner_is_conjugate_linear_in_second_argument():
    sp = InnerProductSpace.euclidean(2, "complex")
    x = np.array([1.0, 0.0], dtype=complex)
    assert inner(sp, x, 1j * x) == pytest.approx(-1j)
    assert inner(sp, 1j * x, x) == pytest.approx(1j)


def test_norm_trivial_cases():
    sp = InnerProductSpace.euclidean(4)
    assert norm(sp, np.zeros(4)) == 0.0
    assert norm(sp, np.eye(4)[0]) == 1.0


def test_truncate_examples():
    sp = InnerProductSpace.euclidean(2)
    x = np.array([0.3, 0.4])
    assert np.array_equal(truncate(sp, x, 1.0), x)
    y = np.array([1.2, 1.6])
    np.testing.assert_allclose(truncate(sp, y, 1.0), y / 2)
    with pytest.raises(ValueError):
        truncate(sp, x, -1.0)


def test_truncate_contraction_bulk(rng):
    sp = InnerProductSpace(rng.uniform(0.1, 2.0, 6))
    X = rng.standard_normal((10_000, 2, 6)) * rng.uniform(0.1, 5, (10_000, 1, 1))
    worst = max(norm(sp, truncate(sp, a, 1.0) - truncate(sp, b, 1.0)) - norm(sp, a - b) for a, b in X)
    assert worst <= 1e-12


def test_space_validation():
    with pytest.raises(ValueError):
        InnerProductSpace(np.array([1.0, 0.0]))
    with pytest.raises(ValueError):
        InnerProductSpace(np.ones(2), "quaternion")
    with pytest.raises(ValueError):
        InnerProductSpace.euclidean(3).check(np.ones(4))


def test_uniform_grid_is_probability():
    assert InnerProductSpace.uniform_grid(17).weights.sum() == pytest.approx(1.0, abs=1e-15)


def test_json_round_trip():
    sp = InnerProductSpace.uniform_grid(9)
    back = InnerProductSpace.from_json(sp.to_json())
    np.testing.assert_array_equal(back.weights, sp.weights)
    np.testing.assert_array_equal(InnerProductSpace.from_json({"grid": 9}).weights, sp.weights)


def test_orthonormalize_and_rank(rng, grid33):
    B = rng.standard_normal((33, 4))
    Q = orthonormalize(grid33, B)
    np.testing.assert_allclose(Q.T @ (grid33.weights[:, None] * Q), np.eye(4), atol=1e-12)
    with pytest.raises(np.linalg.LinAlgError):
        orthonormalize(grid33, np.hstack([B, B[:, :1]]))
    assert orth_range(grid33, np.hstack([B, B[:, :1]])).shape[1] == 4


@given(vec5, vec5, pos5)
def test_cauchy_schwarz(x, y, w):
    sp = InnerProductSpace(w)
    assert abs(inner(sp, x, y)) <= norm(sp, x) * norm(sp, y) * (1 + 1e-12) + 1e-9


@given(vec5, vec5, pos5, st.floats(0, 100))
def test_norm_homogeneity_and_triangle(x, y, w, t):
    sp = InnerProductSpace(w)
    assert norm(sp, t * x) == pytest.approx(t * norm(sp, x), rel=1e-12, abs=1e-9)
    assert norm(sp, x + y) <= norm(sp, x) + norm(sp, y) + 1e-9


@given(vec5, vec5, pos5, st.floats(0, 10))
def test_truncate_contraction_and_idempotence(x, y, w, theta):
    sp = InnerProductSpace(w)
    cx, cy = truncate(sp, x, theta), truncate(sp, y, theta)
    assert norm(sp, cx) <= theta * (1 + 1e-12) + 1e-12
    assert norm(sp, cx - cy) <= norm(sp, x - y) * (1 + 1e-12) + 1e-9
    np.testing.assert_allclose(truncate(sp, cx, theta), cx, rtol=1e-12, atol=1e-12)
