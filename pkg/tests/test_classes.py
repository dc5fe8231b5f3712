import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from varsamp.classes import (GenerativeRange, SparseClass, Subspace, UnionOfSubspaces,
                             UnsupportedClassError, activation_pattern, class_from_json,
                             difference_set, generative_forward, local_linear_map,
                             pl_expansion_sample, project)
from varsamp.hilbert import norm


def _line(v):
    return Subspace(np.asarray(v, dtype=float)[:, None])


def test_subspace_rejects_rank_deficient():
    with pytest.raises(ValueError):
        Subspace(np.array([[1.0, 2.0], [2.0, 4.0]]))


def test_subspace_orthonormal_flag_checked():
    with pytest.raises(ValueError):
        Subspace(np.array([[2.0], [0.0]]), orthonormal=True)


def test_difference_set_subspace_is_itself():
    V = Subspace(np.eye(4)[:, :2])
    assert difference_set(V) is V


def test_difference_set_sparse_doubles():
    C = SparseClass(np.eye(4), 1)
    assert difference_set(C).s == 2
    assert difference_set(SparseClass(np.eye(4), 3)).s == 4


def test_difference_set_two_orthogonal_lines():
    W = UnionOfSubspaces((_line([1, 0, 0]), _line([0, 1, 0])))
    D = difference_set(W)
    dims = sorted(p.dim for p in D.parts)
    assert dims == [1, 1, 2]
    plane = next(p for p in D.parts if p.dim == 2)
    assert plane.same_span(Subspace(np.eye(3)[:, :2]))


def test_difference_set_generative_unsupported():
    net = GenerativeRange((np.eye(2),))
    with pytest.raises(UnsupportedClassError):
        difference_set(net)


def test_union_differences_lie_in_difference_set(rng):
    parts = tuple(Subspace(rng.standard_normal((6, 2))) for _ in range(3))
    W = UnionOfSubspaces(parts)
    D = difference_set(W)
    for _ in range(50):
        i, j = rng.integers(0, 3, 2)
        x = parts[i].onb @ rng.standard_normal(2) - parts[j].onb @ rng.standard_normal(2)
        assert min(norm(D.space, x - project(p, x)) for p in D.parts) < 1e-9


def test_generative_forward_examples():
    net = GenerativeRange((np.eye(2),))
    np.testing.assert_array_equal(generative_forward(net, np.array([1.0, -1.0])), [1.0, 0.0])
    net2 = GenerativeRange.random([2, 5, 7], np.random.default_rng(0))
    np.testing.assert_array_equal(generative_forward(net2, np.zeros(2)), np.zeros(7))


def test_generative_forward_matches_straight_line_oracle(rng):
    net = GenerativeRange.random([3, 6, 5, 9], rng)
    z = rng.standard_normal(3)
    h = list(z)
    for A in net.layers:
        h = [max(sum(A[r, c] * h[c] for c in range(len(h))), 0.0) for r in range(A.shape[0])]
    np.testing.assert_allclose(generative_forward(net, z), h, rtol=0, atol=1e-13)


def test_generative_batch_evaluation(rng):
    net = GenerativeRange.random([2, 4, 6], rng)
    Z = rng.standard_normal((2, 5))
    out = generative_forward(net, Z)
    for k in range(5):
        np.testing.assert_allclose(out[:, k], generative_forward(net, Z[:, k]))


def test_local_linear_map_reproduces_output(rng):
    net = GenerativeRange.random([2, 8, 8, 16], rng)
    z = rng.standard_normal(2)
    np.testing.assert_allclose(local_linear_map(net, z) @ z, generative_forward(net, z), atol=1e-12)


def test_local_linear_map_warns_on_boundary():
    net = GenerativeRange((np.array([[1.0, 0.0], [0.0, 1.0]]), np.array([[1.0, -1.0]])))
    with pytest.warns(RuntimeWarning):
        local_linear_map(net, np.array([1.0, 1.0]))


def test_activation_pattern_zero_inactive():
    net = GenerativeRange((np.array([[1.0, -1.0]]),))
    assert not activation_pattern(net, np.array([1.0, 1.0]))[0][0]


def test_pl_expansion_linear_net_is_column_space():
    A = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    net = GenerativeRange((A,))
    V = pl_expansion_sample(net, np.array([1.0, 1.0]), np.array([2.0, 3.0]))
    assert V.same_span(Subspace(A))


def test_pl_expansion_homogeneous_pair(rng):
    net = GenerativeRange.random([2, 6, 10], rng)
    z = rng.standard_normal(2)
    assert pl_expansion_sample(net, z, 2 * z).dim == 2
    with pytest.raises(ValueError):
        pl_expansion_sample(net, z, z)


def test_pl_expansion_contains_differences(rng):
    net = GenerativeRange.random([2, 4, 8], rng)
    for _ in range(100):
        z1, z2 = rng.standard_normal((2, 2))
        d = generative_forward(net, z1) - generative_forward(net, z2)
        try:
            V = pl_expansion_sample(net, z1, z2)
        except ValueError:
            # both pieces vanish, so both outputs are zero
            assert np.linalg.norm(d) == 0.0
            continue
        assert np.linalg.norm(d - project(V, d)) < 1e-9


def test_project_examples(rng):
    V = Subspace(rng.standard_normal((5, 2)))
    x = V.onb @ np.array([1.0, -2.0])
    np.testing.assert_allclose(project(V, x), x, atol=1e-12)
    C = SparseClass(np.eye(2), 1)
    np.testing.assert_array_equal(project(C, np.array([3.0, 1.0])), [3.0, 0.0])


def test_project_union_matches_per_part_oracle(rng):
    parts = tuple(Subspace(rng.standard_normal((6, 2))) for _ in range(2))
    W = UnionOfSubspaces(parts)
    for _ in range(20):
        x = rng.standard_normal(6)
        cands = [p.onb @ np.linalg.lstsq(p.onb, x, rcond=None)[0] for p in parts]
        best = min(cands, key=lambda u: np.linalg.norm(x - u))
        np.testing.assert_allclose(project(W, x), best, atol=1e-10)


def test_project_sparse_beats_random_members(rng):
    Psi = np.linalg.qr(rng.standard_normal((8, 8)))[0]
    C = SparseClass(Psi, 2)
    x = rng.standard_normal(8)
    d = np.linalg.norm(x - project(C, x))
    for _ in range(100):
        c = np.zeros(8)
        c[rng.choice(8, 2, replace=False)] = rng.standard_normal(2)
        assert d <= np.linalg.norm(x - Psi @ c) + 1e-12


def test_project_sparse_matches_exhaustive(rng):
    Psi = np.linalg.qr(rng.standard_normal((7, 7)))[0]
    C = SparseClass(Psi, 3)
    x = rng.standard_normal(7)
    best = min(np.linalg.norm(x - project(Subspace(Psi[:, list(S)]), x))
               for S in itertools.combinations(range(7), 3))
    assert np.linalg.norm(x - project(C, x)) == pytest.approx(best, abs=1e-12)


def test_sparse_class_validation():
    with pytest.raises(ValueError):
        SparseClass(np.eye(3), 0)
    with pytest.raises(ValueError):
        SparseClass(2 * np.eye(3), 1)


def test_class_from_json_kinds():
    V = class_from_json({"kind": "subspace", "basis": [[1, 0], [0, 1], [0, 0]]})
    assert V.dim == 2
    U = class_from_json({"kind": "union", "parts": [{"kind": "subspace", "basis": [[1], [0]]},
                                                    {"kind": "subspace", "basis": [[0], [1]]}]})
    assert U.d == 2
    L = class_from_json({"kind": "legendre", "n": 3, "nodes": 17})
    assert L.dim == 3 and L.ambient_dim == 17
    with pytest.raises(ValueError):
        class_from_json({"kind": "nope"})


@given(st.integers(0, 2 ** 31), st.floats(0, 50))
def test_generative_positive_homogeneity(seed, t):
    r = np.random.default_rng(seed)
    net = GenerativeRange.random([2, 5, 6], r)
    z = r.standard_normal(2)
    np.testing.assert_allclose(generative_forward(net, t * z), t * generative_forward(net, z),
                               rtol=1e-12, atol=1e-10)


@given(st.integers(1, 6), st.integers(1, 6))
def test_sparse_difference_sparsity(s, extra):
    p = s + extra - 1
    if s > p:
        return
    assert difference_set(SparseClass(np.eye(p), s)).s == min(2 * s, p)
