import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import random_unitary
from varsamp.bases import legendre_sparse_class, legendre_subspace, unitary
from varsamp.classes import GenerativeRange, SparseClass, Subspace, UnionOfSubspaces
from varsamp.hilbert import InnerProductSpace
from varsamp.sampling import BlockSampler, PointwiseDensity, RowSampler, SamplingFamily, build_half_half
from varsamp.variation import (bernoulli_pi, christoffel,
                               christoffel_density, christoffel_measure, gamma_ratio,
                               leverage_scores, local_coherences, matrix_coherence,
                               mc_coherence_trace, optimal_pi, sample_complexity,
                               sparse_cs_bound, sparse_surrogate_profile, variation,
                               variation_exact_small, variation_sparse, variation_with_hull)


def _random_density(space, rng):
    nu = rng.gamma(0.5, size=space.dim) + 1e-3
    return PointwiseDensity(space, nu / np.sum(nu * space.weights))


# Christoffel functions

def test_christoffel_linear_legendre():
    space = InnerProductSpace.uniform_grid(2049)
    prof = christoffel(legendre_subspace(2, space))
    x = np.linspace(-1, 1, 2049)
    np.testing.assert_allclose(prof.values, 1 + 3 * x ** 2, atol=2e-3)
    assert prof.integral == pytest.approx(2.0, abs=1e-12)
    assert variation(prof, PointwiseDensity.uniform(space)).phi == pytest.approx(4.0, abs=5e-3)
    opt = christoffel_density(prof)
    assert variation(prof, opt).phi == pytest.approx(2.0, abs=1e-10)


@given(st.integers(1, 12), st.integers(0, 2 ** 31))
def test_christoffel_integral_is_dimension(n, seed):
    space = InnerProductSpace(np.random.default_rng(seed).uniform(0.1, 1.0, 20))
    B = np.random.default_rng(seed + 1).standard_normal((20, n))
    assert christoffel(Subspace(B, space)).integral == pytest.approx(n, abs=1e-9)


def test_christoffel_optimal_density_beats_random(rng, grid33):
    prof = christoffel(legendre_subspace(5, grid33))
    phi_star = variation(prof, christoffel_density(prof)).phi
    assert phi_star == pytest.approx(prof.integral, abs=1e-10)
    for _ in range(20):
        assert phi_star <= variation(prof, _random_density(grid33, rng)).phi + 1e-10


def test_christoffel_union_and_measure(grid33):
    V1, V2 = legendre_subspace(2, grid33), legendre_subspace(4, grid33)
    K = christoffel(UnionOfSubspaces((V1, V2)))
    np.testing.assert_allclose(K.values, christoffel(V2).values, atol=1e-12)
    mu = christoffel_measure(K)
    assert np.sum(mu * grid33.weights) == pytest.approx(1.0)


def test_christoffel_sparse_top_s(grid33):
    C = legendre_sparse_class(6, 2, grid33)
    K = christoffel(C)
    sq = np.sort(np.abs(C.dictionary) ** 2, axis=1)
    np.testing.assert_allclose(K.values, sq[:, -1] + sq[:, -2])


def test_surrogate_profile_requires_orthonormal():
    with pytest.raises(ValueError):
        sparse_surrogate_profile(np.ones((4, 2)))
    prof = sparse_surrogate_profile(unitary("dct", 8))
    assert prof.maximum == pytest.approx(np.max(unitary("dct", 8) ** 2))


def test_zero_density_gives_infinite_variation(grid33):
    prof = christoffel(legendre_subspace(3, grid33))
    nu = np.zeros(33)
    nu[:20] = 1.0
    nu /= np.sum(nu * grid33.weights)
    with np.errstate(divide="ignore"):
        assert variation(prof, PointwiseDensity(grid33, nu)).phi == np.inf


# Leverage scores

@given(st.integers(0, 2 ** 31))
def test_leverage_scores_sum_and_range(seed):
    X = np.random.default_rng(seed).standard_normal((40, 5))
    tau = leverage_scores(X)
    assert tau.sum() == pytest.approx(5, abs=1e-9)
    assert np.all(tau >= -1e-12) and np.all(tau <= 1 + 1e-12)


def test_leverage_scores_match_hat_matrix(rng):
    X = rng.standard_normal((30, 4))
    H = X @ np.linalg.solve(X.T @ X, X.T)
    np.testing.assert_allclose(leverage_scores(X), np.diag(H), atol=1e-12)


def test_leverage_scores_rank_deficient(rng):
    X = rng.standard_normal((10, 3))
    X[:, 2] = X[:, 0]
    with pytest.raises(np.linalg.LinAlgError):
        leverage_scores(X)
    with pytest.raises(ValueError):
        leverage_scores(np.ones((2, 3)))


# Coherence and sparse variation

def test_matrix_coherence_examples():
    assert matrix_coherence(np.eye(8)) == pytest.approx(8)
    assert matrix_coherence(unitary("dft", 8)) == pytest.approx(1)
    with pytest.raises(ValueError):
        matrix_coherence(np.ones((3, 3)))


def test_flat_dft_sparse_variation():
    d = RowSampler.uniform(unitary("dft", 8))
    assert variation_sparse(d, 3).phi == pytest.approx(3.0, abs=1e-12)
    assert variation_exact_small(d, 3).phi == pytest.approx(3.0, abs=1e-12)


@given(st.integers(4, 10), st.integers(1, 3), st.integers(0, 2 ** 31))
def test_exact_sparse_variation_below_mu_s(N, s, seed):
    r = np.random.default_rng(seed)
    pi = r.dirichlet(np.ones(N))
    d = RowSampler(random_unitary(N, r), pi)
    assert variation_exact_small(d, s).phi <= variation_sparse(d, s).phi + 1e-10


def test_exact_small_matches_class_route(rng):
    N, s = 8, 2
    U = random_unitary(N, rng)
    d = RowSampler(U, rng.dirichlet(np.ones(N)))
    C = SparseClass(np.eye(N), s)
    assert variation(C.as_union(), d).phi == pytest.approx(variation_exact_small(d, s).phi, rel=1e-10)


def test_variation_with_hull_dominates(rng):
    d = RowSampler.uniform(unitary("dct", 8))
    C = SparseClass(np.eye(8), 2)
    assert variation_with_hull(C, d).phi >= variation_sparse(d, 4).phi - 1e-12


# Family variation

def test_family_variation_ignores_constant_members(rng):
    U = random_unitary(10, rng)
    fam = build_half_half(U, 4, 10)
    V = Subspace(np.eye(10)[:, :2])
    phi = variation(V, fam).phi
    lone = variation(V, fam.distributions[-1]).phi
    assert phi == pytest.approx(lone)
    assert variation(V, build_half_half(U, 10, 10)).phi == 0.0


def test_subspace_variation_row_sampler(rng):
    N = 9
    U = random_unitary(N, rng)
    pi = rng.dirichlet(np.ones(N))
    V = Subspace(rng.standard_normal((N, 3)))
    expect = np.max(np.linalg.norm(U @ V.onb, axis=1) ** 2 / pi)
    assert variation(V, RowSampler(U, pi)).phi == pytest.approx(expect, rel=1e-10)
    sig = local_coherences(U, V)
    assert variation(sig, RowSampler(U, pi)).phi == pytest.approx(expect, rel=1e-10)


# Local coherences and optimal probabilities

@given(st.integers(3, 12), st.integers(0, 2 ** 31))
def test_optimal_pi_attains_sq_norm(N, seed):
    r = np.random.default_rng(seed)
    U = random_unitary(N, r)
    V = Subspace(r.standard_normal((N, 2)))
    sig = local_coherences(U, V)
    pi = optimal_pi(sig)
    phi = variation(sig, RowSampler(U, pi)).phi
    assert phi == pytest.approx(sig.sq_norm, rel=1e-10)
    other = r.dirichlet(np.ones(N))
    assert phi <= variation(sig, RowSampler(U, other)).phi + 1e-10


def test_local_coherences_subspace_sum_is_dimension(rng):
    U = random_unitary(12, rng)
    V = Subspace(rng.standard_normal((12, 4)))
    assert local_coherences(U, V).sq_norm == pytest.approx(4.0, abs=1e-10)


def test_local_coherences_sparse_top_s(rng):
    U = unitary("dct", 8)
    C = SparseClass(np.eye(8), 2)
    sig = local_coherences(U, C).sigma
    ex = local_coherences(U, C.as_union()).sigma
    np.testing.assert_allclose(sig, ex, atol=1e-12)


def test_block_coherences_single_rows_reduce_to_rows(rng):
    N = 6
    U = random_unitary(N, rng)
    V = Subspace(rng.standard_normal((N, 2)))
    blocks = BlockSampler(U, [(i,) for i in range(N)], np.full(N, 1 / N))
    np.testing.assert_allclose(local_coherences(U, V, blocks=blocks).sigma,
                               local_coherences(U, V).sigma, atol=1e-12)


def test_optimal_pi_warns_on_zero():
    with pytest.warns(RuntimeWarning):
        optimal_pi(np.array([1.0, 0.0, 1.0]))
    with pytest.raises(ValueError):
        optimal_pi(np.zeros(3))


def test_bernoulli_pi_example():
    pi, c = bernoulli_pi(np.sqrt([0.5, 0.3, 0.1, 0.1]), 2)
    np.testing.assert_allclose(pi, [0.5, 0.3, 0.1, 0.1], atol=1e-12)
    assert c == pytest.approx(1.0, abs=1e-10)


def test_bernoulli_pi_flat():
    N, m, s2 = 10, 3, 0.4
    pi, c = bernoulli_pi(np.full(N, np.sqrt(s2)), m)
    assert c == pytest.approx(N * s2, rel=1e-10)
    np.testing.assert_allclose(pi, 1 / N)


@given(st.integers(2, 30), st.integers(0, 2 ** 31))
def test_bernoulli_pi_properties(N, seed):
    r = np.random.default_rng(seed)
    sig = r.exponential(size=N)
    m = int(r.integers(1, N + 1))
    pi, c = bernoulli_pi(sig, m)
    assert pi.sum() == pytest.approx(1.0, abs=1e-9)
    assert np.all(pi <= 1 / m + 1e-15) and c > 0


def test_bernoulli_pi_infeasible():
    with pytest.raises(ValueError):
        bernoulli_pi(np.ones(3), 4)
    with pytest.raises(ValueError):
        bernoulli_pi(np.array([1.0, 0.0, 0.0]), 2)


# Monte Carlo traces

def test_mc_trace_monotone_and_below_expansion(rng):
    net = GenerativeRange.random([2, 6, 16], rng)
    U = unitary("dft", 16)
    pairs = rng.standard_normal((200, 2, 2))
    diff = mc_coherence_trace(U, net, pairs, "difference")
    exp = mc_coherence_trace(U, net, pairs, "expansion")
    assert np.all(np.diff(diff, axis=0) >= 0)
    assert np.all(diff <= exp + 1e-10)
    lc = local_coherences(U, net, "monte_carlo", samples=50, rng=np.random.default_rng(1))
    assert lc.estimator_kind == "monte-carlo" and lc.samples == 50


# Ratios and bounds

def test_gamma_ratio_sparse_is_two():
    fam = SamplingFamily.repeat(RowSampler.uniform(unitary("dct", 8)), 4)
    assert gamma_ratio(SparseClass(np.eye(8), 2), fam) == pytest.approx(2.0)


def test_gamma_ratio_subspace_is_one(rng):
    fam = SamplingFamily.repeat(RowSampler.uniform(unitary("dct", 8)), 4)
    assert gamma_ratio(Subspace(rng.standard_normal((8, 2))), fam) == pytest.approx(1.0)
    assert gamma_ratio(phi_u=2.0, phi_uu=3.0, phi_v=1.0) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        gamma_ratio(phi_u=2.0)


def test_sample_complexity_monotone():
    base = dict(n=5, eps=0.05)
    a = sample_complexity("c", phi=10, **base)
    b = sample_complexity("c", phi=20, **base)
    assert b >= a > 0
    assert sample_complexity("c", phi=10, constant=2, **base) >= 2 * a - 1
    assert sample_complexity("b", phi=10, regime="hull", M=8, **base) > 0
    with pytest.raises(ValueError):
        sample_complexity("b", phi=10, regime="hull", **base)
    with pytest.raises(ValueError):
        sample_complexity("c", phi=10, n=5, eps=1.5)


def test_sparse_cs_bound_positive():
    assert sparse_cs_bound(1.0, 3, 64, 0.1) > 0
    with pytest.raises(ValueError):
        sparse_cs_bound(1.0, 64, 64, 0.1)
