"""Variations, coherences, Christoffel functions and optimal sampling measures.

Continuous domains live on a quadrature grid, so every essential supremum
below is a maximum over grid nodes.
"""
from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass
from math import ceil, log
from typing import Optional, Sequence

import numpy as np

from .classes import (GenerativeRange, SparseClass, Subspace, UnionOfSubspaces,
                      UnsupportedClassError, class_tag, difference_set, generative_forward,
                      pl_expansion_sample)
from .hilbert import InnerProductSpace
from .sampling import (BlockSampler, PointwiseDensity, RowSampler,
                       SamplingFamily, _Distribution)

EXACT_SMALL_MAX_N = 16


@dataclass(frozen=True, eq=False)
class ChristoffelProfile:
    values: np.ndarray
    space: InnerProductSpace
    class_tag: str = ""

    @property
    def integral(self) -> float:
        return float(np.sum(self.space.weights * self.values))

    @property
    def maximum(self) -> float:
        return float(np.max(self.values))


@dataclass(frozen=True, eq=False)
class LocalCoherences:
    sigma: np.ndarray
    with_respect_to: str = ""
    estimator_kind: str = "exact"
    samples: int = 0

    @property
    def sq_norm(self) -> float:
        return float(np.sum(self.sigma ** 2))


@dataclass(frozen=True)
class VariationValue:
    phi: float
    set_tag: str = "S(V)"

    def __float__(self) -> float:
        return self.phi


# Christoffel functions and leverage scores

def christoffel_subspace(V: Subspace, space: Optional[InnerProductSpace] = None) -> ChristoffelProfile:
    """K(x_j) = sum_i |q_i(x_j)|^2 for an orthonormal basis q of V."""
    space = space or V.space
    if space.dim != V.ambient_dim:
        raise ValueError("subspace does not live on this grid")
    Q = V.onb
    return ChristoffelProfile(np.sum(np.abs(Q) ** 2, axis=1), space, class_tag(V))


def christoffel_union(W: UnionOfSubspaces, space: Optional[InnerProductSpace] = None) -> ChristoffelProfile:
    if not W.parts:
        raise ValueError("empty union")
    vals = np.max([christoffel_subspace(p, space).values for p in W.parts], axis=0)
    return ChristoffelProfile(vals, space or W.space, class_tag(W))


def christoffel_sparse_exact(C: SparseClass) -> ChristoffelProfile:
    """K of the s-sparse class: sum of the s largest |psi_i(x)|^2 at each node."""
    sq = np.sort(np.abs(C.dictionary) ** 2, axis=1)[:, ::-1]
    return ChristoffelProfile(sq[:, : C.s].sum(axis=1), C.space, class_tag(C))


def christoffel(cls, space: Optional[InnerProductSpace] = None) -> ChristoffelProfile:
    if isinstance(cls, Subspace):
        return christoffel_subspace(cls, space)
    if isinstance(cls, UnionOfSubspaces):
        return christoffel_union(cls, space)
    if isinstance(cls, SparseClass):
        return christoffel_sparse_exact(cls)
    raise UnsupportedClassError(f"no exact Christoffel function for {type(cls).__name__}")


def leverage_scores(X) -> np.ndarray:
    """tau_i = x_i^* (X^* X)^{-1} x_i, computed from a thin QR factorization."""
    X = np.asarray(X)
    if X.ndim != 2 or X.shape[0] < X.shape[1]:
        raise ValueError("X must be tall (N >= n)")
    Q, R = np.linalg.qr(X)
    s = np.linalg.svd(R, compute_uv=False)
    if s[-1] <= 1e-12 * max(1.0, s[0]):
        raise np.linalg.LinAlgError("X does not have full column rank")
    return np.sum(np.abs(Q) ** 2, axis=1)


def sparse_surrogate_profile(Psi, space: Optional[InnerProductSpace] = None) -> ChristoffelProfile:
    """max_i |psi_i(x)|^2; its grid integral is theta(Psi)."""
    Psi = np.asarray(Psi)
    if Psi.ndim == 1:
        Psi = Psi[:, None]
    space = space or InnerProductSpace.euclidean(Psi.shape[0])
    G = Psi.conj().T @ (space.weights[:, None] * Psi)
    if not np.allclose(G, np.eye(Psi.shape[1]), atol=1e-10):
        raise ValueError("dictionary must be orthonormal on the grid")
    return ChristoffelProfile(np.max(np.abs(Psi) ** 2, axis=1), space, f"surrogate(p={Psi.shape[1]})")


def christoffel_measure(profile: ChristoffelProfile, space: Optional[InnerProductSpace] = None) -> np.ndarray:
    """Density K / int K with respect to the grid weights; zero where K is zero."""
    space = space or profile.space
    total = float(np.sum(space.weights * profile.values))
    if total <= 0:
        raise ValueError("profile is identically zero")
    return profile.values / total


def christoffel_density(profile: ChristoffelProfile) -> PointwiseDensity:
    return PointwiseDensity(profile.space, christoffel_measure(profile))


# Coherences

def _row_atoms(dist: _Distribution) -> np.ndarray:
    probs, mats = dist.support
    if mats.shape[1] != 1:
        raise ValueError("coherence is defined for scalar-output (row) distributions")
    return mats[:, 0, :]


def coherence_distribution(dist: _Distribution) -> float:
    """Smallest bound on ||a||_inf^2 over the support."""
    rows = _row_atoms(dist)
    return float(np.max(np.abs(rows) ** 2))


def matrix_coherence(U) -> float:
    """N max_ij |u_ij|^2, in [1, N] for unitary U."""
    U = np.asarray(U)
    N = U.shape[0]
    if U.shape != (N, N) or not np.allclose(U.conj().T @ U, np.eye(N), atol=1e-10):
        raise ValueError("U must be unitary")
    return float(N * np.max(np.abs(U) ** 2))


def variation_sparse(dist: _Distribution, s: int, Psi=None) -> VariationValue:
    """Coherence-times-sparsity bound mu * s for s-sparse vectors.

    With a dictionary ``Psi`` the coherence is taken over the entries of a^* Psi.
    """
    if s < 1:
        raise ValueError("s must be >= 1")
    rows = _row_atoms(dist)
    if Psi is not None:
        rows = rows @ np.asarray(Psi)
    return VariationValue(float(np.max(np.abs(rows) ** 2)) * s, f"S(Sigma_{s})")


def variation_exact_small(dist: _Distribution, s: int, Psi=None) -> VariationValue:
    """Exact variation of the s-sparse sphere by enumerating supports (N <= 16)."""
    rows = _row_atoms(dist)
    if Psi is not None:
        rows = rows @ np.asarray(Psi)
    N = rows.shape[1]
    if N > EXACT_SMALL_MAX_N:
        raise ValueError(f"exhaustive variation limited to N <= {EXACT_SMALL_MAX_N}")
    sq = np.abs(rows) ** 2
    best = 0.0
    for S in itertools.combinations(range(N), min(s, N)):
        best = max(best, float(np.max(sq[:, list(S)].sum(axis=1))))
    return VariationValue(best, f"S(Sigma_{s})")


# Variation

def _variation_parts(parts: Sequence[Subspace], dist: _Distribution) -> float:
    """max over support atoms A and parts V of lambda_max(Q^* A^* A Q)."""
    probs, mats = dist.support
    best = 0.0
    for V in parts:
        Q = V.onb
        AQ = np.einsum("kpn,nj->kpj", mats, Q)
        if AQ.shape[1] == 1:
            val = np.max(np.sum(np.abs(AQ[:, 0, :]) ** 2, axis=1))
        else:
            val = max(np.linalg.norm(M, 2) ** 2 for M in AQ)
        best = max(best, float(val))
    return best


def variation(obj, dist) -> VariationValue:
    """Variation of the unit sphere of a class (or a profile) w.r.t. a distribution or family.

    Families take the maximum over their nonconstant members only.
    """
    if isinstance(dist, SamplingFamily):
        idx = dist.nonconstant_index_set
        seen: dict[int, float] = {}
        phi = 0.0
        for i in idx:
            d = dist.distributions[i]
            if id(d) not in seen:
                seen[id(d)] = variation(obj, d).phi
            phi = max(phi, seen[id(d)])
        return VariationValue(phi, _set_tag(obj))

    if isinstance(obj, ChristoffelProfile):
        if not isinstance(dist, PointwiseDensity):
            raise TypeError("a Christoffel profile pairs with a pointwise density")
        K, nu = obj.values, dist.density
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(K > 0, K / nu, 0.0)
        return VariationValue(float(np.max(ratio)), obj.class_tag)

    if isinstance(obj, LocalCoherences):
        if isinstance(dist, RowSampler):
            pi = dist.pi
        elif isinstance(dist, BlockSampler):
            pi = dist.pi
        else:
            raise TypeError("local coherences pair with a row or block sampler")
        sig2 = obj.sigma ** 2
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(sig2 > 0, sig2 / pi, 0.0)
        return VariationValue(float(np.max(ratio)), obj.with_respect_to)

    if isinstance(obj, Subspace):
        return VariationValue(_variation_parts([obj], dist), "S(V)")
    if isinstance(obj, UnionOfSubspaces):
        return VariationValue(_variation_parts(obj.parts, dist), "S(V)")
    if isinstance(obj, SparseClass):
        return variation_sparse(dist, obj.s, obj.dictionary)
    raise UnsupportedClassError(f"no variation route for {type(obj).__name__}")


def _set_tag(obj) -> str:
    return getattr(obj, "class_tag", None) or getattr(obj, "with_respect_to", None) or "S(V)"


def variation_with_hull(C: SparseClass, dist, sparsity: int | None = None) -> VariationValue:
    """Variation of S(Sigma_k) together with W = {+-sqrt(2s) psi_i, +-sqrt(2s) i psi_i}.

    ``sparsity`` is k (defaults to 2s, the difference set); the hull set is built from s.
    """
    k = 2 * C.s if sparsity is None else sparsity
    phi_sphere = variation(SparseClass(C.dictionary, min(k, C.p), C.space), dist).phi
    phi_hull = 2 * C.s * variation(SparseClass(C.dictionary, 1, C.space), dist).phi
    return VariationValue(max(phi_sphere, phi_hull), f"S(Sigma_{k}) u W")


# Optimal probabilities

def optimal_pi(sigma) -> np.ndarray:
    """pi_i = sigma_i^2 / ||sigma||^2."""
    sig = np.asarray(getattr(sigma, "sigma", sigma), dtype=float)
    tot = float(np.sum(sig ** 2))
    if tot <= 0:
        raise ValueError("local coherences are all zero")
    pi = sig ** 2 / tot
    if np.any(pi == 0):
        warnings.warn("some rows get probability zero; they are never sampled",
                      RuntimeWarning, stacklevel=2)
    return pi


def _bern_sum(sig2: np.ndarray, m: float, c: float) -> float:
    if c <= 0:
        return float(np.sum(np.where(sig2 > 0, 1.0 / m, 0.0)))
    return float(np.sum(np.minimum(1.0 / m, sig2 / c)))


def bernoulli_pi(sigma, m: float, max_iter: int = 200, tol: float = 1e-12) -> tuple[np.ndarray, float]:
    """pi_i = min{1/m, sigma_i^2 / c} with c solving sum_i pi_i = 1.

    The sum is nonincreasing in c, so bisection brackets the largest root.
    """
    sig = np.asarray(getattr(sigma, "sigma", sigma), dtype=float)
    sig2 = sig ** 2
    N = sig.size
    if m <= 0:
        raise ValueError("m must be positive")
    if m > N:
        raise ValueError(f"infeasible: m = {m} exceeds N = {N}")
    if np.count_nonzero(sig2) < m:
        raise ValueError("infeasible: fewer nonzero local coherences than m")
    hi = float(np.sum(sig2))
    lo = float(m * np.min(sig2[sig2 > 0]))
    # f(lo) = (#nonzero)/m >= 1 and f(hi) <= 1
    if _bern_sum(sig2, m, hi) >= 1.0:
        lo = hi
    for _ in range(max_iter):
        if hi - lo <= 1e-16 * hi:
            break
        mid = 0.5 * (lo + hi)
        if _bern_sum(sig2, m, mid) >= 1.0:
            lo = mid
        else:
            hi = mid
        if abs(_bern_sum(sig2, m, lo) - 1.0) <= tol and hi - lo <= 1e-14 * hi:
            break
    c = min((lo, hi), key=lambda cc: abs(_bern_sum(sig2, m, cc) - 1.0))
    pi = np.minimum(1.0 / m, sig2 / c)
    return pi, c


# Local coherences

def _rows(U) -> np.ndarray:
    return np.asarray(U)


def _subspace_coherences(U, parts: Sequence[Subspace]) -> np.ndarray:
    U = _rows(U)
    sig = np.zeros(U.shape[0])
    for V in parts:
        sig = np.maximum(sig, np.linalg.norm(U @ V.onb, axis=1))
    return sig


def _block_coherences(sampler: BlockSampler, parts: Sequence[Subspace]) -> np.ndarray:
    out = np.zeros(len(sampler.blocks))
    for i in range(len(sampler.blocks)):
        B = sampler.block_matrix(i, scaled=False)
        for V in parts:
            out[i] = max(out[i], np.linalg.norm(B @ V.onb, 2))
    return out


def _mc_pairs(net: GenerativeRange, samples: int, rng) -> np.ndarray:
    return rng.standard_normal((samples, 2, net.n_latent))


def local_coherences(U, cls, mode: str = "exact", samples: int = 1000, rng=None,
                     target: str = "difference", blocks: BlockSampler | None = None) -> LocalCoherences:
    """Local coherences sigma_i = sup |u_i^* v| over unit v in the class.

    ``U`` is a unitary (rows u_i^*).  For block sampling pass the BlockSampler as
    ``blocks``; sigma_i is then sqrt(sup_v sum_{j in P_i} |u_j^* v|^2 / r_j), so
    the variation is max sigma_i^2 / pi_i in both cases.

    Monte Carlo mode applies to a GenerativeRange: ``target='difference'``
    normalizes G(z1) - G(z2); ``target='expansion'`` uses the local piecewise
    linear expansions through (z1, z2).  Both are running maxima, i.e. lower
    estimates of the true supremum.
    """
    tag = class_tag(cls)
    if mode == "exact":
        if isinstance(cls, Subspace):
            parts = [cls]
        elif isinstance(cls, UnionOfSubspaces):
            parts = list(cls.parts)
        elif isinstance(cls, SparseClass):
            if blocks is not None:
                parts = list(cls.as_union().parts)
            else:
                coef = np.abs(_rows(U) @ cls.dictionary) ** 2
                top = np.sort(coef, axis=1)[:, ::-1][:, : cls.s]
                return LocalCoherences(np.sqrt(top.sum(axis=1)), tag, "exact")
        else:
            raise UnsupportedClassError("exact local coherences need a subspace, union or sparse class")
        sig = _block_coherences(blocks, parts) if blocks is not None else _subspace_coherences(U, parts)
        return LocalCoherences(sig, tag, "exact")

    if mode != "monte_carlo":
        raise ValueError(f"unknown mode {mode!r}")
    if not isinstance(cls, GenerativeRange):
        raise UnsupportedClassError("Monte Carlo local coherences are for generative ranges")
    rng = rng if rng is not None else np.random.default_rng(0)
    pairs = _mc_pairs(cls, samples, rng)
    sig = mc_coherence_trace(U, cls, pairs, target)[-1] if samples else np.zeros(np.asarray(U).shape[0])
    return LocalCoherences(sig, f"{target}:{tag}", "monte-carlo", samples)


def mc_coherence_trace(U, net: GenerativeRange, pairs, target: str = "difference") -> np.ndarray:
    """Running-max local coherence estimate after each latent pair (shape samples x N)."""
    U = _rows(U)
    cur = np.zeros(U.shape[0])
    trace = []
    for z1, z2 in pairs:
        if target == "difference":
            v = generative_forward(net, z1) - generative_forward(net, z2)
            nv = np.linalg.norm(v)
            if nv > 0:
                cur = np.maximum(cur, np.abs(U @ v) / nv)
        elif target == "expansion":
            try:
                V = pl_expansion_sample(net, z1, z2)
            except ValueError:
                trace.append(cur.copy())
                continue
            cur = np.maximum(cur, np.linalg.norm(U @ V.onb, axis=1))
        else:
            raise ValueError(f"unknown target {target!r}")
        trace.append(cur.copy())
    return np.asarray(trace)


# Ratios and sample-complexity evaluators

def gamma_ratio(cls=None, family=None, *, phi_u: float | None = None, phi_uu: float | None = None,
                phi_v: float | None = None) -> float:
    """min{Phi(S(V)), Phi(S(U'-U'))} / Phi(S(U')) for U' = U - U.

    Either pass the three variations directly or a class and family.  For a
    union of subspaces the cover V is U' itself.  For a sparse class the
    coherence bounds 2s mu and 4s mu are used and the cover term is omitted
    unless ``phi_v`` is given.
    """
    if cls is not None:
        if family is None:
            raise ValueError("a family is required with a class")
        if isinstance(cls, SparseClass):
            mu = variation(SparseClass(cls.dictionary, 1, cls.space), family).phi
            phi_u = 2 * cls.s * mu
            phi_uu = 4 * cls.s * mu
        elif isinstance(cls, (Subspace, UnionOfSubspaces)):
            Up = difference_set(cls)
            phi_u = variation(Up, family).phi
            phi_uu = variation(difference_set(Up), family).phi
            phi_v = phi_u if phi_v is None else phi_v
        else:
            raise UnsupportedClassError("gamma ratio needs an exact variation route")
    cands = [p for p in (phi_v, phi_uu) if p is not None]
    if not cands or phi_u is None:
        raise ValueError("need Phi(S(U')) and at least one of Phi(S(V)), Phi(S(U'-U'))")
    if phi_u <= 0:
        raise ZeroDivisionError("Phi(S(U')) is zero")
    return min(cands) / phi_u


def _check_eps(eps):
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")


def sample_complexity(condition: str, *, phi: float, n: int, d: int = 1, eps: float,
                      alpha: float = 1.0, constant: float = 1.0, gamma: float = 1.0,
                      regime: str = "direct", M: int | None = None,
                      phi_u_hull: float | None = None) -> int:
    """Evaluate a measurement condition m >= C * (...) and return its ceiling.

    regime 'direct': (a) phi = Phi(S(U')), uses gamma; (b) phi = Phi(S(U'-U'));
    (c) phi = Phi(S(V)).  regime 'hull' adds the hull set W of size M; phi is the
    variation over the corresponding set united with W, and condition (b)
    takes the log factor from ``phi_u_hull`` = Phi(S(U') u W) when given.
    """
    _check_eps(eps)
    if min(phi, n, d, alpha, constant) <= 0:
        raise ValueError("inputs must be positive")
    if regime == "direct":
        if condition == "a":
            val = phi * (log(2 * d / eps) + n * log(2 * gamma))
        elif condition == "b":
            val = phi * (log(2 * d / eps) + n)
        elif condition == "c":
            val = phi * log(2 * n * d / eps)
        else:
            raise ValueError(f"unknown condition {condition!r}")
    elif regime == "hull":
        if M is None or M < 1:
            raise ValueError("the hull regime needs the hull size M")
        loglog = log(2 * M) * log(log(2 * d) + n) ** 2
        if condition == "a":
            L = log(2 * phi / alpha) * (log(2 * gamma) + loglog) + log(1 / eps)
        elif condition == "b":
            L = log(2 * (phi_u_hull or phi) / alpha) * loglog + log(1 / eps)
        elif condition == "c":
            L = log(2 * phi / alpha) * loglog + log(1 / eps)
        else:
            raise ValueError(f"unknown condition {condition!r}")
        val = phi * L
    else:
        raise ValueError(f"unknown regime {regime!r}")
    return int(ceil(constant * val / alpha - 1e-9))


def sparse_cs_bound(mu: float, s: int, N: int, eps: float, constant: float = 1.0) -> int:
    """C mu s (log(2 s mu) log^2(s log(N/s)) log N + log(1/eps)) for s-sparse vectors."""
    _check_eps(eps)
    if not 1 <= s < N:
        raise ValueError("need 1 <= s < N")
    val = mu * s * (log(2 * s * mu) * log(s * log(N / s)) ** 2 * log(N) + log(1 / eps))
    return int(ceil(constant * val - 1e-9))
