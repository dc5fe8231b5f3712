"""Distributions of sampling operators, families of them, and noisy measurements.

Every distribution here has finite support, so expectations are computed
exactly by summing over the support.  An operator is stored as a p x N matrix
acting on coefficient vectors with all importance scalings already applied.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Sequence

import numpy as np

from .hilbert import InnerProductSpace

PROB_TOL = 1e-12
UNITARY_TOL = 1e-10
DEGENERATE_TOL = 1e-12


class DegenerateFamilyError(ValueError):
    pass


def rng_for(seed: int, *keys: int) -> np.random.Generator:
    """Independent stream for (seed, *keys); identical inputs give identical streams."""
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in keys)))


def _check_probs(pi, allow_zero: bool = True) -> np.ndarray:
    pi = np.asarray(pi, dtype=float).ravel()
    if pi.size == 0 or not np.all(np.isfinite(pi)):
        raise ValueError("probability vector must be finite and non-empty")
    if np.any(pi < 0) or (not allow_zero and np.any(pi == 0)):
        raise ValueError("probabilities must be positive")
    if abs(pi.sum() - 1.0) > PROB_TOL * max(1.0, np.sqrt(pi.size)):
        raise ValueError(f"probabilities must sum to 1 (got {pi.sum()!r})")
    return pi / pi.sum()


def _check_unitary(U) -> np.ndarray:
    U = np.asarray(U)
    if U.ndim != 2 or U.shape[0] != U.shape[1]:
        raise ValueError("U must be square")
    if not np.allclose(U.conj().T @ U, np.eye(U.shape[0]), atol=UNITARY_TOL):
        raise ValueError("U is not unitary")
    return U


@dataclass(frozen=True, eq=False)
class SamplingOperator:
    matrix: np.ndarray
    index: int = -1

    @property
    def out_dim(self) -> int:
        return self.matrix.shape[0]

    def __call__(self, x):
        return self.matrix @ x


@dataclass(frozen=True, eq=False)
class Measurement:
    operator: SamplingOperator
    observation: np.ndarray
    noise: np.ndarray


class _Distribution:
    """Finite discrete distribution over p x N operators.

    Subclasses provide ``_support`` returning (probs, mats) with mats of shape
    (K, p, N); zero-probability atoms are removed.
    """

    @cached_property
    def support(self) -> tuple[np.ndarray, np.ndarray]:
        probs, mats = self._support()
        keep = probs > 0
        probs, mats = probs[keep], mats[keep]
        probs.setflags(write=False)
        mats.setflags(write=False)
        return probs, mats

    @cached_property
    def atom_ids(self) -> np.ndarray:
        """Original atom labels of the retained support (row or node indices)."""
        probs, _ = self._support()
        return np.flatnonzero(probs > 0)

    @property
    def is_constant(self) -> bool:
        return self.support[0].size == 1

    @property
    def out_dim(self) -> int:
        return self.support[1].shape[1]

    @property
    def dim(self) -> int:
        return self.support[1].shape[2]

    def expected_gram(self) -> np.ndarray:
        probs, mats = self.support
        F = (np.sqrt(probs)[:, None, None] * mats).reshape(-1, mats.shape[2])
        return F.conj().T @ F

    def draw_indices(self, rng: np.random.Generator, k: int) -> np.ndarray:
        probs, _ = self.support
        if probs.size == 1:
            return np.zeros(k, dtype=int)
        return rng.choice(probs.size, size=k, p=probs)

    def draw(self, rng: np.random.Generator) -> SamplingOperator:
        i = int(self.draw_indices(rng, 1)[0])
        return SamplingOperator(self.support[1][i], int(self.atom_ids[i]))

    def scaled(self, c: float) -> "FiniteRowDiscrete":
        probs, mats = self.support
        return FiniteRowDiscrete(mats * c, probs)


@dataclass(frozen=True, eq=False)
class PointwiseDensity(_Distribution):
    """Point evaluation at a grid node drawn with probability nu_j w_j, scaled by 1/sqrt(nu_j)."""

    space: InnerProductSpace
    density: np.ndarray

    def __post_init__(self):
        nu = np.asarray(self.density, dtype=float).ravel()
        self.space.check(nu)
        if np.any(nu < 0) or not np.all(np.isfinite(nu)):
            raise ValueError("density must be finite and nonnegative")
        mass = float(np.sum(nu * self.space.weights))
        if abs(mass - 1.0) > 1e-9:
            raise ValueError(f"density must integrate to 1 against the grid weights (got {mass!r})")
        object.__setattr__(self, "density", nu)

    @classmethod
    def uniform(cls, space: InnerProductSpace) -> "PointwiseDensity":
        return cls(space, np.full(space.dim, 1.0 / space.weights.sum()))

    def _support(self):
        N = self.space.dim
        nu = self.density
        probs = nu * self.space.weights
        probs = probs / probs.sum()
        mats = np.zeros((N, 1, N))
        pos = nu > 0
        mats[np.arange(N), 0, np.arange(N)] = np.where(pos, 1.0 / np.sqrt(np.where(pos, nu, 1.0)), 0.0)
        return probs, mats


@dataclass(frozen=True, eq=False)
class RowSampler(_Distribution):
    """Row i of a unitary U, scaled by 1/sqrt(pi_i), drawn with probability pi_i."""

    U: np.ndarray
    pi: np.ndarray

    def __post_init__(self):
        U = _check_unitary(self.U)
        pi = _check_probs(self.pi)
        if pi.size != U.shape[0]:
            raise ValueError("pi must have one entry per row of U")
        object.__setattr__(self, "U", U)
        object.__setattr__(self, "pi", pi)

    @classmethod
    def uniform(cls, U) -> "RowSampler":
        N = np.asarray(U).shape[0]
        return cls(U, np.full(N, 1.0 / N))

    def _support(self):
        pi = self.pi
        safe = np.where(pi > 0, pi, 1.0)
        mats = (self.U / np.sqrt(safe)[:, None])[:, None, :]
        return pi.copy(), mats


@dataclass(frozen=True, eq=False)
class BernoulliRow(_Distribution):
    """Coin flip for row i: sqrt(N/(m pi_i)) u_i^* with probability m pi_i, else zero."""

    U: np.ndarray
    pi: np.ndarray
    m: float
    row: int

    def _support(self):
        N = self.U.shape[0]
        q = self.m * self.pi[self.row]
        a = np.sqrt(N / q) * self.U[self.row] if q > 0 else np.zeros_like(self.U[self.row])
        if abs(q - 1.0) <= PROB_TOL:
            return np.array([1.0]), a[None, None, :]
        mats = np.stack([a, np.zeros_like(a)])[:, None, :]
        return np.array([q, 1.0 - q]), mats

    @cached_property
    def atom_ids(self) -> np.ndarray:
        # 1 = row selected, 0 = row skipped
        probs, _ = self._support()
        return 1 - np.flatnonzero(probs > 0)


@dataclass(frozen=True, eq=False)
class BlockSampler(_Distribution):
    """Block of rows of U (overlaps divided by sqrt(r_j)), scaled by 1/sqrt(pi_i), zero-padded."""

    U: np.ndarray
    blocks: tuple
    pi: np.ndarray

    def __post_init__(self):
        U = _check_unitary(self.U)
        blocks = tuple(tuple(int(j) for j in b) for b in self.blocks)
        pi = _check_probs(self.pi)
        if pi.size != len(blocks):
            raise ValueError("pi must have one entry per block")
        N = U.shape[0]
        r = np.zeros(N, dtype=int)
        for b in blocks:
            if not b:
                raise ValueError("empty block")
            r[list(b)] += 1
        if np.any(r == 0):
            raise ValueError("blocks must cover every row of U")
        object.__setattr__(self, "U", U)
        object.__setattr__(self, "blocks", blocks)
        object.__setattr__(self, "pi", pi)

    @cached_property
    def multiplicity(self) -> np.ndarray:
        r = np.zeros(self.U.shape[0], dtype=int)
        for b in self.blocks:
            r[list(b)] += 1
        return r

    def block_matrix(self, i: int, scaled: bool = True) -> np.ndarray:
        b = list(self.blocks[i])
        p = max(len(bb) for bb in self.blocks)
        M = np.zeros((p, self.U.shape[1]), dtype=self.U.dtype)
        M[: len(b)] = self.U[b] / np.sqrt(self.multiplicity[b])[:, None]
        if scaled:
            M = M / np.sqrt(self.pi[i])
        return M

    def _support(self):
        pi = self.pi
        mats = np.stack([self.block_matrix(i, scaled=False) for i in range(len(self.blocks))])
        safe = np.where(pi > 0, pi, 1.0)
        return pi.copy(), mats / np.sqrt(safe)[:, None, None]


@dataclass(frozen=True, eq=False)
class ConstantOp(_Distribution):
    op: np.ndarray

    def __post_init__(self):
        op = np.atleast_2d(np.asarray(self.op))
        if not np.all(np.isfinite(op)):
            raise ValueError("operator entries must be finite")
        object.__setattr__(self, "op", op)

    def _support(self):
        return np.array([1.0]), self.op[None]


@dataclass(frozen=True, eq=False)
class FiniteRowDiscrete(_Distribution):
    """General finite family: atoms given as rows (K x N) or operators (K x p x N)."""

    atoms: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        A = np.asarray(self.atoms)
        if A.ndim == 2:
            A = A[:, None, :]
        if A.ndim != 3:
            raise ValueError("atoms must be K x N rows or K x p x N operators")
        probs = _check_probs(self.probs)
        if probs.size != A.shape[0]:
            raise ValueError("one probability per atom required")
        object.__setattr__(self, "atoms", A)
        object.__setattr__(self, "probs", probs)

    def _support(self):
        return self.probs.copy(), self.atoms


SamplingDistribution = _Distribution


@dataclass(frozen=True, eq=False)
class SamplingFamily:
    distributions: tuple

    def __post_init__(self):
        dists = tuple(self.distributions)
        if not dists:
            raise ValueError("a family needs at least one distribution")
        N = dists[0].dim
        if any(d.dim != N for d in dists):
            raise ValueError("all distributions must act on the same space")
        object.__setattr__(self, "distributions", dists)

    @classmethod
    def repeat(cls, dist: _Distribution, m: int) -> "SamplingFamily":
        if m < 1:
            raise ValueError("m must be >= 1")
        return cls((dist,) * int(m))

    @property
    def size(self) -> int:
        return len(self.distributions)

    @property
    def dim(self) -> int:
        return self.distributions[0].dim

    @property
    def nonconstant_index_set(self) -> list[int]:
        return [i for i, d in enumerate(self.distributions) if not d.is_constant]

    def groups(self) -> list[tuple[_Distribution, int]]:
        """Runs of consecutive identical distribution objects."""
        out: list[list] = []
        for d in self.distributions:
            if out and out[-1][0] is d:
                out[-1][1] += 1
            else:
                out.append([d, 1])
        return [(d, k) for d, k in out]

    def expected_gram(self) -> np.ndarray:
        """(1/m) sum_i E[A_i^* A_i], exact."""
        cache: dict[int, np.ndarray] = {}
        total = None
        for d, k in self.groups():
            G = cache.get(id(d))
            if G is None:
                G = cache[id(d)] = d.expected_gram()
            total = k * G if total is None else total + k * G
        return total / self.size

    def draw(self, rng: np.random.Generator) -> list[SamplingOperator]:
        ops: list[SamplingOperator] = []
        for d, k in self.groups():
            idx = d.draw_indices(rng, k)
            mats = d.support[1]
            ids = d.atom_ids
            ops.extend(SamplingOperator(mats[i], int(ids[i])) for i in idx)
        return ops

    def scaled(self, c: float) -> "SamplingFamily":
        return SamplingFamily(tuple(d.scaled(c) for d in self.distributions))


def draw(dist: _Distribution, rng: np.random.Generator) -> SamplingOperator:
    return dist.draw(rng)


def expected_gram(family: SamplingFamily) -> np.ndarray:
    return family.expected_gram()


def _relative_gram(M: np.ndarray, space: Optional[InnerProductSpace], restrict_to=None) -> np.ndarray:
    if restrict_to is not None:
        Q = restrict_to.onb
        C = Q.conj().T @ M @ Q
    elif space is None:
        C = M
    else:
        s = 1.0 / space.sqrt_weights
        C = s[:, None] * M * s[None, :]
    return (C + C.conj().T) / 2


def nondegeneracy_constants(family: SamplingFamily, restrict_to=None,
                            space: Optional[InnerProductSpace] = None) -> tuple[float, float]:
    """Extreme eigenvalues of the expected Gram relative to the ambient inner product.

    With ``restrict_to`` (a Subspace) the Gram is compressed to that subspace.
    """
    if restrict_to is not None:
        space = restrict_to.space
    ev = np.linalg.eigvalsh(_relative_gram(family.expected_gram(), space, restrict_to))
    alpha, beta = float(ev[0]), float(ev[-1])
    if alpha <= DEGENERATE_TOL:
        raise DegenerateFamilyError(f"family is degenerate (alpha = {alpha:.3g})")
    return alpha, beta


def measure(op: SamplingOperator, x, noise=None) -> Measurement:
    x = np.asarray(x)
    if x.shape[0] != op.matrix.shape[1]:
        raise ValueError("operator and target dimensions differ")
    clean = op.matrix @ x
    if noise is None:
        noise = np.zeros_like(clean)
    noise = np.asarray(noise)
    if noise.shape != clean.shape:
        raise ValueError(f"noise shape {noise.shape} does not match output shape {clean.shape}")
    return Measurement(op, clean + noise, noise)


def measure_all(ops: Sequence[SamplingOperator], x, noises=None) -> list[Measurement]:
    if noises is None:
        noises = [None] * len(ops)
    return [measure(op, x, e) for op, e in zip(ops, noises)]


def stack_operators(ops: Sequence[SamplingOperator]) -> np.ndarray:
    """Stacked operator (1/sqrt(m)) [A_1; ...; A_m]."""
    if not ops:
        raise ValueError("no operators")
    return np.concatenate([op.matrix for op in ops], axis=0) / np.sqrt(len(ops))


def stack_measurements(meas: Sequence[Measurement]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Stacked operator, observation and noise, each scaled by 1/sqrt(m)."""
    A = stack_operators([mm.operator for mm in meas])
    s = 1.0 / np.sqrt(len(meas))
    b = np.concatenate([mm.observation for mm in meas]) * s
    e = np.concatenate([mm.noise for mm in meas]) * s
    return A, b, e


def build_half_half(U, m1: int, m: int, pi_tail=None) -> SamplingFamily:
    """First m1 rows always taken (scaled sqrt(m)); the rest drawn from rows m1.. by pi_tail."""
    U = _check_unitary(U)
    N = U.shape[0]
    if not (0 <= m1 <= m) or m1 > N or m < 1:
        raise ValueError(f"invalid split m1={m1}, m={m}, N={N}")
    dists: list[_Distribution] = [ConstantOp(np.sqrt(m) * U[i][None, :]) for i in range(m1)]
    m2 = m - m1
    if m2:
        if m1 >= N:
            raise ValueError("no rows left for the random part")
        tail = np.full(N - m1, 1.0 / (N - m1)) if pi_tail is None else _check_probs(pi_tail)
        if tail.size != N - m1:
            raise ValueError("pi_tail must cover rows m1..N-1")
        safe = np.where(tail > 0, tail, 1.0)
        rows = U[m1:] * np.sqrt(m / (m2 * safe))[:, None]
        probs = np.concatenate([np.zeros(m1), tail])
        atoms = np.concatenate([np.zeros((m1, N), dtype=rows.dtype), rows])
        dists.extend([FiniteRowDiscrete(atoms, probs)] * m2)
    return SamplingFamily(tuple(dists))


def build_bernoulli_family(U, pi, m: float) -> SamplingFamily:
    """One selector per row of U.

    Rows with pi_i = 0 are never taken; the family is then isotropic only on
    vectors orthogonal to those rows.
    """
    U = _check_unitary(U)
    pi = _check_probs(pi)
    N = U.shape[0]
    if pi.size != N:
        raise ValueError("pi must have one entry per row")
    if np.any(pi > 1.0 / m + PROB_TOL):
        raise ValueError("Bernoulli selectors need pi_i <= 1/m for every i")
    return SamplingFamily(tuple(BernoulliRow(U, pi, m, i) for i in range(N)))


def bernoulli_count(ops: Sequence[SamplingOperator]) -> int:
    """Number of rows actually selected in a Bernoulli draw."""
    return int(sum(1 for op in ops if op.index == 1))


def make_noise(kind: str, ops: Sequence[SamplingOperator], rng: np.random.Generator,
               level: float = 0.0, dtype=float) -> list[np.ndarray]:
    """Per-operator noise: 'zero', 'gaussian' (std ``level``) or 'constant_norm' (||e_i|| = level)."""
    out = []
    for op in ops:
        p = op.out_dim
        if kind == "zero" or level == 0:
            e = np.zeros(p, dtype=dtype)
        elif kind == "gaussian":
            e = level * rng.standard_normal(p)
            if np.issubdtype(np.dtype(dtype), np.complexfloating):
                e = (e + 1j * level * rng.standard_normal(p)) / np.sqrt(2)
        elif kind == "constant_norm":
            e = rng.standard_normal(p)
            e = level * e / np.linalg.norm(e)
        else:
            raise ValueError(f"unknown noise kind {kind!r}")
        out.append(e)
    return out
