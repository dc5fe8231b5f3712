"""Empirical nondegeneracy, deviation from expectation, tiny-scale RIP and bound checks."""
from __future__ import annotations

import itertools
from dataclasses import asdict, dataclass
from math import ceil, log
from typing import Optional

import numpy as np
from statsmodels.stats.proportion import proportion_confint

from .classes import (SparseClass, Subspace, UnionOfSubspaces, class_tag, difference_set,
                      project)
from .hilbert import norm
from .sampling import DEGENERATE_TOL, DegenerateFamilyError, SamplingFamily, stack_operators

EIG_FLOOR = 1e-12
RIP_GUARD = 10 ** 4


@dataclass
class NondegeneracyReport:
    alpha_emp: float
    beta_emp: float
    delta_U: float
    class_tag: str = ""
    m_used: int = 0
    seed: Optional[int] = None

    def to_row(self) -> dict:
        return asdict(self)


def _stack(ops) -> np.ndarray:
    if isinstance(ops, np.ndarray):
        return ops
    return stack_operators(list(ops))


def _parts(cls) -> list[Subspace]:
    if isinstance(cls, Subspace):
        return [cls]
    if isinstance(cls, UnionOfSubspaces):
        return list(cls.parts)
    if isinstance(cls, SparseClass):
        return list(cls.as_union().parts)
    raise TypeError(f"expected a subspace or union, got {type(cls).__name__}")


def _compressed_eigs(A: np.ndarray, V: Subspace) -> np.ndarray:
    AQ = A @ V.onb
    if AQ.shape[0] == 0:
        return np.zeros(V.dim)
    s = np.linalg.svd(AQ, compute_uv=False)
    ev = np.zeros(V.dim)
    ev[: s.size] = s ** 2
    return np.sort(ev)


def empirical_nondegeneracy(ops, V: Subspace) -> tuple[float, float]:
    """Tight (alpha', beta') with alpha'||v||^2 <= ||A_bar v||^2 <= beta'||v||^2 on V."""
    ev = _compressed_eigs(_stack(ops), V)
    return float(ev[0]), float(ev[-1])


def empirical_nondegeneracy_union(ops, W, difference: bool = False) -> tuple[float, float]:
    """Minimum alpha' and maximum beta' over the parts (of W - W when ``difference``)."""
    if difference:
        W = difference_set(W)
    A = _stack(ops)
    vals = [empirical_nondegeneracy(A, V) for V in _parts(W)]
    return min(v[0] for v in vals), max(v[1] for v in vals)


def _inv_sqrt(G: np.ndarray) -> np.ndarray:
    w, X = np.linalg.eigh((G + G.conj().T) / 2)
    if w[0] <= DEGENERATE_TOL:
        raise DegenerateFamilyError(f"expected Gram is singular on the span (min eig {w[0]:.3g})")
    w = np.maximum(w, EIG_FLOOR)
    return (X / np.sqrt(w)) @ X.conj().T


def _delta_part(A: np.ndarray, M: np.ndarray, V: Subspace) -> float:
    Q = V.onb
    AQ = A @ Q
    G_emp = AQ.conj().T @ AQ
    G_exp = Q.conj().T @ M @ Q
    R = _inv_sqrt(G_exp)
    ev = np.linalg.eigvalsh(R @ ((G_emp + G_emp.conj().T) / 2) @ R)
    return float(np.max(np.abs(ev - 1.0)))


def delta_U(ops, family, cls) -> float:
    """Worst relative deviation of ||A_bar v||^2 from E||A_bar v||^2 over the class.

    ``family`` is a SamplingFamily or its expected Gram matrix.
    """
    A = _stack(ops)
    M = family.expected_gram() if isinstance(family, SamplingFamily) else np.asarray(family)
    return max(_delta_part(A, M, V) for V in _parts(cls))


def nondegeneracy_report(ops, family, cls, seed=None, difference: bool = False) -> NondegeneracyReport:
    target = difference_set(cls) if difference else cls
    a, b = empirical_nondegeneracy_union(ops, target) if not isinstance(target, Subspace) \
        else empirical_nondegeneracy(ops, target)
    m = len(ops) if not isinstance(ops, np.ndarray) else 0
    return NondegeneracyReport(a, b, delta_U(ops, family, target), class_tag(target), m, seed)


def _support_array(C: SparseClass) -> np.ndarray:
    if C.n_supports > RIP_GUARD:
        raise ValueError(f"{C.n_supports} supports exceed the RIP guard {RIP_GUARD}")
    return np.array(list(itertools.combinations(range(C.p), C.s)), dtype=int)


def rip_constant_small(ops, C: SparseClass, family=None) -> float:
    """Max over supports of the deviation on the span of the chosen dictionary columns.

    Without a family the expected Gram is taken as the ambient Gram (isotropy).
    """
    sups = _support_array(C)
    A = _stack(ops)
    M = C.space.gram() if family is None else (
        family.expected_gram() if isinstance(family, SamplingFamily) else np.asarray(family))
    Psi = C.dictionary
    AP = A @ Psi
    G_emp = AP.conj().T @ AP
    G_exp = Psi.conj().T @ M @ Psi
    rows, cols = sups[:, :, None], sups[:, None, :]
    w, X = np.linalg.eigh(G_exp[rows, cols])
    if np.min(w) <= DEGENERATE_TOL:
        raise DegenerateFamilyError("expected Gram is singular on some support")
    R = (X / np.sqrt(np.maximum(w, EIG_FLOOR))[:, None, :]) @ np.conj(np.swapaxes(X, 1, 2))
    ev = np.linalg.eigvalsh(R @ G_emp[rows, cols] @ R)
    return float(np.max(np.abs(ev - 1.0)))


def rip_constant_direct(ops, C: SparseClass) -> float:
    """Same quantity under isotropy from extreme singular values of A_bar Psi_S."""
    sups = _support_array(C)
    AP = _stack(ops) @ C.dictionary
    sub = np.swapaxes(AP[:, sups], 0, 1)
    sv = np.linalg.svd(sub, compute_uv=False)
    lo = sv[:, -1] ** 2 if sv.shape[1] == C.s else np.zeros(len(sups))
    return float(max(np.max(sv[:, 0] ** 2 - 1.0), np.max(1.0 - lo)))


def sparse_nondegeneracy(ops, C: SparseClass) -> tuple[float, float]:
    """(alpha', beta') over all s-sparse vectors, batched over supports."""
    sups = _support_array(C)
    AP = _stack(ops) @ C.dictionary
    G = AP.conj().T @ AP
    ev = np.linalg.eigvalsh(G[sups[:, :, None], sups[:, None, :]])
    return float(max(ev.min(), 0.0)), float(ev.max())


def chernoff_bound_m(phi: float, n: int, d: int = 1, alpha: float = 1.0, delta: float = 0.5,
                     eps: float = 0.05) -> int:
    """m = ceil(3 delta^-2 alpha^-1 phi log(2 n d / eps))."""
    if min(phi, n, d, alpha) <= 0:
        raise ValueError("phi, n, d and alpha must be positive")
    if not (0 < delta < 1 and 0 < eps < 1):
        raise ValueError("delta and eps must lie in (0, 1)")
    return int(ceil(3.0 * phi * log(2 * n * d / eps) / (alpha * delta ** 2) - 1e-9))


@dataclass
class BoundCheck:
    holds: Optional[bool]
    slack: float
    lhs: float
    rhs: float


def verify_error_bound(x, fit, cls, A_bar, e_bar, alpha_prime: float, space=None) -> BoundCheck:
    """Check ||x - xhat|| <= (2/sqrt a)||A(x-u)|| + ||x-u|| + (2/sqrt a)||e|| + sqrt(gamma/a).

    ``u`` is the best class approximation of ``x`` and ``alpha_prime`` the
    empirical lower constant over U - U.  The loss gap gamma is in squared
    units, hence the square root.  Returns holds=None when alpha' vanishes.
    """
    space = space or cls.space
    x = np.asarray(x)
    xhat = fit.xhat if hasattr(fit, "xhat") else np.asarray(fit)
    gamma = float(getattr(fit, "gamma_gap", 0.0))
    lhs = norm(space, x - xhat)
    if alpha_prime <= DEGENERATE_TOL:
        return BoundCheck(None, float("nan"), lhs, float("inf"))
    u = project(cls, x)
    ra = 1.0 / np.sqrt(alpha_prime)
    rhs = (2 * ra * np.linalg.norm(A_bar @ (x - u)) + norm(space, x - u)
           + 2 * ra * np.linalg.norm(e_bar) + ra * np.sqrt(max(gamma, 0.0)))
    # absolute slack for roundoff on exact recoveries
    tol = 1e-9 * max(1.0, norm(space, x))
    return BoundCheck(bool(lhs <= rhs + tol), float(rhs - lhs), float(lhs), float(rhs))


def wilson_interval(successes: int, trials: int, level: float = 0.95) -> tuple[float, float]:
    lo, hi = proportion_confint(successes, trials, alpha=1 - level, method="wilson")
    # the interval always contains the point estimate; clip roundoff at 0 and 1
    p = successes / trials
    return float(min(lo, p)), float(max(hi, p))
