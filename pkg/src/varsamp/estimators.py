"""Empirical least-squares solvers over each model class, plus truncation.

Every solver returns a FitResult whose ``residual`` is the empirical loss
(1/m) sum_i ||b_i - A_i xhat||^2 and whose ``gamma_gap`` bounds how far that
loss may sit above the class minimum.
"""
from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .classes import (GenerativeRange, SparseClass, Subspace, UnionOfSubspaces,
                      class_tag, generative_forward, local_linear_map)
from .hilbert import InnerProductSpace, norm, truncate
from .sampling import stack_measurements

EXHAUSTIVE_GUARD = 10 ** 6
GREEDY_CERTIFY_GUARD = 10 ** 4
EXHAUSTIVE_CHUNK = 4096
TIE_TOL = 1e-12


@dataclass
class FitResult:
    xhat: np.ndarray
    residual: float
    gamma_gap: float = 0.0
    gamma_kind: str = "exact"
    class_tag: str = ""
    solver_meta: dict = field(default_factory=dict)
    xcheck: Optional[np.ndarray] = None

    def to_json(self, space: Optional[InnerProductSpace] = None) -> dict:
        space = space or InnerProductSpace.euclidean(self.xhat.size)
        out = {
            "residual": float(self.residual),
            "gamma_gap": float(self.gamma_gap),
            "gamma_kind": self.gamma_kind,
            "class_tag": self.class_tag,
            "solver_meta": self.solver_meta,
            "norm_xhat": norm(space, self.xhat),
        }
        if self.xcheck is not None:
            out["norm_xcheck"] = norm(space, self.xcheck)
        return out


def _stacked(measurements) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(measurements, tuple) and len(measurements) == 2:
        return measurements
    A, b, _ = stack_measurements(list(measurements))
    return A, b


def _loss(A, b, x) -> float:
    r = b - A @ x
    return float(np.real(np.vdot(r, r)))


def _solve_on_basis(A, b, Q) -> tuple[np.ndarray, float, dict]:
    """Exact minimizer of ||b - A Q c|| over c via an SVD-based least-squares solve."""
    AQ = A @ Q
    c, _, rank, sv = np.linalg.lstsq(AQ, b, rcond=None)
    meta = {"rank": int(rank), "underdetermined": AQ.shape[0] < Q.shape[1]}
    if rank < Q.shape[1]:
        meta["singular"] = True
    x = Q @ c
    return x, _loss(A, b, x), meta


def lsq_subspace(measurements, V: Subspace) -> FitResult:
    A, b = _stacked(measurements)
    x, res, meta = _solve_on_basis(A, b, V.onb)
    if meta.get("singular"):
        warnings.warn("stacked system is singular on the subspace; returning the minimum-norm solve",
                      RuntimeWarning, stacklevel=2)
    return FitResult(x, res, 0.0, "exact", class_tag(V), meta)


def lsq_union(measurements, W: UnionOfSubspaces) -> FitResult:
    """Solve on every part and keep the smallest loss (lowest index on ties)."""
    A, b = _stacked(measurements)
    best = None
    for k, part in enumerate(W.parts):
        x, res, meta = _solve_on_basis(A, b, part.onb)
        if best is None or res < best[1] - TIE_TOL * max(1.0, best[1]):
            best = (x, res, dict(meta, part=k))
    x, res, meta = best
    return FitResult(x, res, 0.0, "exact", class_tag(W), meta)


def lsq_sparse_exhaustive(measurements, C: SparseClass) -> FitResult:
    if C.n_supports > EXHAUSTIVE_GUARD:
        raise ValueError(f"{C.n_supports} supports exceed the exhaustive guard; use lsq_sparse_greedy")
    A, b = _stacked(measurements)
    AP = A @ C.dictionary
    supports = np.array(list(itertools.combinations(range(C.p), C.s)), dtype=int)
    res_all = np.empty(len(supports))
    for lo in range(0, len(supports), EXHAUSTIVE_CHUNK):
        sub = AP[:, supports[lo:lo + EXHAUSTIVE_CHUNK]].transpose(1, 0, 2)
        fitted = sub @ (np.linalg.pinv(sub) @ b[:, None])
        r = b[None, :] - fitted[:, :, 0]
        res_all[lo:lo + len(sub)] = np.sum(np.abs(r) ** 2, axis=1)
    best = float(res_all.min())
    k = int(np.argmax(res_all <= best + TIE_TOL * max(1.0, best)))
    S = supports[k]
    res, c = _support_fit(AP, b, list(S))
    coef = np.zeros(C.p, dtype=np.result_type(c, C.dictionary))
    coef[list(S)] = c
    return FitResult(C.dictionary @ coef, res, 0.0, "exact", class_tag(C),
                     {"support": list(S), "n_supports": C.n_supports})


def _support_fit(AP, b, S):
    c, *_ = np.linalg.lstsq(AP[:, S], b, rcond=None)
    r = b - AP[:, S] @ c
    return float(np.real(np.vdot(r, r))), c


def lsq_sparse_greedy(measurements, C: SparseClass, iters: Optional[int] = None) -> FitResult:
    """Matching-pursuit support growth, then swap steps accepted only on improvement.

    The first s iterations grow the support one atom at a time with a refit;
    each further iteration tries the best single swap.  The loss is therefore
    nonincreasing in ``iters``.
    """
    s = C.s
    iters = s if iters is None else int(iters)
    if iters < s:
        raise ValueError("iters must be at least s")
    A, b = _stacked(measurements)
    AP = A @ C.dictionary
    colnorm = np.linalg.norm(AP, axis=0)
    S: list[int] = []
    r = b.copy()
    for _ in range(s):
        score = np.abs(AP.conj().T @ r) / np.where(colnorm > 0, colnorm, 1.0)
        score[S] = -1.0
        S.append(int(np.argmax(score)))
        res, c = _support_fit(AP, b, S)
        r = b - AP[:, S] @ c
    swaps = 0
    for _ in range(iters - s):
        best = (res, None)
        for pos, j in itertools.product(range(s), range(C.p)):
            if j in S:
                continue
            T = S.copy()
            T[pos] = j
            rt, _ = _support_fit(AP, b, T)
            if rt < best[0] - TIE_TOL * max(1.0, best[0]):
                best = (rt, T)
        if best[1] is None:
            break
        S = best[1]
        res, c = _support_fit(AP, b, S)
        swaps += 1
    coef = np.zeros(C.p, dtype=np.result_type(c, C.dictionary))
    coef[S] = c
    meta = {"support": sorted(S), "iters": iters, "swaps": swaps}
    if C.n_supports <= GREEDY_CERTIFY_GUARD:
        oracle = lsq_sparse_exhaustive((A, b), C)
        gap, kind = max(0.0, res - oracle.residual), "certified"
    else:
        gap, kind = 0.0, "estimated"
    return FitResult(C.dictionary @ coef, res, gap, kind, class_tag(C), meta)


def _latent_descent(A, b, net: GenerativeRange, z, steps: int, step_size: float, tol: float):
    loss = _loss(A, b, generative_forward(net, z))
    accepted = 0
    for _ in range(steps):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            J = local_linear_map(net, z)
        r = A @ (J @ z) - b
        g = 2.0 * np.real(J.conj().T @ (A.conj().T @ r))
        if not np.all(np.isfinite(g)) or np.linalg.norm(g) < tol:
            break
        t = step_size
        while t > 1e-12:
            zn = z - t * g
            ln = _loss(A, b, generative_forward(net, zn))
            if np.isfinite(ln) and ln < loss:
                z, loss = zn, ln
                accepted += 1
                break
            t *= 0.5
        else:
            break
    return z, loss, accepted


def lsq_generative(measurements, net: GenerativeRange, restarts: int = 5, steps: int = 200,
                   step_size: float = 1.0, rng=None, tol: float = 1e-12,
                   screen: int = 0) -> FitResult:
    """Latent-space descent with backtracking; best of ``restarts`` random starts.

    With ``screen`` > restarts, that many Gaussian latent candidates are drawn
    and the ``restarts`` with the smallest loss become the starting points.
    Step halving until the loss decreases keeps each accepted step monotone.
    gamma_gap is the spread between the best and runner-up restart, a
    heuristic flagged as estimated.
    """
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    A, b = _stacked(measurements)
    rng = rng if rng is not None else np.random.default_rng(0)
    starts = rng.standard_normal((max(restarts, screen), net.n_latent))
    if screen > restarts:
        losses = [_loss(A, b, generative_forward(net, z)) for z in starts]
        starts = starts[np.argsort(losses, kind="stable")[:restarts]]
    results = []
    for z0 in starts:
        z, loss, acc = _latent_descent(A, b, net, z0, steps, step_size, tol)
        if np.isfinite(loss):
            results.append((loss, z, acc))
    if not results:
        raise FloatingPointError("every restart diverged")
    results.sort(key=lambda t: t[0])
    loss, z, acc = results[0]
    gap = results[1][0] - loss if len(results) > 1 else 0.0
    meta = {"restarts": restarts, "screen": screen, "kept": len(results), "accepted_steps": acc,
            "z": z.tolist(), "gamma_upper": loss}
    return FitResult(generative_forward(net, z), loss, gap, "estimated", class_tag(net), meta)


def solve(measurements, cls, **kw) -> FitResult:
    """Dispatch to the solver matching the class."""
    if isinstance(cls, Subspace):
        return lsq_subspace(measurements, cls)
    if isinstance(cls, UnionOfSubspaces):
        return lsq_union(measurements, cls)
    if isinstance(cls, SparseClass):
        if kw.get("greedy") or cls.n_supports > EXHAUSTIVE_GUARD:
            return lsq_sparse_greedy(measurements, cls, kw.get("iters"))
        return lsq_sparse_exhaustive(measurements, cls)
    if isinstance(cls, GenerativeRange):
        return lsq_generative(measurements, cls, **{k: v for k, v in kw.items()
                                                     if k in ("restarts", "steps", "step_size", "rng", "screen")})
    raise TypeError(f"no solver for {type(cls).__name__}")


def finalize(fit: FitResult, theta: float, space: Optional[InnerProductSpace] = None) -> FitResult:
    """Attach xcheck = min{1, theta/||xhat||} xhat."""
    space = space or InnerProductSpace.euclidean(fit.xhat.size)
    return replace(fit, xcheck=truncate(space, fit.xhat, theta))


def sketch_solve(X, y, pi, m: int, seed=None, max_retries: int = 10) -> tuple[np.ndarray, float]:
    """Row-sampling sketch of min ||Xw - y||: m rows drawn by pi, scaled by 1/sqrt(m pi_i).

    Returns the sketched solution and ||X w - y||^2 / ||X w* - y||^2 (1 when
    y lies in the range of X).  A rank-deficient sketch is redrawn.
    """
    X = np.asarray(X)
    y = np.asarray(y)
    pi = np.asarray(pi, dtype=float)
    N, n = X.shape
    if pi.shape != (N,) or np.any(pi < 0) or abs(pi.sum() - 1) > 1e-9:
        raise ValueError("pi must be a probability vector over the rows of X")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    w_star, *_ = np.linalg.lstsq(X, y, rcond=None)
    r_star = np.linalg.norm(X @ w_star - y) ** 2
    for _ in range(max_retries):
        idx = rng.choice(N, size=m, p=pi)
        scale = 1.0 / np.sqrt(m * pi[idx])
        SX, Sy = X[idx] * scale[:, None], y[idx] * scale
        w, _, rank, _ = np.linalg.lstsq(SX, Sy, rcond=None)
        if rank == n:
            break
    else:
        raise np.linalg.LinAlgError("sketched system stayed rank deficient")
    r = np.linalg.norm(X @ w - y) ** 2
    ratio = 1.0 if r_star <= 1e-28 * max(1.0, np.linalg.norm(y) ** 2) else float(r / r_star)
    return w, ratio


def weighted_regression_fit(nodes, values, density, cls, **kw) -> FitResult:
    """Weighted least squares over grid samples with weights 1/density(node).

    ``nodes`` are grid indices, ``density`` the value of nu at each of them.
    """
    nodes = np.asarray(nodes, dtype=int)
    values = np.asarray(values)
    nu = np.asarray(density, dtype=float)
    if np.any(nu <= 0):
        raise ValueError("density vanishes at a sampled node")
    N = cls.ambient_dim
    m = nodes.size
    s = 1.0 / np.sqrt(nu)
    A = np.zeros((m, N), dtype=float)
    A[np.arange(m), nodes] = s
    return solve((A / np.sqrt(m), values * s / np.sqrt(m)), cls, **kw)
