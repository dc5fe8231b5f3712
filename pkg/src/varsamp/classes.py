"""Model classes: subspaces, unions of subspaces, sparse classes and ReLU ranges."""
from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass
from functools import cached_property
from math import comb
from typing import Union

import numpy as np
from scipy.linalg import subspace_angles

from .hilbert import ATOL, InnerProductSpace, orth_range, orthonormalize
from .io import array_from_json, array_to_json

SPAN_TOL = 1e-8


class UnsupportedClassError(TypeError):
    """Raised when an operation has no exact route for the given class."""


@dataclass(frozen=True, eq=False)
class Subspace:
    basis: np.ndarray
    space: InnerProductSpace = None
    orthonormal: bool = False

    def __post_init__(self):
        B = np.asarray(self.basis)
        if B.ndim == 1:
            B = B[:, None]
        space = self.space or InnerProductSpace.euclidean(B.shape[0])
        space.check(B)
        object.__setattr__(self, "basis", B)
        object.__setattr__(self, "space", space)
        if self.orthonormal:
            G = B.conj().T @ (space.weights[:, None] * B)
            if not np.allclose(G, np.eye(B.shape[1]), atol=ATOL):
                raise ValueError("basis flagged orthonormal but weighted Gram is not the identity")
        else:
            self.onb  # noqa: B018 -- validates linear independence

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @property
    def ambient_dim(self) -> int:
        return self.space.dim

    @cached_property
    def onb(self) -> np.ndarray:
        """Basis orthonormal in the ambient weighted inner product."""
        if self.orthonormal:
            return self.basis
        return orthonormalize(self.space, self.basis)

    def same_span(self, other: "Subspace", tol: float = SPAN_TOL) -> bool:
        if self.dim != other.dim:
            return False
        sw = self.space.sqrt_weights[:, None]
        ang = subspace_angles(sw * self.onb, sw * other.onb)
        return bool(np.max(np.abs(ang), initial=0.0) < tol)

    def contains(self, x, tol: float = 1e-9) -> bool:
        r = x - project(self, x)
        return _wnorm(self.space, r) <= tol * max(1.0, _wnorm(self.space, x))

    def to_json(self) -> dict:
        return {"kind": "subspace", "basis": array_to_json(self.basis),
                "space": self.space.to_json(), "orthonormal": self.orthonormal}


@dataclass(frozen=True, eq=False)
class UnionOfSubspaces:
    parts: tuple

    def __post_init__(self):
        parts = tuple(self.parts)
        if not parts:
            raise ValueError("a union needs at least one part")
        n0 = parts[0].ambient_dim
        if any(p.ambient_dim != n0 for p in parts):
            raise ValueError("all parts must live in the same ambient space")
        object.__setattr__(self, "parts", parts)

    @property
    def d(self) -> int:
        return len(self.parts)

    @property
    def n_max(self) -> int:
        return max(p.dim for p in self.parts)

    @property
    def space(self) -> InnerProductSpace:
        return self.parts[0].space

    @property
    def ambient_dim(self) -> int:
        return self.space.dim

    def to_json(self) -> dict:
        return {"kind": "union", "parts": [p.to_json() for p in self.parts]}


@dataclass(frozen=True, eq=False)
class SparseClass:
    """Vectors Psi c with c having at most ``s`` nonzero entries."""

    dictionary: np.ndarray
    s: int
    space: InnerProductSpace = None

    def __post_init__(self):
        P = np.asarray(self.dictionary)
        if P.ndim == 1:
            P = P[:, None]
        space = self.space or InnerProductSpace.euclidean(P.shape[0])
        space.check(P)
        G = P.conj().T @ (space.weights[:, None] * P)
        if not np.allclose(G, np.eye(P.shape[1]), atol=ATOL):
            raise ValueError("dictionary columns must be orthonormal in the ambient inner product")
        if not 1 <= int(self.s) <= P.shape[1]:
            raise ValueError(f"sparsity must lie in [1, {P.shape[1]}], got {self.s}")
        object.__setattr__(self, "dictionary", P)
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "s", int(self.s))

    @property
    def p(self) -> int:
        return self.dictionary.shape[1]

    @property
    def ambient_dim(self) -> int:
        return self.space.dim

    @property
    def n_supports(self) -> int:
        return comb(self.p, self.s)

    def supports(self):
        return itertools.combinations(range(self.p), self.s)

    def support_subspace(self, support) -> Subspace:
        return Subspace(self.dictionary[:, list(support)], self.space, orthonormal=True)

    def as_union(self) -> UnionOfSubspaces:
        return UnionOfSubspaces(tuple(self.support_subspace(S) for S in self.supports()))

    def coefficients(self, x) -> np.ndarray:
        x = self.space.check(x)
        return self.dictionary.conj().T @ (self.space.weights * x)

    def to_json(self) -> dict:
        return {"kind": "sparse", "dictionary": array_to_json(self.dictionary), "s": self.s,
                "space": self.space.to_json()}


@dataclass(frozen=True, eq=False)
class GenerativeRange:
    """Range of z -> relu(A_l relu(... relu(A_1 z))) with no bias terms."""

    layers: tuple

    def __post_init__(self):
        layers = tuple(np.asarray(A, dtype=float) for A in self.layers)
        if not layers:
            raise ValueError("need at least one layer")
        for A in layers:
            if A.ndim != 2:
                raise ValueError("layer matrices must be 2-D")
        for prev, nxt in zip(layers, layers[1:]):
            if nxt.shape[1] != prev.shape[0]:
                raise ValueError(f"layer shapes do not chain: {prev.shape} -> {nxt.shape}")
        object.__setattr__(self, "layers", layers)

    @property
    def n_latent(self) -> int:
        return self.layers[0].shape[1]

    @property
    def ambient_dim(self) -> int:
        return self.layers[-1].shape[0]

    @property
    def widths(self) -> list[int]:
        return [self.n_latent] + [A.shape[0] for A in self.layers]

    @property
    def space(self) -> InnerProductSpace:
        return InnerProductSpace.euclidean(self.ambient_dim)

    @classmethod
    def random(cls, widths, rng, scale: str = "he") -> "GenerativeRange":
        layers = []
        for a, b in zip(widths, widths[1:]):
            layers.append(rng.standard_normal((b, a)) * np.sqrt(2.0 / a))
        return cls(tuple(layers))

    def to_json(self) -> dict:
        return {"kind": "generative", "layers": [A.tolist() for A in self.layers]}


ModelClass = Union[Subspace, UnionOfSubspaces, SparseClass, GenerativeRange]


def _wnorm(space, x) -> float:
    return float(np.sqrt(np.sum(space.weights * np.abs(x) ** 2)))


def class_tag(cls: ModelClass) -> str:
    if isinstance(cls, Subspace):
        return f"subspace(n={cls.dim})"
    if isinstance(cls, UnionOfSubspaces):
        return f"union(d={cls.d},n={cls.n_max})"
    if isinstance(cls, SparseClass):
        return f"sparse(p={cls.p},s={cls.s})"
    if isinstance(cls, GenerativeRange):
        return f"generative(widths={'-'.join(map(str, cls.widths))})"
    raise UnsupportedClassError(type(cls).__name__)


def dedupe_subspaces(parts, tol: float = SPAN_TOL) -> list[Subspace]:
    kept: list[Subspace] = []
    for p in parts:
        if not any(p.same_span(q, tol) for q in kept):
            kept.append(p)
    return kept


def difference_set(cls: ModelClass) -> ModelClass:
    """A class covering U - U: pairwise sums of parts, or sparsity doubled."""
    if isinstance(cls, Subspace):
        return cls
    if isinstance(cls, SparseClass):
        return SparseClass(cls.dictionary, min(2 * cls.s, cls.p), cls.space)
    if isinstance(cls, UnionOfSubspaces):
        space = cls.space
        sums = []
        for i, j in itertools.product(range(cls.d), repeat=2):
            Vi, Vj = cls.parts[i], cls.parts[j]
            Q = Vi.onb if i == j else orth_range(space, np.hstack([Vi.onb, Vj.onb]))
            sums.append(Subspace(Q, space, orthonormal=True))
        return UnionOfSubspaces(tuple(dedupe_subspaces(sums)))
    if isinstance(cls, GenerativeRange):
        raise UnsupportedClassError(
            "difference set of a generative range is not enumerated; use pl_expansion_sample")
    raise UnsupportedClassError(type(cls).__name__)


def _check_latent(net: GenerativeRange, z) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    if z.shape[0] != net.n_latent:
        raise ValueError(f"latent vector must have length {net.n_latent}, got {z.shape[0]}")
    return z


def generative_forward(net: GenerativeRange, z) -> np.ndarray:
    """Evaluate the network; ``z`` may be a vector or a (n_latent, k) batch."""
    h = _check_latent(net, z)
    for A in net.layers:
        h = np.maximum(A @ h, 0.0)
    return h


def activation_pattern(net: GenerativeRange, z) -> list[np.ndarray]:
    """Boolean masks of strictly positive pre-activations, one per layer."""
    h = _check_latent(net, z)
    masks = []
    for A in net.layers:
        pre = A @ h
        masks.append(pre > 0)
        h = np.where(pre > 0, pre, 0.0)
    return masks


def local_linear_map(net: GenerativeRange, z) -> np.ndarray:
    """Matrix J(z) with G(w) = J(z) w for every w sharing z's activation pattern."""
    h = _check_latent(net, z)
    J = np.eye(net.n_latent)
    boundary = False
    for A in net.layers:
        pre = A @ h
        boundary |= bool(np.any(pre == 0.0) and np.any(h != 0))
        on = pre > 0
        J = on[:, None] * (A @ J)
        h = np.where(on, pre, 0.0)
    if boundary:
        warnings.warn("latent point lies on an activation boundary; zero counted as inactive",
                      RuntimeWarning, stacklevel=2)
    return J


def pl_expansion_sample(net: GenerativeRange, z1, z2) -> Subspace:
    """Span of the two local linear pieces through z1 and z2.

    Contains G(z1) - G(z2); its dimension is at most 2 * n_latent.
    """
    z1 = _check_latent(net, z1)
    z2 = _check_latent(net, z2)
    if np.array_equal(z1, z2):
        raise ValueError("z1 and z2 coincide; the expansion is degenerate")
    J = np.hstack([local_linear_map(net, z1), local_linear_map(net, z2)])
    space = net.space
    Q = orth_range(space, J)
    if Q.shape[1] == 0:
        raise ValueError("both local pieces are zero; the expansion is degenerate")
    return Subspace(Q, space, orthonormal=True)


def project(cls: ModelClass, x) -> np.ndarray:
    """Best approximation of ``x`` from the class in the ambient norm."""
    if isinstance(cls, Subspace):
        x = cls.space.check(x)
        Q = cls.onb
        return Q @ (Q.conj().T @ (cls.space.weights * x))
    if isinstance(cls, UnionOfSubspaces):
        best, best_d = None, np.inf
        for part in cls.parts:
            u = project(part, x)
            d = _wnorm(cls.space, x - u)
            if d < best_d - 1e-12 * max(1.0, best_d if np.isfinite(best_d) else 1.0):
                best, best_d = u, d
        return best
    if isinstance(cls, SparseClass):
        c = cls.coefficients(x)
        keep = np.argsort(-np.abs(c), kind="stable")[: cls.s]
        cs = np.zeros_like(c)
        cs[keep] = c[keep]
        return cls.dictionary @ cs
    raise UnsupportedClassError(
        f"no exact projection onto {type(cls).__name__}; use the latent search estimator")


def class_from_json(data: dict, space: InnerProductSpace | None = None, base_dir=None) -> ModelClass:
    kind = data["kind"]
    if "space" in data and space is None:
        space = InnerProductSpace.from_json(data["space"])
    if kind == "subspace":
        return Subspace(array_from_json(data["basis"], base_dir), space,
                        bool(data.get("orthonormal", False)))
    if kind == "union":
        return UnionOfSubspaces(tuple(class_from_json(p, space, base_dir) for p in data["parts"]))
    if kind == "sparse":
        return SparseClass(array_from_json(data["dictionary"], base_dir), int(data["s"]), space)
    if kind == "generative":
        return GenerativeRange(tuple(array_from_json(A, base_dir) for A in data["layers"]))
    if kind == "legendre":
        from .bases import legendre_subspace
        return legendre_subspace(int(data["n"]), space or InnerProductSpace.uniform_grid(
            int(data.get("nodes", 513))))
    if kind == "legendre_sparse":
        from .bases import legendre_sparse_class
        return legendre_sparse_class(int(data["p"]), int(data["s"]), space or InnerProductSpace.uniform_grid(
            int(data.get("nodes", 257))))
    raise ValueError(f"unknown model class kind {kind!r}")
