"""Finite-dimensional weighted inner-product spaces and the truncation map.

A continuous domain is represented by a fixed quadrature grid: the space
stores one positive weight per node, and an element is the vector of its
values at the nodes.  Euclidean space is the all-ones-weight special case.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

ATOL = 1e-10


@dataclass(frozen=True, eq=False)
class InnerProductSpace:
    weights: np.ndarray
    field: str = "real"

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).ravel()
        if w.size == 0:
            raise ValueError("space must have positive dimension")
        if not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise ValueError("all weights must be finite and > 0")
        if self.field not in ("real", "complex"):
            raise ValueError(f"field must be 'real' or 'complex', got {self.field!r}")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @classmethod
    def euclidean(cls, dim: int, field: str = "real") -> "InnerProductSpace":
        return cls(np.ones(int(dim)), field)

    @classmethod
    def uniform_grid(cls, n_nodes: int, a: float = -1.0, b: float = 1.0,
                     probability: bool = True) -> "InnerProductSpace":
        """Composite-trapezoid grid on [a, b].

        With ``probability=True`` the weights sum to one, i.e. they discretize
        the uniform probability measure on the interval.
        """
        if n_nodes < 2:
            raise ValueError("need at least two nodes")
        h = (b - a) / (n_nodes - 1)
        w = np.full(n_nodes, h)
        w[0] = w[-1] = h / 2
        if probability:
            w = w / (b - a)
        return cls(w)

    @property
    def dim(self) -> int:
        return self.weights.size

    @property
    def dtype(self):
        return complex if self.field == "complex" else float

    @cached_property
    def sqrt_weights(self) -> np.ndarray:
        return np.sqrt(self.weights)

    def gram(self) -> np.ndarray:
        """Matrix W with inner(x, y) = y^* W x."""
        return np.diag(self.weights)

    def check(self, x) -> np.ndarray:
        x = np.asarray(x)
        if x.shape[0] != self.dim:
            raise ValueError(f"dimension mismatch: expected {self.dim}, got {x.shape[0]}")
        return x

    def to_json(self) -> dict:
        return {"dim": self.dim, "weights": self.weights.tolist(), "field": self.field}

    @classmethod
    def from_json(cls, data: dict) -> "InnerProductSpace":
        if "grid" in data:
            return cls.uniform_grid(int(data["grid"]), float(data.get("a", -1.0)),
                                    float(data.get("b", 1.0)))
        w = data.get("weights")
        if w is None:
            return cls.euclidean(int(data["dim"]), data.get("field", "real"))
        if "dim" in data and len(w) != int(data["dim"]):
            raise ValueError("weights length does not match dim")
        return cls(np.asarray(w, dtype=float), data.get("field", "real"))


def inner(space: InnerProductSpace, x, y):
    """Weighted inner product, linear in ``x`` and conjugate-linear in ``y``."""
    x = space.check(x)
    y = space.check(y)
    val = np.sum(space.weights * x * np.conj(y))
    if space.field == "real" and not np.iscomplexobj(val):
        return float(val)
    return val


def norm(space: InnerProductSpace, x) -> float:
    x = space.check(x)
    return float(np.sqrt(np.sum(space.weights * np.abs(x) ** 2)))


def truncate(space: InnerProductSpace, x, theta: float) -> np.ndarray:
    """Radial truncation x -> min{1, theta/||x||} x onto the ball of radius theta."""
    if theta < 0:
        raise ValueError("theta must be nonnegative")
    x = np.asarray(space.check(x))
    nx = norm(space, x)
    if nx <= theta:
        return x.copy()
    return (theta / nx) * x


def orthonormalize(space: InnerProductSpace, basis, tol: float = ATOL) -> np.ndarray:
    """Columns spanning the same space, orthonormal in the weighted inner product.

    Raises if the basis is numerically rank deficient.
    """
    B = np.asarray(space.check(basis))
    if B.ndim == 1:
        B = B[:, None]
    sw = space.sqrt_weights[:, None]
    Q, R = np.linalg.qr(sw * B)
    s = np.linalg.svd(R, compute_uv=False)
    if s.size == 0 or s[-1] <= tol:
        raise np.linalg.LinAlgError("basis is rank deficient")
    return Q / sw


def orth_range(space: InnerProductSpace, basis, tol: float = 1e-10) -> np.ndarray:
    """Orthonormal basis of the range of ``basis``, dropping dependent directions."""
    B = np.asarray(space.check(basis))
    if B.ndim == 1:
        B = B[:, None]
    sw = space.sqrt_weights[:, None]
    if B.shape[1] == 0:
        return np.zeros((space.dim, 0), dtype=B.dtype)
    U, s, _ = np.linalg.svd(sw * B, full_matrices=False)
    if s.size == 0 or s[0] == 0:
        return np.zeros((space.dim, 0), dtype=U.dtype)
    r = int(np.sum(s > tol * max(1.0, s[0])))
    return U[:, :r] / sw
