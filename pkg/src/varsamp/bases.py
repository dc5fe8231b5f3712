"""Standard bases and unitary matrices used by the examples and experiments."""
from __future__ import annotations

import numpy as np
from numpy.polynomial import legendre
from scipy.fft import dct
from scipy.linalg import hadamard

from .classes import SparseClass, Subspace
from .hilbert import InnerProductSpace, orthonormalize


def grid_nodes(space: InnerProductSpace, a: float = -1.0, b: float = 1.0) -> np.ndarray:
    return np.linspace(a, b, space.dim)


def legendre_vandermonde(nodes, n: int) -> np.ndarray:
    """Columns sqrt(2k+1) P_k(x), k < n: orthonormal for the uniform probability on [-1, 1]."""
    V = legendre.legvander(np.asarray(nodes, dtype=float), n - 1)
    return V * np.sqrt(2 * np.arange(n) + 1)


def legendre_basis(n: int, space: InnerProductSpace) -> np.ndarray:
    """First ``n`` Legendre polynomials, re-orthonormalized in the grid inner product."""
    B = legendre_vandermonde(grid_nodes(space), n)
    return orthonormalize(space, B)


def legendre_subspace(n: int, space: InnerProductSpace) -> Subspace:
    return Subspace(legendre_basis(n, space), space, orthonormal=True)


def legendre_sparse_class(p: int, s: int, space: InnerProductSpace) -> SparseClass:
    return SparseClass(legendre_basis(p, space), s, space)


def unitary(kind: str, N: int) -> np.ndarray:
    """Named N x N unitary: identity, dft, dct or hadamard."""
    if kind == "identity":
        return np.eye(N)
    if kind == "dft":
        j = np.arange(N)
        return np.exp(-2j * np.pi * np.outer(j, j) / N) / np.sqrt(N)
    if kind == "dct":
        return dct(np.eye(N), axis=0, norm="ortho")
    if kind == "hadamard":
        return hadamard(N) / np.sqrt(N)
    raise ValueError(f"unknown unitary kind {kind!r}")


def random_orthogonal(N: int, rng) -> np.ndarray:
    Q, R = np.linalg.qr(rng.standard_normal((N, N)))
    return Q * np.sign(np.diag(R))


def householder(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    v = v / np.linalg.norm(v)
    return np.eye(v.size) - 2 * np.outer(v, v.conj())


def haar(N: int) -> np.ndarray:
    """Orthonormal Haar wavelet basis as columns, coarsest scale first (N a power of two)."""
    if N < 1 or N & (N - 1):
        raise ValueError("N must be a power of two")
    H = np.ones((1, 1))
    while H.shape[0] < N:
        k = H.shape[0]
        top = np.kron(H, [1.0, 1.0])
        bottom = np.kron(np.eye(k), [1.0, -1.0])
        H = np.vstack([top, bottom]) / np.sqrt(2.0)
    return H.T
