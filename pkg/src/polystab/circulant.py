"""Circulant matrices and their explicit spectra.

Row ``i`` of the circulant generated by ``(a_0, ..., a_{n-1})`` is the
generator shifted right ``i`` places, so ``A[i, j] = a[(j - i) mod n]``.
Its eigenvalues are ``psi_k = sum_j a_j w_k^j`` with ``w_k = exp(2 pi i k/n)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch


@dataclass(frozen=True, eq=False)
class CirculantMatrix:
    generator: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.generator)
        g = g.astype(complex if np.iscomplexobj(g) else float)
        g.setflags(write=False)
        object.__setattr__(self, "generator", g)

    @property
    def n(self) -> int:
        return len(self.generator)

    def dense(self) -> np.ndarray:
        n = self.n
        idx = (np.arange(n)[None, :] - np.arange(n)[:, None]) % n
        return self.generator[idx]

    def is_real_symmetric(self, atol: float = 1e-12) -> bool:
        a = self.generator
        if np.iscomplexobj(a) and np.max(np.abs(a.imag), initial=0.0) > atol:
            return False
        a = a.real
        return bool(np.all(np.abs(a - np.roll(a[::-1], 1)) <= atol))

    def to_csv(self) -> str:
        m = self.dense()
        if not np.iscomplexobj(m):
            return "\n".join(",".join(repr(float(v)) for v in row) for row in m)
        return "\n".join(",".join(str(complex(v)) for v in row) for row in m)


def circulant(generator) -> CirculantMatrix:
    return CirculantMatrix(np.asarray(generator))


def eigenvalues(C: CirculantMatrix) -> np.ndarray:
    """Closed-form eigenvalues ``psi_0 .. psi_{n-1}``, evaluated directly (O(n^2))."""
    n = C.n
    k = np.arange(n)
    omega = np.exp(2j * np.pi * np.outer(k, k) / n)
    return omega @ C.generator


def eigenvector(n: int, k: int) -> np.ndarray:
    """Complex eigenvector ``(1, w_k, ..., w_k^{n-1})`` shared by every circulant."""
    return np.exp(2j * np.pi * k * np.arange(n) / n)


def apply(C: CirculantMatrix, v) -> np.ndarray:
    v = np.asarray(v)
    if v.shape != (C.n,):
        raise DimensionMismatch(f"vector of shape {v.shape} cannot multiply a {C.n}x{C.n} circulant")
    out = C.dense() @ v
    if np.iscomplexobj(out) and not np.iscomplexobj(v) and not np.iscomplexobj(C.generator):
        return out.real
    return out


@dataclass(frozen=True, eq=False)
class RealSymmetricEigenbasis:
    """Real orthogonal eigenbasis shared by all real symmetric n x n circulants.

    ``vectors[k]`` is ``v_k``: ``v_0`` is all ones, ``v_{2l-1}`` samples
    ``cos(2 pi l j/n)`` and ``v_{2l}`` samples ``sin(2 pi l j/n)``. Each ``v_k``
    belongs to the eigenvalue ``psi_{ceil(k/2)}``.
    """

    n: int
    vectors: np.ndarray
    squared_norms: np.ndarray

    def eigenvalue_index(self, k: int) -> int:
        return (k + 1) // 2


def real_symmetric_eigenbasis(n: int) -> RealSymmetricEigenbasis:
    if n < 3:
        raise ValueError("n must be at least 3")
    j = np.arange(n)
    vecs = np.zeros((n, n))
    vecs[0] = 1.0
    for l in range(1, n // 2 + 1):
        vecs[2 * l - 1] = np.cos(2 * np.pi * l * j / n)
        if 2 * l < n:
            vecs[2 * l] = np.sin(2 * np.pi * l * j / n)
    # the alternating vector for even n is exactly +-1
    if n % 2 == 0:
        vecs[n - 1] = np.where(j % 2 == 0, 1.0, -1.0)
    vecs.setflags(write=False)
    norms = np.einsum("ij,ij->i", vecs, vecs)
    return RealSymmetricEigenbasis(n, vecs, norms)


def expected_squared_norms(n: int) -> np.ndarray:
    out = np.full(n, n / 2)
    out[0] = n
    if n % 2 == 0:
        out[n - 1] = n
    return out


def symmetric_generator(n: int, rng: np.random.Generator) -> np.ndarray:
    """Random real generator with ``a_j = a_{n-j}``."""
    a = rng.standard_normal(n)
    return 0.5 * (a + np.roll(a[::-1], 1))


def eigenbasis_residual(C: CirculantMatrix, basis: RealSymmetricEigenbasis | None = None) -> float:
    """max_k |A v_k - psi_{ceil(k/2)} v_k| over the real basis."""
    basis = basis or real_symmetric_eigenbasis(C.n)
    A = C.dense().real
    psi = eigenvalues(C).real
    worst = 0.0
    for k, v in enumerate(basis.vectors):
        worst = max(worst, float(np.max(np.abs(A @ v - psi[basis.eigenvalue_index(k)] * v))))
    return worst


def second_difference_generator(n: int, diag: float, off: float) -> np.ndarray:
    """Generator of the tridiagonal-with-corners circulant ``diag`` / ``off``."""
    if n < 3:
        raise ValueError("n must be at least 3")
    a = np.zeros(n)
    a[0] = diag
    a[1] = off
    a[n - 1] = off
    return a
