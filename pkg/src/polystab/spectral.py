"""Second-order structure of the deficit at the regular polygon.

With ``t = pi/n`` the Hessian of the rescaled ``f`` at ``z_*`` is
``cos(t) M`` and, on the subspace ``H1`` of vectors whose x- and r-parts
both sum to zero, the Hessian of ``g`` acts like ``2 n sin(t)^2 N`` where::

    M = [[I, B], [B^T, K]],     N = [[I, B], [B^T, D]].

``B``, ``K``, ``D`` and ``H`` are circulant. The shear ``Q = [[I, -B], [0, I]]``
block-diagonalizes both forms, ``U = Q^T M Q = I (+) (K - B^T B)`` and
``V = Q^T N Q = I (+) (D - B^T B)``, and

    K - B^T B = H / cos(t)^2,      D - B^T B = H / (sin(t)^2 cos(t)^2).

Everything here is built from closed forms so that it can be checked
against dense linear algebra and finite differences.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg

from . import circulant as circ
from .errors import (
    DerivativeMismatch,
    IdentityViolated,
    IndexOutOfRange,
    InequalityViolated,
    NonPositive,
)


# -- circulant building blocks ----------------------------------------------


def matrix_B(n: int) -> np.ndarray:
    t = math.tan(math.pi / n)
    a = np.zeros(n)
    a[0] = a[1] = t
    return circ.circulant(a).dense()


def matrix_K(n: int) -> np.ndarray:
    return circ.circulant(circ.second_difference_generator(n, 2.0, -1.0)).dense()


def matrix_D(n: int) -> np.ndarray:
    t2 = math.tan(math.pi / n) ** 2
    return circ.circulant(circ.second_difference_generator(n, 2 / t2, -2 - 1 / t2)).dense()


def matrix_H(n: int) -> np.ndarray:
    return circ.circulant(circ.second_difference_generator(n, 2 * math.cos(2 * math.pi / n), -1.0)).dense()


def f_hessian_rescaled(n: int) -> np.ndarray:
    """Entrywise closed form of the Hessian of the rescaled f at ``z_*``."""
    t = math.pi / n
    s, c = math.sin(t), math.cos(t)
    I = np.arange(n)
    nxt = (I + 1) % n
    F = np.zeros((2 * n, 2 * n))
    F[I, I] = c
    F[n + I, n + I] = 2 * c
    F[n + I, n + nxt] = -c
    F[n + nxt, n + I] = -c
    F[I, n + I] = s
    F[I, n + nxt] = s
    F[n:, :n] = F[:n, n:].T
    return F


def g_hessian(n: int) -> np.ndarray:
    """Entrywise closed form of the Hessian of ``g`` at ``z_*``."""
    t = math.pi / n
    s, c, tn = math.sin(t), math.cos(t), math.tan(t)
    I = np.arange(n)
    nxt = (I + 1) % n
    prv = (I - 1) % n
    xx = np.full((n, n), 2 * c * c)
    xx[I, I] = 2 * c * c + 2 * n * s * s
    rr = np.full((n, n), 8 * s * s)
    rr[I, nxt] = (8 - 4 * n) * s * s - 2 * n * c * c
    rr[I, prv] = (8 - 4 * n) * s * s - 2 * n * c * c
    rr[I, I] = 8 * s * s + 4 * n * c * c
    xr = np.full((n, n), 2 * math.sin(2 * t))
    xr[I, I] += 2 * n * s * s * tn
    xr[I, nxt] += 2 * n * s * s * tn
    return np.block([[xx, xr], [xr.T, rr]])


def _blocks(top_right, bottom_right):
    n = len(top_right)
    return np.block([[np.eye(n), top_right], [top_right.T, bottom_right]])


# -- eigenvalues ------------------------------------------------------------


def lambda_closed_form(n: int, k: int) -> float:
    """Eigenvalue ``lambda_k`` of ``K - B^T B``."""
    if not 0 <= k < n:
        raise IndexOutOfRange(f"k must lie in [0, {n}), got {k}")
    t = math.pi / n
    return 4 * math.sin(t * (k - 1)) * math.sin(t * (k + 1)) / math.cos(t) ** 2


def mu_closed_form(n: int, k: int) -> float:
    """Eigenvalue ``mu_k = lambda_k / sin(pi/n)^2`` of ``D - B^T B``."""
    return lambda_closed_form(n, k) / math.sin(math.pi / n) ** 2


def rayleigh_lower_bound_constant(n: int) -> float:
    """``(1 + 1/(4 n sin(pi/n)^2))^-1``, the coefficient-space bound for the identity block."""
    return 1.0 / (1.0 + 1.0 / (4 * n * math.sin(math.pi / n) ** 2))


@dataclass(frozen=True, eq=False)
class SpectralBundle:
    n: int
    B: np.ndarray
    K: np.ndarray
    D: np.ndarray
    H: np.ndarray
    F_hess: np.ndarray
    G_hess: np.ndarray
    G_prime: np.ndarray
    M: np.ndarray
    N: np.ndarray
    Q: np.ndarray
    U: np.ndarray
    V: np.ndarray
    lam: np.ndarray
    mu: np.ndarray
    c_tilde: float
    eigvec_norms: np.ndarray
    rayleigh_floor: float
    basis: np.ndarray = field(repr=False)

    @property
    def deficit_coefficient(self) -> float:
        return 4 * self.n * math.tan(math.pi / self.n)


def eigen_directions(n: int) -> np.ndarray:
    """Columns ``f_1 .. f_{2n}``: unit coordinate vectors on x, real circulant eigenvectors on r."""
    basis = circ.real_symmetric_eigenbasis(n).vectors
    out = np.zeros((2 * n, 2 * n))
    out[:n, :n] = np.eye(n)
    out[n:, n:] = basis.T
    return out


def build_bundle(n: int) -> SpectralBundle:
    if n < 3:
        raise ValueError("n must be at least 3")
    t = math.pi / n
    B, K, D, H = matrix_B(n), matrix_K(n), matrix_D(n), matrix_H(n)
    M = _blocks(B, K)
    N = _blocks(B, D)
    Q = np.block([[np.eye(n), -B], [np.zeros((n, n)), np.eye(n)]])
    lam = np.array([lambda_closed_form(n, k) for k in range(n)])
    fk = eigen_directions(n)
    norms = np.einsum("ij,ij->j", fk, fk)
    c_tilde = rayleigh_lower_bound_constant(n)
    # lambda_{ceil((k-n-1)/2)} |f_k|^2 for k = n+4 .. 2n (1-based)
    tail = [lam[(k - n) // 2] * norms[k - 1] for k in range(n + 4, 2 * n + 1)]
    return SpectralBundle(
        n=n,
        B=B,
        K=K,
        D=D,
        H=H,
        F_hess=f_hessian_rescaled(n),
        G_hess=g_hessian(n),
        G_prime=2 * n * math.sin(t) ** 2 * N,
        M=M,
        N=N,
        Q=Q,
        U=Q.T @ M @ Q,
        V=Q.T @ N @ Q,
        lam=lam,
        mu=lam / math.sin(t) ** 2,
        c_tilde=c_tilde,
        eigvec_norms=norms,
        rayleigh_floor=min([c_tilde, *tail]),
        basis=fk,
    )


# -- subspaces --------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SubspaceProjector:
    """Orthogonal projector onto the kernel of ``constraint_rows``."""

    kind: str
    n: int
    constraint_rows: np.ndarray
    basis: np.ndarray = field(repr=False)

    @property
    def matrix(self) -> np.ndarray:
        return self.basis @ self.basis.T

    def project(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        return (z @ self.basis) @ self.basis.T

    def residual(self, z) -> float:
        return float(np.max(np.abs(self.constraint_rows @ np.asarray(z, dtype=float).T)))


def h1_rows(n: int) -> np.ndarray:
    rows = np.zeros((2, 2 * n))
    rows[0, :n] = 1.0
    rows[1, n:] = 1.0
    return rows


def htilde_rows(n: int) -> np.ndarray:
    """The four linear conditions defining the image of the tangent space under ``Q^-1``."""
    t = math.pi / n
    k = np.arange(1, n + 1)
    rows = np.zeros((4, 2 * n))
    rows[0, :n] = 1.0
    rows[1, n:] = 1.0
    rows[2, :n] = -np.cos(t * (2 * k - 1)) / (2 * math.sin(t))
    rows[2, n:] = 2 * np.cos(2 * t * (k - 1))
    rows[3, :n] = -np.sin(t * (2 * k - 1)) / (2 * math.sin(t))
    rows[3, n:] = 2 * np.sin(2 * t * (k - 1))
    return rows


def projector(kind: str, n: int) -> SubspaceProjector:
    if kind == "H1":
        rows = h1_rows(n)
    elif kind == "Htilde":
        rows = htilde_rows(n)
    else:
        raise ValueError(f"unknown subspace {kind!r}")
    return SubspaceProjector(kind, n, rows, scipy.linalg.null_space(rows))


# -- verification -----------------------------------------------------------


@dataclass
class Report:
    """Named maximum errors and bookkeeping values from one verification."""

    name: str
    n: int
    tol: float
    errors: dict = field(default_factory=dict)
    values: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(v <= self.tol for v in self.errors.values())

    def failures(self) -> list[str]:
        return [k for k, v in self.errors.items() if not v <= self.tol]

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "n": self.n,
            "tol": self.tol,
            "passed": self.passed,
            "errors": self.errors,
            "values": {k: _jsonable(v) for k, v in self.values.items()},
        }


def _jsonable(v):
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    return v


def _maxabs(a) -> float:
    return float(np.max(np.abs(a)))


def verify_identities(bundle: SpectralBundle, tol: float = 1e-10, samples: int = 64, seed: int = 0) -> Report:
    """Check the matrix identities behind the block diagonalization.

    Raises :class:`IdentityViolated` naming the failing identities.
    """
    n = bundle.n
    t = math.pi / n
    s2, c2 = math.sin(t) ** 2, math.cos(t) ** 2
    BtB = bundle.B.T @ bundle.B
    Z = np.zeros((n, n))
    I = np.eye(n)
    rep = Report("identities", n, tol)
    rep.errors["K-BtB=H/cos2"] = _maxabs(bundle.K - BtB - bundle.H / c2)
    rep.errors["D-BtB=H/(sin2cos2)"] = _maxabs(bundle.D - BtB - bundle.H / (s2 * c2))
    rep.errors["QtMQ_block"] = _maxabs(bundle.U - np.block([[I, Z], [Z, bundle.K - BtB]]))
    rep.errors["QtNQ_block"] = _maxabs(bundle.V - np.block([[I, Z], [Z, bundle.D - BtB]]))
    rep.errors["F=cos*M"] = _maxabs(bundle.F_hess - math.cos(t) * bundle.M)
    rep.errors["detQ=1"] = abs(float(np.linalg.det(bundle.Q)) - 1.0)

    rng = np.random.default_rng(seed)
    z = projector("H1", n).project(rng.standard_normal((samples, 2 * n)))
    z /= np.linalg.norm(z, axis=1, keepdims=True)
    qG = np.einsum("ij,jk,ik->i", z, bundle.G_hess, z)
    qGp = np.einsum("ij,jk,ik->i", z, bundle.G_prime, z)
    scale = max(1.0, _maxabs(bundle.G_hess))
    rep.errors["<Gz,z>=<G'z,z> on H1"] = _maxabs(qG - qGp) / scale
    rep.values["lambda"] = bundle.lam
    rep.values["mu"] = bundle.mu
    if not rep.passed:
        raise IdentityViolated(f"identity check failed for n={n}: {', '.join(rep.failures())}", rep)
    return rep


def dense_spectra(bundle: SpectralBundle) -> tuple[np.ndarray, np.ndarray]:
    """Sorted eigenvalues of ``K - B^T B`` and ``D - B^T B`` from a dense solver."""
    BtB = bundle.B.T @ bundle.B
    return np.linalg.eigvalsh(bundle.K - BtB), np.linalg.eigvalsh(bundle.D - BtB)


def check_eigenvalues(bundle: SpectralBundle, tol: float = 1e-10) -> Report:
    lam_dense, mu_dense = dense_spectra(bundle)
    rep = Report("eigenvalues", bundle.n, tol)
    rep.errors["lambda"] = _maxabs(np.sort(bundle.lam) - lam_dense)
    rep.errors["mu"] = _maxabs(np.sort(bundle.mu) - mu_dense) / max(1.0, _maxabs(mu_dense))
    if not rep.passed:
        raise IdentityViolated(f"closed-form spectrum mismatch for n={bundle.n}", rep)
    return rep


def check_U_le_V(bundle: SpectralBundle, samples: int = 10_000, seed: int = 0, tol: float = 1e-12) -> Report:
    """Sample ``<Uz,z> <= <Vz,z> + tol |z|^2`` on H1 and compare the spectra pairwise."""
    n = bundle.n
    rng = np.random.default_rng(seed)
    z = projector("H1", n).project(rng.standard_normal((samples, 2 * n)))
    qU = np.einsum("ij,jk,ik->i", z, bundle.U, z)
    qV = np.einsum("ij,jk,ik->i", z, bundle.V, z)
    sq = np.einsum("ij,ij->i", z, z)
    excess = (qU - qV) / sq
    violations = int(np.count_nonzero(qU > qV + tol * sq))
    spectral_gap = bundle.mu[1:] - bundle.lam[1:]
    rep = Report("U<=V on H1", n, tol)
    rep.errors["sampled excess"] = max(0.0, float(excess.max()))
    rep.errors["mu_k - lambda_k deficit"] = max(0.0, float(-spectral_gap.min()))
    rep.values["violations"] = violations
    rep.values["samples"] = samples
    if violations or not rep.passed:
        raise InequalityViolated(f"<Uz,z> <= <Vz,z> fails for n={n} ({violations} samples)", rep)
    return rep


def min_rayleigh_U_on_Htilde(bundle: SpectralBundle) -> float:
    """Smallest ``<Uz,z>/|z|^2`` over nonzero z in the transformed tangent space."""
    W = projector("Htilde", bundle.n).basis
    value = float(np.linalg.eigvalsh(W.T @ bundle.U @ W)[0])
    if not value > 0:
        raise NonPositive(f"U is not positive on the transformed tangent space (n={bundle.n}, min={value})")
    return value


def rayleigh_report(bundle: SpectralBundle) -> Report:
    """Least Rayleigh quotient of U on the transformed tangent space against the coefficient-space floor.

    The floor bounds ``<Uz,z>`` by a multiple of the squared coefficients in
    the ``f_k`` basis; since ``|f_k|^2 <= n`` that becomes
    ``rayleigh >= floor / n`` in the Euclidean norm.
    """
    value = min_rayleigh_U_on_Htilde(bundle)
    rep = Report("rayleigh on Htilde", bundle.n, 0.0)
    rep.values.update(
        min_rayleigh=value,
        rayleigh_floor=bundle.rayleigh_floor,
        c_tilde=bundle.c_tilde,
        euclidean_floor=bundle.rayleigh_floor / bundle.n,
    )
    rep.errors["below floor/n"] = max(0.0, bundle.rayleigh_floor / bundle.n - value)
    rep.errors["above 1"] = max(0.0, value - 1.0 - 1e-12)
    return rep


# -- finite differences -----------------------------------------------------


def fd_gradient(fun, z, h):
    z = np.asarray(z, dtype=float)
    g = np.empty_like(z)
    for i in range(len(z)):
        e = np.zeros_like(z)
        e[i] = h
        g[i] = (fun(z + e) - fun(z - e)) / (2 * h)
    return g


def complex_step_gradient(fun, z, h=1e-30):
    """Derivative from ``Im fun(z + i h e_k) / h``; free of subtractive cancellation."""
    z = np.asarray(z, dtype=float)
    g = np.empty_like(z)
    for i in range(len(z)):
        zc = z.astype(complex)
        zc[i] += 1j * h
        g[i] = np.imag(fun(zc)) / h
    return g


def fd_hessian(fun, z, h):
    """Central 4-point differences for every entry (diagonal included)."""
    z = np.asarray(z, dtype=float)
    m = len(z)
    Hm = np.empty((m, m))
    E = np.eye(m) * h
    for i in range(m):
        for j in range(i, m):
            v = (
                fun(z + E[i] + E[j]) - fun(z + E[i] - E[j]) - fun(z - E[i] + E[j]) + fun(z - E[i] - E[j])
            ) / (4 * h * h)
            Hm[i, j] = Hm[j, i] = v
    return Hm


def gradient_and_hessian_fd_check(
    n: int,
    h: float = 1e-5,
    h_hess: float = 1e-4,
    grad_tol: float = 1e-6,
    hess_tol: float = 1e-5,
    value_tol: float = 1e-12,
    tangent_tol: float = 1e-10,
    check_hessian: bool = True,
) -> Report:
    """Compare closed-form derivatives at ``z_*`` with central differences.

    Gradients use step ``h``; Hessians use the larger ``h_hess`` because the
    4-point stencil divides round-off by ``h^2``.
    """
    from . import manifold as mf

    zs = mf.z_star(n).vector()
    t = math.pi / n
    rep = Report("derivatives", n, 0.0)
    tols = {}

    def put(key, err, tol):
        rep.errors[key] = err
        tols[key] = tol

    put("f(z*)", abs(float(mf.f_rescaled(zs))), value_tol)
    put("g(z*)", abs(float(mf.g_eval(zs))), value_tol)

    grad_f_closed = np.concatenate([np.full(n, math.sin(t)), np.zeros(n)])
    grad_g_closed = np.concatenate([np.full(n, 2 * n * math.tan(t)), np.zeros(n)])
    gf = fd_gradient(mf.f_rescaled, zs, h)
    gg = fd_gradient(mf.g_eval, zs, h)
    put("grad f", _maxabs(gf - grad_f_closed), grad_tol)
    put("grad g", _maxabs(gg - grad_g_closed), grad_tol)

    # condition (ii): gradients are normal to {sum x = 0, sum r = 0}. Central
    # differences carry ~1e-9 round-off here, so the restriction uses complex steps.
    P1 = projector("H1", n).matrix
    for key, fun in (("f", mf.f_rescaled), ("g", mf.g_eval)):
        cs = complex_step_gradient(fun, zs)
        put(f"grad {key} on tangent", float(np.linalg.norm(P1 @ cs) / np.linalg.norm(cs)), tangent_tol)
        rep.values[f"grad_{key}_central_on_tangent"] = float(
            np.linalg.norm(P1 @ (gf if key == "f" else gg)) / np.linalg.norm(cs)
        )

    if check_hessian:
        Hf = fd_hessian(mf.f_rescaled, zs, h_hess)
        Hg = fd_hessian(mf.g_eval, zs, h_hess)
        put("hess f", _maxabs(Hf - f_hessian_rescaled(n)), hess_tol)
        put("hess g", _maxabs(Hg - g_hessian(n)), hess_tol)
        rep.values["hess_f_fd"] = Hf
        rep.values["hess_g_fd"] = Hg
    rep.values["tolerances"] = tols
    bad = [k for k, v in rep.errors.items() if not v <= tols[k]]
    rep.tol = max(tols.values())
    rep.values["failed"] = bad
    if bad:
        raise DerivativeMismatch(f"derivative check failed for n={n}: {', '.join(bad)}", rep)
    return rep


# -- bundle-wide driver and exports -----------------------------------------


def run_all(n: int, samples: int = 10_000, seed: int = 0, tol: float = 1e-10) -> dict:
    """Every check for one n; raises on the first failure."""
    b = build_bundle(n)
    out = {
        "n": n,
        "identities": verify_identities(b, tol, seed=seed).to_dict(),
        "eigenvalues": check_eigenvalues(b, tol).to_dict(),
        "U_le_V": check_U_le_V(b, samples, seed, tol=min(tol, 1e-12)).to_dict(),
        "rayleigh": rayleigh_report(b).to_dict(),
        "derivatives": _strip(gradient_and_hessian_fd_check(n).to_dict()),
    }
    return out


def _strip(d):
    d["values"] = {k: v for k, v in d["values"].items() if not k.startswith("hess_")}
    return d


def eigen_table_csv(ns) -> str:
    lines = ["n,k,lambda,mu"]
    for n in ns:
        for k in range(n):
            lines.append(f"{n},{k},{lambda_closed_form(n, k)!r},{mu_closed_form(n, k)!r}")
    return "\n".join(lines) + "\n"


def corrupt(bundle: SpectralBundle, **changes) -> SpectralBundle:
    """Copy of a bundle with some matrices replaced (for negative controls)."""
    return replace(bundle, **changes)


def report_json(obj) -> str:
    return json.dumps(obj, indent=2, default=_jsonable)
