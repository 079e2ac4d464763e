"""Angular/radial formulation of the deficit.

A convex n-gon centred at its vertex centroid is encoded by ``z = (x; r)``:
``x[i]`` is the central angle between consecutive radii and ``r[i]`` the
length of the i-th radius. On this chart

* ``f(z) = n S - c_n F``  (side-length variance plus deficit),
* ``g(z) = L^2 - c_n F``  (the isoperimetric deficit),

and ``f - g = n S - L^2 >= 0``. The set ``M`` cut out by ``sum x = 2 pi``,
``sum r = n`` and the two centroid equations is compact, and the stability
constant of the side variance is governed by ``sup f/g`` on ``M``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import (
    DegenerateDenominator,
    InvalidRatio,
    LeftPositiveOrthant,
    NoConvergence,
)


@dataclass(frozen=True, eq=False)
class AngularRadial:
    x: np.ndarray
    r: np.ndarray

    def __post_init__(self):
        x = np.array(self.x, dtype=float)
        r = np.array(self.r, dtype=float)
        if x.shape != r.shape or x.ndim != 1:
            raise ValueError("x and r must be 1-D arrays of equal length")
        x.setflags(write=False)
        r.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "r", r)

    @property
    def n(self) -> int:
        return len(self.x)

    def vector(self) -> np.ndarray:
        return np.concatenate([self.x, self.r])

    @classmethod
    def from_vector(cls, z) -> "AngularRadial":
        z = np.asarray(z, dtype=float)
        n = len(z) // 2
        return cls(z[:n], z[n:])

    def to_dict(self):
        return {"x": self.x.tolist(), "r": self.r.tolist()}


@dataclass(frozen=True)
class ConstraintResidual:
    h1: float
    h2: float
    h3: float
    h4: float

    @property
    def norm(self) -> float:
        return math.sqrt(self.h1**2 + self.h2**2 + self.h3**2 + self.h4**2)


def z_star(n: int) -> AngularRadial:
    """The regular n-gon: equal angles ``2 pi/n`` and unit radii."""
    return AngularRadial(np.full(n, 2 * np.pi / n), np.ones(n))


def _split(z):
    if isinstance(z, AngularRadial):
        return z.x, z.r
    z = np.asarray(z)
    if not np.iscomplexobj(z):
        z = z.astype(float)
    n = z.shape[-1] // 2
    return z[..., :n], z[..., n:]


# -- the two functionals ----------------------------------------------------


def _sides_sq(x, r):
    r1 = np.roll(r, -1, axis=-1)
    return r1 * r1 + r * r - 2 * r * r1 * np.cos(x)


def _area(x, r):
    return 0.5 * np.sum(r * np.roll(r, -1, axis=-1) * np.sin(x), axis=-1)


def f_eval(z) -> float:
    """``n S - c_n F`` from the central-angle formulas. Accepts batches."""
    x, r = _split(z)
    n = x.shape[-1]
    cn = 4 * n * math.tan(math.pi / n)
    return n * np.sum(_sides_sq(x, r), axis=-1) - cn * _area(x, r)


def g_eval(z) -> float:
    """``L^2 - c_n F``; side lengths clamp negative round-off to zero.

    Complex input is passed through unclamped (complex-step differentiation).
    """
    x, r = _split(z)
    n = x.shape[-1]
    cn = 4 * n * math.tan(math.pi / n)
    sq = _sides_sq(x, r)
    if not np.iscomplexobj(sq):
        sq = np.maximum(sq, 0.0)
    L = np.sum(np.sqrt(sq), axis=-1)
    return L * L - cn * _area(x, r)


def f_rescaled(z) -> float:
    """``cos(pi/n)/(2n) * f``, written as ``cos(pi/n) sum r_i^2 - sum r_i r_{i+1} cos(x_i - pi/n)``.

    This is the normalisation in which the Hessian at the regular polygon
    is ``cos(pi/n) [[I, B], [B^T, K]]``.
    """
    x, r = _split(z)
    n = x.shape[-1]
    t = math.pi / n
    return math.cos(t) * np.sum(r * r, axis=-1) - np.sum(
        r * np.roll(r, -1, axis=-1) * np.cos(x - t), axis=-1
    )


def grad_f(z) -> np.ndarray:
    x, r = _split(z)
    n = len(x)
    cn = 4 * n * math.tan(math.pi / n)
    r1 = np.roll(r, -1)
    gx = 2 * n * r * r1 * np.sin(x) - 0.5 * cn * r * r1 * np.cos(x)
    # d/dr_i picks up side i (r_i, r_{i+1}) and side i-1 (r_{i-1}, r_i)
    ds_r = 2 * r - 2 * r1 * np.cos(x)
    ds_r1 = 2 * r1 - 2 * r * np.cos(x)
    da_r = 0.5 * r1 * np.sin(x)
    da_r1 = 0.5 * r * np.sin(x)
    gr = n * (ds_r + np.roll(ds_r1, 1)) - cn * (da_r + np.roll(da_r1, 1))
    return np.concatenate([gx, gr])


def grad_g(z) -> np.ndarray:
    x, r = _split(z)
    n = len(x)
    cn = 4 * n * math.tan(math.pi / n)
    r1 = np.roll(r, -1)
    l = np.sqrt(np.maximum(_sides_sq(x, r), 0.0))
    L = l.sum()
    inv = np.where(l > 0, 1.0 / np.where(l > 0, l, 1.0), 0.0)
    gx = 2 * L * r * r1 * np.sin(x) * inv - 0.5 * cn * r * r1 * np.cos(x)
    dl_r = (r - r1 * np.cos(x)) * inv
    dl_r1 = (r1 - r * np.cos(x)) * inv
    da_r = 0.5 * r1 * np.sin(x)
    da_r1 = 0.5 * r * np.sin(x)
    gr = 2 * L * (dl_r + np.roll(dl_r1, 1)) - cn * (da_r + np.roll(da_r1, 1))
    return np.concatenate([gx, gr])


# -- constraints ------------------------------------------------------------


def _vertex_angles(x):
    # theta_1 = 0 (empty sum), theta_i = x_1 + ... + x_{i-1}
    return np.concatenate([[0.0], np.cumsum(x)[:-1]])


def residuals(z) -> ConstraintResidual:
    x, r = _split(z)
    n = len(x)
    theta = _vertex_angles(x)
    return ConstraintResidual(
        h1=float(x.sum() - 2 * np.pi),
        h2=float(r.sum() - n),
        h3=float(np.dot(r, np.cos(theta))),
        h4=float(np.dot(r, np.sin(theta))),
    )


def _residual_vector(z):
    res = residuals(z)
    return np.array([res.h1, res.h2, res.h3, res.h4])


def constraint_jacobian(z) -> np.ndarray:
    """4 x 2n Jacobian of ``(h1, h2, h3, h4)``."""
    x, r = _split(z)
    n = len(x)
    theta = _vertex_angles(x)
    J = np.zeros((4, 2 * n))
    J[0, :n] = 1.0
    J[1, n:] = 1.0
    J[2, n:] = np.cos(theta)
    J[3, n:] = np.sin(theta)
    # x_k enters theta_i for every i > k
    rs = r * np.sin(theta)
    rc = r * np.cos(theta)
    tail_s = np.concatenate([np.cumsum(rs[::-1])[::-1][1:], [0.0]])
    tail_c = np.concatenate([np.cumsum(rc[::-1])[::-1][1:], [0.0]])
    J[2, :n] = -tail_s
    J[3, :n] = tail_c
    return J


def constraint_gradients_at_star(n: int) -> np.ndarray:
    """Closed-form gradient rows of h1..h4 at the regular polygon."""
    k = np.arange(1, n + 1)
    t = math.pi / n
    rows = np.zeros((4, 2 * n))
    rows[0, :n] = 1.0
    rows[1, n:] = 1.0
    rows[2, :n] = (math.cos(t) - np.cos(t * (2 * k - 1))) / (2 * math.sin(t))
    rows[2, n:] = np.cos(2 * t * (k - 1))
    rows[3, :n] = -(math.sin(t) + np.sin(t * (2 * k - 1))) / (2 * math.sin(t))
    rows[3, n:] = np.sin(2 * t * (k - 1))
    return rows


def tangent_basis_at_star(n: int) -> np.ndarray:
    """Orthonormal basis (columns) of the tangent space of M at the regular polygon."""
    return scipy.linalg.null_space(constraint_gradients_at_star(n))


def project_to_M(z0, tol: float = 1e-12, max_iter: int = 50, basin: float = 1.0) -> AngularRadial:
    """Pull a nearby point onto M with minimum-norm Gauss-Newton steps."""
    z = AngularRadial.from_vector(z0.vector() if isinstance(z0, AngularRadial) else z0).vector()
    if np.any(z < 0):
        raise LeftPositiveOrthant("starting point has a negative coordinate")
    h = _residual_vector(z)
    if np.linalg.norm(h) >= basin:
        raise NoConvergence(f"residual norm {np.linalg.norm(h):.3g} outside the basin ({basin})")
    for _ in range(max_iter + 1):
        if np.linalg.norm(h) <= tol:
            if np.any(z <= 0):
                raise LeftPositiveOrthant("projection left the positive orthant")
            return AngularRadial.from_vector(z)
        J = constraint_jacobian(z)
        z = z - np.linalg.lstsq(J, h, rcond=None)[0]
        h = _residual_vector(z)
    raise NoConvergence(f"no convergence after {max_iter} iterations (residual {np.linalg.norm(h):.3g})")


def projection_iterations(z0, tol: float = 1e-12, max_iter: int = 50) -> int:
    """Number of Gauss-Newton steps :func:`project_to_M` takes from ``z0``."""
    z = np.asarray(z0.vector() if isinstance(z0, AngularRadial) else z0, dtype=float)
    for it in range(max_iter + 1):
        h = _residual_vector(z)
        if np.linalg.norm(h) <= tol:
            return it
        z = z - np.linalg.lstsq(constraint_jacobian(z), h, rcond=None)[0]
    raise NoConvergence("no convergence")


def sample_M(n: int, seed, spread: float = 0.3, tol: float = 1e-10) -> AngularRadial:
    """Random point of M obtained by perturbing the regular polygon and projecting back."""
    if not 0 < spread <= 1:
        raise ValueError("spread must lie in (0, 1]")
    rng = np.random.default_rng(seed)
    u = rng.uniform(-1, 1, size=n)
    v = rng.uniform(-1, 1, size=n)
    scale = spread
    for _ in range(60):
        x = (2 * np.pi / n) * (1 + scale * u)
        r = 1 + scale * v
        x *= 2 * np.pi / x.sum()
        r *= n / r.sum()
        try:
            return project_to_M(np.concatenate([x, r]), tol=tol)
        except (NoConvergence, LeftPositiveOrthant):
            scale *= 0.7
    raise NoConvergence("could not land a sample on M")


# -- ratio estimation -------------------------------------------------------


@dataclass
class RatioEstimate:
    n: int
    sup_ratio: float
    limit_at_star: float
    interior_sup: float
    shell_ratio: float
    restarts: int
    seed: int
    exclusion_radius: float
    argmax: AngularRadial
    discarded: int = 0
    trajectories: list = field(default_factory=list, repr=False)

    def to_dict(self, include_trajectories: bool = False) -> dict:
        d = {
            "n": self.n,
            "sup_ratio": self.sup_ratio,
            "limit_at_star": self.limit_at_star,
            "interior_sup": self.interior_sup,
            "shell_ratio": self.shell_ratio,
            "restarts": self.restarts,
            "seed": self.seed,
            "exclusion_radius": self.exclusion_radius,
            "discarded": self.discarded,
            "argmax": self.argmax.to_dict(),
            "empirical": True,
        }
        if include_trajectories:
            d["trajectories"] = self.trajectories
        return d

    def to_json(self, include_trajectories: bool = False) -> str:
        return json.dumps(self.to_dict(include_trajectories), indent=2)


def hessians_at_star(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Hessians of ``f`` (unscaled) and ``g`` at the regular polygon, from closed forms."""
    from .spectral import g_hessian, f_hessian_rescaled

    t = math.pi / n
    return (2 * n / math.cos(t)) * f_hessian_rescaled(n), g_hessian(n)


def limit_ratio_at_star(n: int) -> tuple[float, np.ndarray]:
    """Largest generalized eigenvalue of (Hess f, Hess g) on the tangent space.

    Returns the value and the maximizing unit tangent vector in R^{2n}.
    """
    W = tangent_basis_at_star(n)
    Hf, Hg = hessians_at_star(n)
    A = W.T @ Hf @ W
    Bm = W.T @ Hg @ W
    vals, vecs = scipy.linalg.eigh(A, Bm)
    w = W @ vecs[:, -1]
    return float(vals[-1]), w / np.linalg.norm(w)


def _ratio(z):
    return float(f_eval(z) / g_eval(z))


def _tangent_projector(z):
    J = constraint_jacobian(z)
    Q, _ = np.linalg.qr(J.T)
    return np.eye(len(z)) - Q @ Q.T


def _ascend(z0, zs, excl, max_iter=300, gtol=1e-10, record=False):
    """Projected-gradient ascent of f/g on M with backtracking; stays outside the exclusion ball."""
    z = z0.copy()
    q = _ratio(z)
    path = [q] if record else None
    step = 0.1
    for _ in range(max_iter):
        f, g = float(f_eval(z)), float(g_eval(z))
        grad = (grad_f(z) * g - f * grad_g(z)) / (g * g)
        d = _tangent_projector(z) @ grad
        dn = np.linalg.norm(d)
        if dn <= gtol * max(1.0, abs(q)):
            break
        d /= dn
        s = step
        moved = False
        while s > 1e-12:
            try:
                cand = project_to_M(z + s * d, tol=1e-12, basin=0.5).vector()
            except (NoConvergence, LeftPositiveOrthant):
                s *= 0.5
                continue
            if np.linalg.norm(cand - zs) < excl or g_eval(cand) < 1e-14:
                s *= 0.5
                continue
            qc = _ratio(cand)
            if qc > q:
                z, q, moved = cand, qc, True
                step = min(2 * s, 0.5)
                break
            s *= 0.5
        if record:
            path.append(q)
        if not moved:
            break
    return z, q, path


def estimate_ratio_sup(
    n: int,
    restarts: int = 8,
    seed: int = 0,
    exclusion_radius: float = 1e-3,
    record_trajectories: bool = False,
) -> RatioEstimate:
    """Empirical ``sup f/g`` on M.

    Multi-start ascent covers M outside a small ball around the regular
    polygon; inside the ball the quotient is replaced by its limit, the top
    generalized eigenvalue of the Hessian pair on the tangent space. The
    result is a lower estimate of the true supremum, not a certificate.
    """
    if restarts < 1:
        raise ValueError("restarts must be at least 1")
    zs = z_star(n).vector()
    limit, w = limit_ratio_at_star(n)

    # cross-check the limit just outside the ball
    shell = project_to_M(zs + exclusion_radius * 1.5 * w)
    shell_ratio = _ratio(shell.vector())

    best_q, best_z = -np.inf, None
    discarded = 0
    trajectories = []
    children = np.random.SeedSequence(seed).spawn(restarts)
    for k, child in enumerate(children):
        rng = np.random.default_rng(child)
        spread = float(rng.uniform(0.02, 0.6))
        z0 = sample_M(n, rng.integers(2**63), spread).vector()
        if np.linalg.norm(z0 - zs) < exclusion_radius or g_eval(z0) < 1e-14:
            discarded += 1
            continue
        z, q, path = _ascend(z0, zs, exclusion_radius, record=record_trajectories)
        if record_trajectories:
            trajectories.append({"restart": k, "spread": spread, "ratios": path})
        if q > best_q:
            best_q, best_z = q, z
    if best_z is None:
        raise DegenerateDenominator("every restart was discarded")
    sup_ratio = max(best_q, limit, shell_ratio)
    argmax = AngularRadial.from_vector(best_z if best_q >= max(limit, shell_ratio) else shell.vector())
    return RatioEstimate(
        n=n,
        sup_ratio=sup_ratio,
        limit_at_star=limit,
        interior_sup=best_q,
        shell_ratio=shell_ratio,
        restarts=restarts,
        seed=seed,
        exclusion_radius=exclusion_radius,
        argmax=argmax,
        discarded=discarded,
        trajectories=trajectories,
    )


@dataclass(frozen=True)
class StabilityConstants:
    n: int
    C_ratio: float
    C_s: float
    C_r: float
    C_tau: float
    C_theorem: float
    C_convex: float

    def to_dict(self):
        return dict(self.__dict__)


def combine_constants(n: int, C_ratio: float) -> StabilityConstants:
    """Turn a bound ``f <= C_ratio g`` on M into constants for the polygon inequalities.

    * ``sigma_s^2 <= C_s delta`` for convex polygons,
    * ``sigma_r^2 <= C_r delta`` via the radial Bonnesen bound,
    * ``tau <= C_tau delta`` because ``delta = delta(P_c) + c_n tau``,
    * ``tau + sigma_s^2 + sigma_r^2 <= C_theorem delta`` for simple polygons,
      using that flips keep side lengths and do not increase the deficit.
    """
    if not C_ratio >= 1:
        raise InvalidRatio(f"C_ratio must be >= 1, got {C_ratio}")
    s2 = math.sin(math.pi / n) ** 2
    C_s = (C_ratio - 1) / n**2
    C_r = (1 + n * n * C_s) / (8 * n * n * s2)
    C_tau = 1 / (4 * n * math.tan(math.pi / n))
    return StabilityConstants(
        n=n,
        C_ratio=C_ratio,
        C_s=C_s,
        C_r=C_r,
        C_tau=C_tau,
        C_theorem=C_tau + C_s + C_r,
        C_convex=C_s + C_r,
    )


# -- sharpness --------------------------------------------------------------


@dataclass
class ScalingCurve:
    """``f(z_* + e w)/e^2`` and ``g(z_* + e w)/e^2`` along one tangent direction."""

    direction: np.ndarray = field(repr=False)
    eps: np.ndarray
    f_scaled: np.ndarray
    g_scaled: np.ndarray
    f_limit: float
    g_limit: float

    @property
    def f_error(self) -> np.ndarray:
        return np.abs(self.f_scaled - self.f_limit) / abs(self.f_limit)

    @property
    def g_error(self) -> np.ndarray:
        return np.abs(self.g_scaled - self.g_limit) / abs(self.g_limit)

    @property
    def ratio(self) -> np.ndarray:
        return self.f_scaled / self.g_scaled

    @property
    def limit_ratio(self) -> float:
        return self.f_limit / self.g_limit

    def orders(self, which: str = "f") -> np.ndarray:
        err = self.f_error if which == "f" else self.g_error
        return np.log(err[:-1] / err[1:]) / np.log(self.eps[:-1] / self.eps[1:])

    def rows(self):
        for k, e in enumerate(self.eps):
            yield (float(e), float(self.f_scaled[k]), float(self.g_scaled[k]), self.f_limit, self.g_limit)


def fg_near_star(dz) -> tuple[float, float]:
    """``f`` and ``g`` at ``z_* + dz`` without cancelling O(1) terms.

    Every difference from the regular polygon is formed in closed form, so
    the relative error stays near machine precision as ``dz -> 0``, where the
    plain evaluators lose about ``1e-16/|dz|^2``.
    """
    dz = np.asarray(dz, dtype=float)
    n = dz.size // 2
    dx, dr = dz[:n], dz[n:]
    t = 2 * math.pi / n
    x = t + dx
    dr1 = np.roll(dr, -1)
    # r_i r_{i+1} - 1
    drr = dr * dr1 + dr + dr1
    dcos = -2 * np.sin(t + dx / 2) * np.sin(dx / 2)
    dsin = 2 * np.cos(t + dx / 2) * np.sin(dx / 2)
    # s_i^2 - s_*^2 with s_i^2 = r_i^2 + r_{i+1}^2 - 2 r_i r_{i+1} cos x_i
    dsq = dr * (dr + 2) + dr1 * (dr1 + 2) - 2 * (drr * np.cos(x) + dcos)
    dF = 0.5 * np.sum(drr * np.sin(x) + dsin)
    cn = 4 * n * math.tan(math.pi / n)
    s_star = 2 * math.sin(math.pi / n)
    ds = dsq / (np.sqrt(s_star**2 + dsq) + s_star)
    D = float(np.sum(ds))
    f = n * float(np.sum(dsq)) - cn * dF
    g = 2 * n * s_star * D + D * D - cn * dF
    return f, g


def scaling_curve(n: int, w, eps=(1e-1, 1e-2, 1e-3, 1e-4)) -> ScalingCurve:
    Hf, Hg = hessians_at_star(n)
    w = np.asarray(w, dtype=float)
    eps = np.asarray(eps, dtype=float)
    vals = np.array([fg_near_star(e * w) for e in eps])
    fs = vals[:, 0] / eps**2
    gs = vals[:, 1] / eps**2
    return ScalingCurve(w, eps, fs, gs, 0.5 * float(w @ Hf @ w), 0.5 * float(w @ Hg @ w))


def random_tangent_directions(n: int, count: int, seed) -> np.ndarray:
    """Unit vectors of the tangent space at ``z_*`` with positive g-curvature."""
    W = tangent_basis_at_star(n)
    _, Hg = hessians_at_star(n)
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        w = W @ rng.standard_normal(W.shape[1])
        w /= np.linalg.norm(w)
        if w @ Hg @ w > 1e-8:
            out.append(w)
    return np.array(out)


def curves_csv(curves) -> str:
    lines = ["direction,eps,f_over_eps2,g_over_eps2,f_limit,g_limit"]
    for d, c in enumerate(curves):
        for row in c.rows():
            lines.append(",".join([str(d)] + [repr(v) for v in row]))
    return "\n".join(lines) + "\n"
