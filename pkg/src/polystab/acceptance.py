"""Acceptance checks, shared by ``polystab verify`` and the test suite.

Each ``criterion_*`` function returns a :class:`CriterionResult`; none of them
raise on a numerical failure. ``quick=True`` caps n at 16 and corpora at 50
polygons.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import circulant as circ
from . import convexify as cv
from . import manifold as mf
from . import polygon as pg
from . import spectral as sp
from .errors import PolystabError, StepBudgetExceeded

DART = [(0.0, 0.0), (4.0, 0.0), (2.0, 1.0), (2.0, 3.0)]


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0
    data: dict = field(default_factory=dict, repr=False)

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return f"[{flag}] {self.number:2d}. {self.name}: {self.detail} ({self.seconds:.1f}s)"


def _timed(number, name, budget=None):
    def wrap(fn):
        def run(*args, **kw):
            t0 = time.perf_counter()
            passed, detail, data = fn(*args, **kw)
            dt = time.perf_counter() - t0
            if budget is not None and dt > budget:
                passed = False
                detail += f"; runtime {dt:.1f}s over the {budget:.0f}s budget"
            return CriterionResult(number, name, passed, detail, dt, data)

        run.__name__ = fn.__name__
        run.__doc__ = fn.__doc__
        return run

    return wrap


def _nmax(quick, full):
    return min(full, 16) if quick else full


@lru_cache(maxsize=None)
def flip_corpus(n: int, count: int, seed: int = 2024) -> tuple:
    return tuple(pg.random_corpus(n, count, seed))


@lru_cache(maxsize=None)
def traced_corpus(n: int, count: int, seed: int = 2024) -> tuple:
    out = []
    for P in flip_corpus(n, count, seed):
        try:
            out.append((P, cv.convexify(P, max_steps=1000)))
        except StepBudgetExceeded as exc:
            out.append((P, exc.trace))
    return tuple(out)


# -- 1 ----------------------------------------------------------------------


@_timed(1, "spectral identities", budget=5.0)
def criterion_identities(quick=False, tol=1e-10):
    worst = {"K": 0.0, "D": 0.0}
    t = None
    for n in range(3, _nmax(quick, 64) + 1):
        B, K, D, H = sp.matrix_B(n), sp.matrix_K(n), sp.matrix_D(n), sp.matrix_H(n)
        t = math.pi / n
        BtB = B.T @ B
        worst["K"] = max(worst["K"], float(np.max(np.abs(K - BtB - H / math.cos(t) ** 2))))
        worst["D"] = max(
            worst["D"], float(np.max(np.abs(D - BtB - H / (math.sin(t) ** 2 * math.cos(t) ** 2))))
        )
    ok = max(worst.values()) <= tol
    return ok, f"max |K-BtB-H/cos2| = {worst['K']:.2e}, max |D-BtB-H/(s2c2)| = {worst['D']:.2e} (tol {tol:g})", worst


# -- 2 ----------------------------------------------------------------------


@_timed(2, "eigenvalue closed form", budget=10.0)
def criterion_eigenvalues(quick=False, tol=1e-10):
    worst_l = worst_m = 0.0
    for n in range(3, _nmax(quick, 64) + 1):
        b = sp.build_bundle(n)
        lam_dense, mu_dense = sp.dense_spectra(b)
        worst_l = max(worst_l, float(np.max(np.abs(np.sort(b.lam) - lam_dense))))
        worst_m = max(worst_m, float(np.max(np.abs(np.sort(b.mu) - mu_dense))))
    ok = worst_l <= tol and worst_m <= tol
    return ok, f"lambda err {worst_l:.2e}, mu err {worst_m:.2e} (tol {tol:g})", {"lambda": worst_l, "mu": worst_m}


# -- 3 ----------------------------------------------------------------------


@_timed(3, "circulant eigenbasis")
def criterion_circulant(quick=False, tol=1e-10, per_n=20, seed=3):
    rng = np.random.default_rng(seed)
    worst_eig = worst_orth = 0.0
    for n in range(3, _nmax(quick, 32) + 1):
        basis = circ.real_symmetric_eigenbasis(n)
        G = basis.vectors @ basis.vectors.T
        worst_orth = max(worst_orth, float(np.max(np.abs(G - np.diag(np.diag(G))))))
        for _ in range(per_n):
            C = circ.circulant(circ.symmetric_generator(n, rng))
            worst_eig = max(worst_eig, circ.eigenbasis_residual(C, basis))
    ok = worst_eig <= tol and worst_orth <= tol
    return ok, f"|Av-psi v| {worst_eig:.2e}, orthogonality {worst_orth:.2e} (tol {tol:g})", {}


# -- 4 ----------------------------------------------------------------------


@_timed(4, "second-order conditions at the regular polygon", budget=60.0)
def criterion_local_conditions(quick=False, samples=10_000, seed=4):
    nmax = _nmax(quick, 32)
    worst = {"value": 0.0, "grad": 0.0, "tangent": 0.0}
    violations = 0
    min_rayleigh = np.inf
    problems = []
    for n in range(3, nmax + 1):
        try:
            rep = sp.gradient_and_hessian_fd_check(n, check_hessian=False)
        except PolystabError as exc:
            rep = exc.report
            problems.append(f"n={n}: {exc}")
        e = rep.errors
        worst["value"] = max(worst["value"], e["f(z*)"], e["g(z*)"])
        worst["grad"] = max(worst["grad"], e["grad f"], e["grad g"])
        worst["tangent"] = max(worst["tangent"], e["grad f on tangent"], e["grad g on tangent"])
        b = sp.build_bundle(n)
        try:
            sp.check_U_le_V(b, samples, seed + n, tol=1e-12)
        except PolystabError as exc:
            violations += exc.report.values["violations"]
            problems.append(f"n={n}: {exc}")
        try:
            min_rayleigh = min(min_rayleigh, sp.min_rayleigh_U_on_Htilde(b))
        except PolystabError as exc:
            problems.append(f"n={n}: {exc}")
            min_rayleigh = -np.inf
    ok = (
        worst["value"] <= 1e-12
        and worst["grad"] <= 1e-6
        and worst["tangent"] <= 1e-10
        and violations == 0
        and min_rayleigh > 0
        and not problems
    )
    detail = (
        f"|f(z*)|,|g(z*)| <= {worst['value']:.1e}; FD grad err {worst['grad']:.1e}; "
        f"tangent residual {worst['tangent']:.1e}; U<=V violations {violations}/{samples * (nmax - 2)}; "
        f"min Rayleigh on Htilde {min_rayleigh:.4f}"
    )
    return ok, detail, {"problems": problems}


# -- 5 ----------------------------------------------------------------------


@_timed(5, "Hessian closed forms")
def criterion_hessians(quick=False, tol=1e-5):
    worst_f = worst_g = 0.0
    for n in range(3, 13):
        try:
            rep = sp.gradient_and_hessian_fd_check(n, hess_tol=tol)
        except PolystabError as exc:
            rep = exc.report
        worst_f = max(worst_f, rep.errors["hess f"])
        worst_g = max(worst_g, rep.errors["hess g"])
    ok = worst_f <= tol and worst_g <= tol
    return ok, f"FD vs closed form: f {worst_f:.2e}, g {worst_g:.2e} (tol {tol:g})", {}


# -- 6 ----------------------------------------------------------------------


def check_trace(P: pg.Polygon, trace: cv.FlipTrace) -> list[str]:
    """Per-trace invariants of the flip suite; returns a list of problems."""
    problems = []
    if not trace.complete:
        problems.append("step budget exhausted")
    for k, step in enumerate(trace.steps):
        L0 = pg.perimeter(step.polygon_before)
        L1 = pg.perimeter(step.polygon_after)
        if abs(L1 - L0) > 1e-12 * L0:
            problems.append(f"step {k}: perimeter drift {abs(L1 - L0) / L0:.2e}")
        if not step.tau_i > 0:
            problems.append(f"step {k}: nonpositive area gain")
        gain = pg.signed_area(step.polygon_after) - pg.signed_area(step.polygon_before)
        if abs(gain - step.tau_i) > 1e-9 * max(1.0, abs(gain)):
            problems.append(f"step {k}: area gain {gain} != 2*pocket area {step.tau_i}")
    if not pg.is_convex(trace.final):
        problems.append("final polygon not convex")
    s0 = np.sort(pg.side_lengths(P))
    s1 = np.sort(pg.side_lengths(trace.final))
    if np.max(np.abs(s0 - s1)) > 1e-9:
        problems.append("side lengths changed")
    return problems


@_timed(6, "flip suite")
def criterion_flips(quick=False, count=200):
    count = 50 if quick else count
    bad = []
    steps_max = 0
    total = 0
    for n in range(4, 13):
        for k, (P, trace) in enumerate(traced_corpus(n, count)):
            total += 1
            steps_max = max(steps_max, len(trace.steps))
            probs = check_trace(P, trace)
            if probs:
                bad.append(f"n={n} #{k}: {probs[0]}")
    dart = pg.validate(DART)
    tr = cv.convexify(dart)
    moved = tr.final.vertices[2]
    dart_err = max(abs(tr.tau - 4.0), float(np.max(np.abs(moved - np.array([50 / 13, 29 / 13])))))
    ok = not bad and len(tr) == 1 and dart_err <= 1e-12
    detail = (
        f"{total - len(bad)}/{total} traces clean, max {steps_max} flips; "
        f"dart: {len(tr)} flip, tau={tr.tau:.15g}, vertex err {dart_err:.1e}"
    )
    return ok, detail, {"bad": bad}


# -- 7 ----------------------------------------------------------------------


@_timed(7, "deficit bookkeeping")
def criterion_bookkeeping(quick=False, count=200):
    count = 50 if quick else count
    worst = 0.0
    for n in range(4, 13):
        for P, trace in traced_corpus(n, count):
            m0, m1 = pg.metrics(P), pg.metrics(trace.final)
            worst = max(worst, abs(m0.delta - m1.delta - m0.c_n * trace.tau) / m0.L**2)
    dart = pg.validate(DART)
    tr = cv.convexify(dart)
    d0, d1 = pg.metrics(dart).delta, pg.metrics(tr.final).delta
    # independent oracle: L from the four side lengths, areas 4 and 8
    L = 6 + math.sqrt(5) + math.sqrt(13)
    dart_err = max(abs(d0 - (L * L - 64)), abs(d1 - (L * L - 128)), abs(d0 - d1 - 16 * tr.tau))
    ok = worst <= 1e-9 and dart_err <= 1e-9
    detail = f"max |d(P)-d(Pc)-c_n tau|/L^2 = {worst:.1e}; dart {d0:.6f} = {d1:.6f} + {16 * tr.tau:g}"
    return ok, detail, {}


# -- 8 ----------------------------------------------------------------------


@_timed(8, "radial Bonnesen bound")
def criterion_bonnesen(quick=False, count=1000, seed=8):
    count = 50 if quick else count
    worst = -np.inf
    for n in range(3, 11):
        s2 = math.sin(math.pi / n) ** 2
        for P in pg.random_corpus(n, count, seed):
            m = pg.metrics(P)
            slack = 8 * n * n * s2 * m.sigma_r2 - (n * m.S - m.c_n * m.F) - 1e-9 * m.L**2
            worst = max(worst, slack / m.L**2)
    return worst <= 0, f"max (lhs - rhs - 1e-9 L^2)/L^2 = {worst:.3e} over n=3..10", {}


# -- 9 ----------------------------------------------------------------------


@lru_cache(maxsize=None)
def stability_constants(n: int, restarts: int = 8, seed: int = 9) -> mf.StabilityConstants:
    est = mf.estimate_ratio_sup(n, restarts=restarts, seed=seed)
    return mf.combine_constants(n, est.sup_ratio)


@_timed(9, "empirical stability inequality")
def criterion_stability(quick=False, count=200, restarts=8):
    count = 50 if quick else count
    worst = worst_convex = 0.0
    fails = []
    convex_seen = 0
    for n in range(4, 13):
        C = stability_constants(n, restarts)
        for k, (P, trace) in enumerate(traced_corpus(n, count)):
            m = pg.metrics(P)
            lhs = trace.tau + m.variation
            rhs = C.C_theorem * m.delta + 1e-9 * m.L**2
            worst = max(worst, lhs / rhs)
            if lhs > rhs:
                fails.append(f"n={n} #{k}")
            if pg.is_convex(P):
                convex_seen += 1
                rhs_c = C.C_convex * m.delta + 1e-9 * m.L**2
                worst_convex = max(worst_convex, m.variation / rhs_c)
                if m.variation > rhs_c:
                    fails.append(f"n={n} #{k} (convex form)")
    ok = not fails
    detail = (
        f"max (tau+v)/(C delta) = {worst:.3f}; convex members {convex_seen}, "
        f"max v/(C' delta) = {worst_convex:.3f}"
    )
    return ok, detail, {"fails": fails}


# -- 10 ---------------------------------------------------------------------


@_timed(10, "sharpness scaling")
def criterion_sharpness(quick=False, directions=10, seed=10):
    problems = []
    worst_top = 0.0
    for n in (4, 6, 8):
        limit, w_top = mf.limit_ratio_at_star(n)
        for d, w in enumerate(mf.random_tangent_directions(n, directions, (seed, n))):
            c = mf.scaling_curve(n, w)
            for which, err in (("f", c.f_error), ("g", c.g_error)):
                if not np.all(np.diff(err) < 0):
                    problems.append(f"n={n} dir {d}: {which} error not decreasing")
            if abs(c.ratio[-1] / c.limit_ratio - 1) > 0.1:
                problems.append(f"n={n} dir {d}: ratio off its quadratic limit")
            if c.ratio[-1] > 1.1 * limit:
                problems.append(f"n={n} dir {d}: ratio above limit_at_star")
        top = mf.scaling_curve(n, w_top)
        rel = abs(top.ratio[-1] / limit - 1)
        worst_top = max(worst_top, rel)
        if rel > 0.1:
            problems.append(f"n={n}: top direction ratio {rel:.2%} from limit_at_star")
    detail = (
        f"{3 * directions} directions, errors decrease with eps; "
        f"top-direction ratio within {worst_top:.1e} of limit_at_star at eps=1e-4"
    )
    if problems:
        detail = f"{len(problems)} problems, first: {problems[0]}"
    return not problems, detail, {"problems": problems}


CRITERIA = (
    criterion_identities,
    criterion_eigenvalues,
    criterion_circulant,
    criterion_local_conditions,
    criterion_hessians,
    criterion_flips,
    criterion_bookkeeping,
    criterion_bonnesen,
    criterion_stability,
    criterion_sharpness,
)


def run_all(quick: bool = False, echo=print) -> list[CriterionResult]:
    results = []
    for crit in CRITERIA:
        res = crit(quick=quick)
        if echo:
            echo(res.line())
        results.append(res)
    return results
