"""Pocket flips: convexifying a simple polygon without changing its side lengths.

A pocket is a region inside the convex hull but outside the polygon, cut off
by a hull edge (the *lid*) whose endpoints are not adjacent on the polygon.
Reflecting the polygon chain under the lid across the lid line keeps every
side length, keeps the polygon simple and adds twice the pocket area.
Repeating this terminates in a convex polygon ``P_c`` after finitely many
flips; the total area gain is ``tau(P) = |P_c| - |P|``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateHull, NotSimple, StepBudgetExceeded
from .polygon import CCW, Polygon, is_simple, signed_area, validate

FIRST_POCKET = "first_pocket"
LARGEST_POCKET = "largest_pocket"


@dataclass(frozen=True)
class Pocket:
    lid: tuple[int, int]
    chain: tuple[int, ...]
    pocket_area: float


@dataclass(frozen=True)
class FlipStep:
    pocket: Pocket
    tau_i: float
    polygon_before: Polygon = field(repr=False)
    polygon_after: Polygon = field(repr=False)

    def to_dict(self) -> dict:
        return {
            "lid": list(self.pocket.lid),
            "chain": list(self.pocket.chain),
            "tau_i": self.tau_i,
            "vertices_after": self.polygon_after.vertices.tolist(),
        }


@dataclass
class FlipTrace:
    initial: Polygon
    steps: list[FlipStep]
    final: Polygon
    complete: bool = True

    @property
    def tau(self) -> float:
        return float(sum(s.tau_i for s in self.steps))

    @property
    def alpha_c(self) -> float:
        # nested polygons: the symmetric difference is a plain area difference
        return signed_area(self.final) - signed_area(self.initial)

    def __len__(self):
        return len(self.steps)

    def to_dict(self) -> dict:
        return {
            "steps": [s.to_dict() for s in self.steps],
            "tau": self.tau,
            "alpha_c": self.alpha_c,
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull(points, eps: float = 1e-9) -> list[int]:
    """Indices of the hull vertices in counter-clockwise order (monotone chain).

    Points within ``eps`` of a hull edge are left out.
    """
    pts = np.asarray(points, dtype=float)
    if len(pts) < 3:
        raise DegenerateHull("need at least 3 points")
    order = sorted(range(len(pts)), key=lambda i: (pts[i, 0], pts[i, 1]))

    def keep_turn(h, i):
        a, b, c = pts[h[-2]], pts[h[-1]], pts[i]
        scale = max(np.hypot(*(c - a)), 1.0)
        return _cross(a, b, c) > eps * scale

    lower: list[int] = []
    for i in order:
        while len(lower) >= 2 and not keep_turn(lower, i):
            lower.pop()
        lower.append(i)
    upper: list[int] = []
    for i in reversed(order):
        while len(upper) >= 2 and not keep_turn(upper, i):
            upper.pop()
        upper.append(i)
    hull = lower[:-1] + upper[:-1]
    if len(hull) < 3:
        raise DegenerateHull("points are collinear within eps")
    return hull


def _line_distance(a, b, p):
    d = b - a
    return abs(_cross(a, b, p)) / np.hypot(*d)


def find_pockets(P: Polygon) -> list[Pocket]:
    """Pockets of a simple counter-clockwise polygon, in counter-clockwise hull order.

    Chain vertices lying on the lid line (within eps) count as hull vertices
    and split the chain, so no zero-area pocket is ever reported.
    """
    if P.orientation != CCW or not is_simple(P):
        raise NotSimple("pockets are only defined for simple polygons")
    v = P.vertices
    n = P.n
    hull = convex_hull(v, P.eps)
    start = hull.index(min(hull))
    hull = hull[start:] + hull[:start]
    pockets = []
    for a, b in zip(hull, hull[1:] + hull[:1]):
        span = (b - a) % n
        if span <= 1:
            continue
        chain = [(a + k) % n for k in range(1, span)]
        anchors = [a] + [i for i in chain if _line_distance(v[a], v[b], v[i]) <= P.eps] + [b]
        for u, w in zip(anchors, anchors[1:]):
            sub = [(u + k) % n for k in range(1, (w - u) % n)]
            if not sub:
                continue
            ring = v[[u, *sub, w]]
            area = abs(signed_area(Polygon(ring)))
            if area <= P.eps * np.hypot(*(v[w] - v[u])):
                continue
            pockets.append(Pocket((u, w), tuple(sub), float(area)))
    return pockets


def reflect_across_line(points, a, b) -> np.ndarray:
    """Mirror images of ``points`` in the line through ``a`` and ``b``."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    a = np.asarray(a, dtype=float)
    d = np.asarray(b, dtype=float) - a
    t = ((points - a) @ d) / (d @ d)
    foot = a + t[:, None] * d
    return 2 * foot - points


def flip(P: Polygon, pocket: Pocket) -> FlipStep:
    v = P.vertices.copy()
    i, j = pocket.lid
    idx = list(pocket.chain)
    v[idx] = reflect_across_line(v[idx], v[i], v[j])
    after = validate(v, P.eps)
    if after.orientation != CCW or not np.array_equal(after.vertices, v):
        # flipping a genuine pocket cannot reverse or break the polygon
        raise NotSimple("flip produced a non-simple polygon (near-degenerate input?)")
    return FlipStep(pocket, 2.0 * pocket.pocket_area, P, after)


def convexify(P: Polygon, policy: str = FIRST_POCKET, max_steps: int = 1000) -> FlipTrace:
    """Flip pockets until the polygon is convex.

    ``first_pocket`` takes the first pocket in counter-clockwise hull order
    starting from the lowest vertex index; ``largest_pocket`` the one with the
    largest area. Raises :class:`StepBudgetExceeded` (with the partial trace
    attached, ``complete=False``) after ``max_steps`` flips.
    """
    if policy not in (FIRST_POCKET, LARGEST_POCKET):
        raise ValueError(f"unknown policy {policy!r}")
    if P.orientation != CCW or not is_simple(P):
        raise NotSimple("convexification is implemented for simple polygons only")
    steps: list[FlipStep] = []
    cur = P
    while True:
        pockets = find_pockets(cur)
        if not pockets:
            return FlipTrace(P, steps, cur)
        if len(steps) >= max_steps:
            trace = FlipTrace(P, steps, cur, complete=False)
            raise StepBudgetExceeded(f"still not convex after {max_steps} flips", trace)
        pocket = pockets[0] if policy == FIRST_POCKET else max(pockets, key=lambda p: p.pocket_area)
        step = flip(cur, pocket)
        steps.append(step)
        cur = step.polygon_after


def tau(P: Polygon, policy: str = FIRST_POCKET) -> float:
    """Total area gained by the flip sequence; zero exactly for convex polygons."""
    return convexify(P, policy).tau


def alpha_c(P: Polygon, policy: str = FIRST_POCKET) -> float:
    """Area of the symmetric difference between P and its flip convexification."""
    return convexify(P, policy).alpha_c
