"""Planar polygons and the scalar quantities built from them.

Vertices are stored as an ``(n, 2)`` float array. Indices are 0-based and wrap
modulo ``n``. The *centroid* used everywhere in this package is the vertex
centroid (arithmetic mean of the vertices), not the area centroid: radii are
measured from the point ``O`` with ``sum(OA_i) = 0``.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np

from .errors import (
    DuplicateVertex,
    NonFinite,
    NotStarShaped,
    ParseError,
    SelfIntersecting,
    TooFewVertices,
)
from .manifold import AngularRadial

CCW = "CCW"
CW = "CW"
UNKNOWN = "unknown"

DEFAULT_EPS = 1e-9


def default_eps() -> float:
    """Geometric tolerance, overridable with the ``POLYSTAB_EPS`` variable."""
    raw = os.environ.get("POLYSTAB_EPS")
    if raw is None:
        return DEFAULT_EPS
    value = float(raw)
    if not (value >= 0 and math.isfinite(value)):
        raise ValueError(f"POLYSTAB_EPS must be a finite nonnegative number, got {raw!r}")
    return value


class Point2(NamedTuple):
    x: float
    y: float


@dataclass(frozen=True, eq=False)
class Polygon:
    """An ordered vertex list.

    Build instances with :func:`validate`; the constructor itself does not check
    anything.
    """

    vertices: np.ndarray
    orientation: str = UNKNOWN
    eps: float = DEFAULT_EPS

    def __post_init__(self):
        v = np.array(self.vertices, dtype=float)
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)

    @property
    def n(self) -> int:
        return len(self.vertices)

    def __len__(self):
        return self.n

    def __repr__(self):
        return f"Polygon(n={self.n}, orientation={self.orientation})"

    def points(self) -> list[Point2]:
        return [Point2(float(x), float(y)) for x, y in self.vertices]

    def edges(self) -> np.ndarray:
        """Edge vectors ``A_{i+1} - A_i``."""
        return np.roll(self.vertices, -1, axis=0) - self.vertices


@dataclass(frozen=True)
class PolygonMetrics:
    n: int
    side_lengths: np.ndarray
    radii: np.ndarray
    centroid: Point2
    L: float
    S: float
    F: float
    c_n: float
    delta: float
    sigma_s2: float
    sigma_r2: float
    variation: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "variation", self.sigma_s2 + self.sigma_r2)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "side_lengths": [float(v) for v in self.side_lengths],
            "radii": [float(v) for v in self.radii],
            "centroid": [self.centroid.x, self.centroid.y],
            "L": self.L,
            "S": self.S,
            "F": self.F,
            "c_n": self.c_n,
            "delta": self.delta,
            "sigma_s2": self.sigma_s2,
            "sigma_r2": self.sigma_r2,
            "variation": self.variation,
        }


def deficit_coefficient(n: int) -> float:
    """``c_n = 4 n tan(pi/n)``, the area coefficient of the deficit."""
    return 4.0 * n * math.tan(math.pi / n)


# -- construction -----------------------------------------------------------


def _shoelace(v: np.ndarray) -> float:
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def validate(raw_vertices, eps: float | None = None) -> Polygon:
    """Check raw vertices and return a normalized :class:`Polygon`.

    Simple clockwise polygons are reversed so that every simple polygon comes
    back counter-clockwise. Self-crossing input keeps its order and gets
    orientation ``"unknown"``.
    """
    if eps is None:
        eps = default_eps()
    v = np.asarray(raw_vertices, dtype=float)
    if v.ndim != 2 or v.shape[1] != 2:
        v = v.reshape(-1, 2) if v.size % 2 == 0 and v.size else v
        if v.ndim != 2 or v.shape[1] != 2:
            raise ParseError("vertices must be a sequence of (x, y) pairs")
    if not np.all(np.isfinite(v)):
        raise NonFinite("vertex coordinates must be finite")
    n = len(v)
    if n < 3:
        raise TooFewVertices(f"a polygon needs at least 3 vertices, got {n}")
    gaps = np.hypot(*(np.roll(v, -1, axis=0) - v).T)
    bad = np.flatnonzero(gaps <= eps)
    if bad.size:
        i = int(bad[0])
        raise DuplicateVertex(f"vertices {i} and {(i + 1) % n} coincide within eps={eps}")

    probe = Polygon(v, UNKNOWN, eps)
    if not is_simple(probe):
        return probe
    area = _shoelace(v)
    if area < 0:
        v = v[::-1]
    return Polygon(v, CCW, eps)


def regular_polygon(n: int, radius: float = 1.0, phase: float = 0.0, center=(0.0, 0.0)) -> Polygon:
    """Convex regular n-gon inscribed in a circle of the given radius."""
    theta = phase + 2.0 * np.pi * np.arange(n) / n
    v = np.column_stack([center[0] + radius * np.cos(theta), center[1] + radius * np.sin(theta)])
    return validate(v)


# -- scalar quantities ------------------------------------------------------


def signed_area(P: Polygon) -> float:
    """Shoelace area; positive for counter-clockwise simple polygons."""
    return _shoelace(P.vertices)


def vertex_centroid(P: Polygon) -> Point2:
    c = P.vertices.mean(axis=0)
    return Point2(float(c[0]), float(c[1]))


def side_lengths(P: Polygon) -> np.ndarray:
    return np.hypot(*P.edges().T)


def perimeter(P: Polygon) -> float:
    return float(side_lengths(P).sum())


def area(P: Polygon) -> float:
    """Unsigned area of a simple polygon."""
    if not is_simple(P):
        raise SelfIntersecting("area is only defined here for simple polygons")
    return abs(signed_area(P))


def metrics(P: Polygon) -> PolygonMetrics:
    n = P.n
    sides = side_lengths(P)
    c = P.vertices.mean(axis=0)
    radii = np.hypot(*(P.vertices - c).T)
    L = float(sides.sum())
    S = float(np.dot(sides, sides))
    F = area(P)
    cn = deficit_coefficient(n)
    sigma_s2 = S / n - L * L / (n * n)
    sigma_r2 = float(np.dot(radii, radii)) / n - float(radii.sum()) ** 2 / (n * n)
    return PolygonMetrics(
        n=n,
        side_lengths=sides,
        radii=radii,
        centroid=Point2(float(c[0]), float(c[1])),
        L=L,
        S=S,
        F=F,
        c_n=cn,
        delta=L * L - cn * F,
        sigma_s2=sigma_s2,
        sigma_r2=sigma_r2,
    )


# -- predicates -------------------------------------------------------------


def _orient(a, b, c, eps):
    """Sign of the turn a->b->c; 0 when c is within eps of the line ab."""
    cross = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
    scale = math.hypot(b[0] - a[0], b[1] - a[1])
    if abs(cross) <= eps * max(scale, 1.0):
        return 0
    return 1 if cross > 0 else -1


def _on_segment(a, b, c, eps):
    # c assumed collinear with ab
    return (
        min(a[0], b[0]) - eps <= c[0] <= max(a[0], b[0]) + eps
        and min(a[1], b[1]) - eps <= c[1] <= max(a[1], b[1]) + eps
    )


def segments_intersect(p1, p2, q1, q2, eps: float = DEFAULT_EPS) -> bool:
    """Closed-segment intersection test with eps-guarded orientations."""
    d1 = _orient(q1, q2, p1, eps)
    d2 = _orient(q1, q2, p2, eps)
    d3 = _orient(p1, p2, q1, eps)
    d4 = _orient(p1, p2, q2, eps)
    if d1 * d2 < 0 and d3 * d4 < 0:
        return True
    if d1 == 0 and _on_segment(q1, q2, p1, eps):
        return True
    if d2 == 0 and _on_segment(q1, q2, p2, eps):
        return True
    if d3 == 0 and _on_segment(p1, p2, q1, eps):
        return True
    if d4 == 0 and _on_segment(p1, p2, q2, eps):
        return True
    return False


def is_simple(P: Polygon) -> bool:
    """O(n^2) check that the boundary does not touch or cross itself."""
    v = P.vertices.tolist()
    n = len(v)
    eps = P.eps
    for i in range(n):
        a, b = v[i], v[(i + 1) % n]
        # adjacent edge i+1 may only share vertex b: reject a fold-back
        c = v[(i + 2) % n]
        if _orient(a, b, c, eps) == 0:
            ab = (b[0] - a[0], b[1] - a[1])
            bc = (c[0] - b[0], c[1] - b[1])
            if ab[0] * bc[0] + ab[1] * bc[1] < 0:
                return False
        for j in range(i + 2, n):
            if i == 0 and j == n - 1:
                continue
            if segments_intersect(a, b, v[j], v[(j + 1) % n], eps):
                return False
    return True


def is_convex(P: Polygon) -> bool:
    """True when every turn has the same sign (near-zero turns ignored)."""
    e = P.edges()
    e_next = np.roll(e, -1, axis=0)
    cross = e[:, 0] * e_next[:, 1] - e[:, 1] * e_next[:, 0]
    scale = np.maximum(np.hypot(*e.T) * np.hypot(*e_next.T), 1.0)
    signs = np.where(np.abs(cross) <= P.eps * scale, 0, np.sign(cross))
    if np.any(signs > 0) and np.any(signs < 0):
        return False
    # a convex polygon winds exactly once
    turn = np.arctan2(cross, np.einsum("ij,ij->i", e, e_next))
    return bool(abs(abs(turn.sum()) - 2 * np.pi) < 1e-6)


# -- angular/radial coordinates ---------------------------------------------


def to_angular_radial(P: Polygon) -> AngularRadial:
    """Central angles and radii about the vertex centroid.

    ``x[i]`` is the counter-clockwise angle from ``OA_i`` to ``OA_{i+1}``.
    """
    c = P.vertices.mean(axis=0)
    d = P.vertices - c
    r = np.hypot(d[:, 0], d[:, 1])
    if np.any(r <= P.eps):
        raise NotStarShaped("a vertex coincides with the vertex centroid")
    theta = np.arctan2(d[:, 1], d[:, 0])
    x = np.mod(np.roll(theta, -1) - theta, 2 * np.pi)
    if np.any(x <= P.eps) or np.any(x >= np.pi - P.eps) or abs(x.sum() - 2 * np.pi) > 1e-9:
        raise NotStarShaped("vertices do not turn monotonically around the vertex centroid")
    return AngularRadial(x, r)


def from_angular_radial(z: AngularRadial, eps: float | None = None) -> Polygon:
    """Place ``A_1`` on the positive x-axis and lay out the rest by angle."""
    theta = np.concatenate([[0.0], np.cumsum(z.x)[:-1]])
    v = np.column_stack([z.r * np.cos(theta), z.r * np.sin(theta)])
    return validate(v, eps)


# -- file formats -----------------------------------------------------------


def polygon_from_json(text: str, eps: float | None = None) -> Polygon:
    try:
        doc = json.loads(text)
        verts = doc["vertices"]
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise ParseError(f"not a polygon JSON document: {exc}") from exc
    try:
        arr = np.array([[float(p[0]), float(p[1])] for p in verts])
    except (TypeError, ValueError, IndexError) as exc:
        raise ParseError(f"bad vertex entry: {exc}") from exc
    return validate(arr, eps)


def polygon_from_csv(text: str, eps: float | None = None) -> Polygon:
    rows = []
    for k, row in enumerate(csv.reader(io.StringIO(text))):
        row = [c.strip() for c in row if c.strip()]
        if not row:
            continue
        try:
            rows.append((float(row[0]), float(row[1])))
        except (ValueError, IndexError):
            if k == 0 and not rows:
                continue  # header line
            raise ParseError(f"line {k + 1}: expected 'x,y', got {row!r}") from None
    return validate(np.array(rows, dtype=float).reshape(-1, 2), eps)


def read_polygon(path, eps: float | None = None) -> Polygon:
    """Load a polygon from a JSON (``{"vertices": [[x, y], ...]}``) or CSV file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    if path.suffix.lower() == ".json" or text.lstrip().startswith("{"):
        return polygon_from_json(text, eps)
    return polygon_from_csv(text, eps)


def polygon_to_json(P: Polygon, name: str | None = None) -> str:
    doc = {"vertices": P.vertices.tolist()}
    if name is not None:
        doc["name"] = name
    return json.dumps(doc)


# -- random corpora ---------------------------------------------------------


def random_star_polygon(n: int, rng: np.random.Generator, min_radius: float = 0.2) -> Polygon:
    """Simple polygon star-shaped about the origin, every angular gap below pi."""
    while True:
        gaps = rng.dirichlet(np.full(n, 2.0)) * 2 * np.pi
        if gaps.max() < 0.9 * np.pi and gaps.min() > 1e-3:
            break
    theta = rng.uniform(0, 2 * np.pi) + np.concatenate([[0.0], np.cumsum(gaps)[:-1]])
    r = rng.uniform(min_radius, 1.0, size=n)
    return validate(np.column_stack([r * np.cos(theta), r * np.sin(theta)]))


def random_two_opt_polygon(n: int, rng: np.random.Generator) -> Polygon:
    """Random points in the unit square joined in random order, then untangled by 2-opt moves."""
    while True:
        pts = rng.uniform(0, 1, size=(n, 2))
        order = list(rng.permutation(n))
        for _ in range(50 * n * n):
            crossing = _first_crossing(pts, order)
            if crossing is None:
                break
            i, j = crossing
            order[i + 1 : j + 1] = order[i + 1 : j + 1][::-1]
        else:
            continue
        try:
            P = validate(pts[order])
        except DuplicateVertex:
            continue
        if P.orientation == CCW:
            return P


def _first_crossing(pts, order):
    n = len(order)
    for i in range(n):
        a, b = pts[order[i]], pts[order[(i + 1) % n]]
        for j in range(i + 2, n):
            if i == 0 and j == n - 1:
                continue
            c, d = pts[order[j]], pts[order[(j + 1) % n]]
            if segments_intersect(a, b, c, d, 0.0):
                return i, j
    return None


def random_simple_polygon(n: int, seed) -> Polygon:
    """Seeded random simple polygon; alternates between two generators."""
    rng = np.random.default_rng(seed)
    if n >= 4 and rng.random() < 0.5:
        return random_two_opt_polygon(n, rng)
    return random_star_polygon(n, rng)


def random_corpus(n: int, count: int, seed: int) -> list[Polygon]:
    return [random_simple_polygon(n, (seed, n, k)) for k in range(count)]
