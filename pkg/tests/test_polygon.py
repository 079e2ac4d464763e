import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polystab import polygon as pg
from polystab.errors import (
    DuplicateVertex,
    NonFinite,
    NotStarShaped,
    ParseError,
    SelfIntersecting,
    TooFewVertices,
)

from conftest import BOWTIE, DART, RECTANGLE, REGULAR_SQUARE, UNIT_SQUARE, hexagon, shoelace


# -- validate ---------------------------------------------------------------


def test_validate_ccw_triangle():
    P = pg.validate([(0, 0), (1, 0), (0, 1)])
    assert P.n == 3 and P.orientation == pg.CCW


def test_validate_reverses_clockwise_input():
    P = pg.validate([(0, 0), (0, 1), (1, 0)])
    assert P.orientation == pg.CCW
    assert pg.signed_area(P) == pytest.approx(0.5)


def test_validate_rejects_duplicates():
    with pytest.raises(DuplicateVertex):
        pg.validate([(0, 0), (0, 0), (1, 0), (0, 1)], eps=1e-9)


@pytest.mark.parametrize(
    "raw, err",
    [
        ([(0, 0), (1, 0)], TooFewVertices),
        ([(0, 0), (1, math.nan), (0, 1)], NonFinite),
        ([(0, 0), (1, math.inf), (0, 1)], NonFinite),
        ([(0, 0, 1), (1, 0, 0), (0, 1, 0)], ParseError),
    ],
)
def test_validate_rejects_bad_input(raw, err):
    with pytest.raises(err):
        pg.validate(raw)


def test_polygon_vertices_are_read_only():
    P = pg.validate(UNIT_SQUARE)
    with pytest.raises(ValueError):
        P.vertices[0, 0] = 5.0


def test_eps_from_environment(monkeypatch):
    monkeypatch.setenv("POLYSTAB_EPS", "1e-6")
    assert pg.default_eps() == 1e-6
    assert pg.validate(UNIT_SQUARE).eps == 1e-6


# -- area, centroid, metrics ------------------------------------------------


def test_signed_area_examples():
    assert pg.signed_area(pg.validate(UNIT_SQUARE)) == pytest.approx(1.0)
    assert pg.signed_area(pg.validate(DART)) == pytest.approx(shoelace(DART)) == pytest.approx(4.0)
    # validate would reorient, so build the clockwise polygon directly
    rev = pg.Polygon(np.array(UNIT_SQUARE[::-1], dtype=float), pg.CW)
    assert pg.signed_area(rev) == pytest.approx(-1.0)


@pytest.mark.parametrize(
    "pts, c", [(UNIT_SQUARE, (0.5, 0.5)), (RECTANGLE, (1, 0.5)), (DART, (2, 1))]
)
def test_vertex_centroid(pts, c):
    got = pg.vertex_centroid(pg.validate(pts))
    assert (got.x, got.y) == pytest.approx(c)


def test_metrics_regular_square():
    m = pg.metrics(pg.validate(REGULAR_SQUARE))
    assert m.L == pytest.approx(4 * math.sqrt(2))
    assert m.S == pytest.approx(8)
    assert m.F == pytest.approx(2)
    for v in (m.delta, m.sigma_s2, m.sigma_r2):
        assert abs(v) < 1e-12


def test_metrics_rectangle():
    m = pg.metrics(pg.validate(RECTANGLE))
    assert (m.L, m.S, m.F) == pytest.approx((6, 10, 2))
    assert m.c_n == pytest.approx(16)
    assert m.delta == pytest.approx(4)
    assert m.sigma_s2 == pytest.approx(0.25)
    assert abs(m.sigma_r2) < 1e-12


def test_metrics_dart():
    m = pg.metrics(pg.validate(DART))
    L = 6 + math.sqrt(5) + math.sqrt(13)
    assert m.L == pytest.approx(L, rel=1e-14)
    assert m.F == pytest.approx(4)
    assert m.delta == pytest.approx(L * L - 64, rel=1e-13)
    assert m.delta == pytest.approx(76.2239, abs=1e-4)


def test_area_refuses_self_intersecting():
    with pytest.raises(SelfIntersecting):
        pg.area(pg.validate(BOWTIE))


def test_metrics_to_dict_is_json():
    d = pg.metrics(pg.validate(DART)).to_dict()
    assert json.loads(json.dumps(d))["n"] == 4


# -- predicates -------------------------------------------------------------


@pytest.mark.parametrize(
    "pts, convex", [(UNIT_SQUARE, True), (DART, False), ([(0, 0), (3, 0), (1, 2)], True)]
)
def test_is_convex(pts, convex):
    assert pg.is_convex(pg.validate(pts)) is convex


@pytest.mark.parametrize("pts, simple", [(UNIT_SQUARE, True), (BOWTIE, False), (DART, True)])
def test_is_simple(pts, simple):
    assert pg.is_simple(pg.validate(pts)) is simple


def test_simple_rejects_fold_back():
    # consecutive edges folding back onto each other
    P = pg.Polygon(np.array([(0, 0), (2, 0), (1, 0), (1, 1)], dtype=float), pg.CCW)
    assert not pg.is_simple(P)


def test_segments_intersect_brute_force():
    assert pg.segments_intersect((0, 0), (1, 1), (0, 1), (1, 0))
    assert not pg.segments_intersect((0, 0), (1, 0), (0, 1), (1, 1))
    assert pg.segments_intersect((0, 0), (2, 0), (1, 0), (3, 0))  # collinear overlap


# -- angular/radial chart ---------------------------------------------------


def test_angular_radial_regular_square():
    z = pg.to_angular_radial(pg.validate(REGULAR_SQUARE))
    assert np.allclose(z.x, math.pi / 2) and np.allclose(z.r, 1)


def test_angular_radial_rectangle():
    z = pg.to_angular_radial(pg.validate(RECTANGLE))
    assert np.allclose(z.r, math.sqrt(1.25))
    assert z.x.sum() == pytest.approx(2 * math.pi)
    assert z.x[0] == pytest.approx(z.x[2]) and z.x[1] == pytest.approx(z.x[3])
    assert z.x[0] != pytest.approx(z.x[1])


def test_angular_radial_hexagon():
    z = pg.to_angular_radial(pg.validate(hexagon(2.5)))
    assert np.allclose(z.x, math.pi / 3) and np.allclose(z.r, 2.5)


def test_angular_radial_rejects_vertex_at_centroid():
    # the dart's vertex centroid (2, 1) is one of its vertices
    with pytest.raises(NotStarShaped):
        pg.to_angular_radial(pg.validate(DART))


def _canonical(P):
    """Vertices translated to the centroid and rotated so vertex 0 lies on +x."""
    v = P.vertices - P.vertices.mean(axis=0)
    a = math.atan2(v[0, 1], v[0, 0])
    c, s = math.cos(-a), math.sin(-a)
    return v @ np.array([[c, s], [-s, c]])


def random_convex_polygon(n, rng):
    """Points on an ellipse at sorted random angles: convex, centroid inside."""
    t = np.sort(rng.uniform(0, 2 * np.pi, n))
    a, b = rng.uniform(0.5, 2, 2)
    return pg.validate(np.c_[a * np.cos(t), b * np.sin(t)] + rng.normal(size=2))


@pytest.mark.parametrize("seed", range(20))
def test_angular_radial_round_trip(seed):
    rng = np.random.default_rng(seed)
    P = random_convex_polygon(int(rng.integers(3, 12)), rng)
    Q = pg.from_angular_radial(pg.to_angular_radial(P))
    scale = np.max(np.abs(P.vertices))
    assert np.allclose(_canonical(P), _canonical(Q), atol=1e-9 * scale, rtol=0)


# -- properties -------------------------------------------------------------

coords = st.floats(-5, 5, allow_nan=False)


@st.composite
def star_polygons(draw):
    n = draw(st.integers(3, 10))
    seed = draw(st.integers(0, 2**32 - 1))
    return pg.random_star_polygon(n, np.random.default_rng(seed))


@settings(max_examples=60, deadline=None)
@given(star_polygons(), st.floats(0, 2 * math.pi), coords, coords)
def test_metrics_rigid_motion_invariance(P, angle, tx, ty):
    c, s = math.cos(angle), math.sin(angle)
    moved = pg.validate(P.vertices @ np.array([[c, s], [-s, c]]) + (tx, ty))
    m0, m1 = pg.metrics(P), pg.metrics(moved)
    for key in ("L", "S", "F", "delta", "sigma_s2", "sigma_r2"):
        a, b = getattr(m0, key), getattr(m1, key)
        assert abs(a - b) <= 1e-12 * max(1.0, abs(a)), key


@settings(max_examples=100, deadline=None)
@given(star_polygons())
def test_side_variance_identity(P):
    m = pg.metrics(P)
    n = m.n
    assert n * n * m.sigma_s2 == pytest.approx(n * m.S - m.L**2, rel=1e-12, abs=1e-12 * m.L**2)


@settings(max_examples=100, deadline=None)
@given(star_polygons())
def test_deficit_nonnegative_and_radial_bound(P):
    m = pg.metrics(P)
    n = m.n
    assert m.delta >= -1e-9 * m.L**2
    lhs = 8 * n * n * math.sin(math.pi / n) ** 2 * m.sigma_r2
    assert lhs <= n * m.S - m.c_n * m.F + 1e-9 * m.L**2


@pytest.mark.parametrize("n", [3, 4, 5, 7, 12, 30])
def test_deficit_vanishes_only_for_regular(n):
    P = pg.regular_polygon(n, radius=1.7, phase=0.3, center=(2, -1))
    m = pg.metrics(P)
    assert abs(m.delta) <= 1e-9 * m.L**2
    v = P.vertices.copy()
    v[0] *= 1.01
    m2 = pg.metrics(pg.validate(v))
    assert m2.delta > 1e-9 * m2.L**2


# -- io and corpora ---------------------------------------------------------


def test_json_and_csv_round_trip(tmp_path):
    P = pg.validate(DART)
    (tmp_path / "d.json").write_text(pg.polygon_to_json(P, "dart"))
    (tmp_path / "d.csv").write_text("x,y\n0,0\n4,0\n2,1\n2,3\n")
    (tmp_path / "nohead.csv").write_text("0,0\n4,0\n2,1\n2,3\n")
    for name in ("d.json", "d.csv", "nohead.csv"):
        assert np.array_equal(pg.read_polygon(tmp_path / name).vertices, P.vertices)


@pytest.mark.parametrize("text", ["{not json", '{"points": []}', "x,y\n1,a\n"])
def test_parse_errors(tmp_path, text):
    f = tmp_path / "bad.txt"
    f.write_text(text)
    with pytest.raises(ParseError):
        pg.read_polygon(f)


def test_missing_file_is_parse_error(tmp_path):
    with pytest.raises(ParseError):
        pg.read_polygon(tmp_path / "nope.json")


def test_random_corpus_is_simple_and_deterministic():
    a = pg.random_corpus(9, 30, seed=5)
    b = pg.random_corpus(9, 30, seed=5)
    assert all(np.array_equal(p.vertices, q.vertices) for p, q in zip(a, b))
    assert all(pg.is_simple(p) and p.orientation == pg.CCW for p in a)
    assert any(not pg.is_convex(p) for p in a)
