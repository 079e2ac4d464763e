import itertools
import json
import math

import numpy as np
import pytest

from polystab import convexify as cv
from polystab import polygon as pg
from polystab.errors import DegenerateHull, NotSimple, StepBudgetExceeded

from conftest import BOWTIE, DART, RECTANGLE, UNIT_SQUARE, shoelace


def brute_force_hull(pts):
    """Indices of points not inside (or on) any triangle of other points."""
    pts = [tuple(map(float, p)) for p in pts]

    def inside(p, a, b, c):
        def cr(o, u, v):
            return (u[0] - o[0]) * (v[1] - o[1]) - (u[1] - o[1]) * (v[0] - o[0])

        d = [cr(a, b, p), cr(b, c, p), cr(c, a, p)]
        return not (min(d) < 0 < max(d))

    keep = []
    for i, p in enumerate(pts):
        others = [q for j, q in enumerate(pts) if j != i]
        if not any(inside(p, *tri) for tri in itertools.combinations(others, 3)):
            keep.append(i)
    return sorted(keep)


def test_hull_excludes_interior_point():
    pts = UNIT_SQUARE + [(0.5, 0.5)]
    assert sorted(cv.convex_hull(pts)) == [0, 1, 2, 3]


def test_hull_of_dart_matches_brute_force():
    assert sorted(cv.convex_hull(DART)) == brute_force_hull(DART) == [0, 1, 3]


def test_hull_of_triangle_and_ccw_order():
    h = cv.convex_hull([(0, 0), (1, 0), (0, 1)])
    assert sorted(h) == [0, 1, 2]
    assert shoelace([[(0, 0), (1, 0), (0, 1)][i] for i in h]) > 0


@pytest.mark.parametrize("seed", range(10))
def test_hull_random_vs_brute_force(seed):
    pts = np.random.default_rng(seed).uniform(-1, 1, (12, 2))
    assert sorted(cv.convex_hull(pts)) == brute_force_hull(pts)


def test_hull_collinear_is_degenerate():
    with pytest.raises(DegenerateHull):
        cv.convex_hull([(0, 0), (1, 1), (2, 2)])


def test_pockets_of_convex_polygon_are_empty():
    assert cv.find_pockets(pg.validate(UNIT_SQUARE)) == []


def test_dart_pocket():
    (p,) = cv.find_pockets(pg.validate(DART))
    assert p.lid == (1, 3) and p.chain == (2,)
    assert p.pocket_area == pytest.approx(abs(shoelace([DART[1], DART[2], DART[3]])))
    assert p.pocket_area == pytest.approx(2)


def test_two_notch_hexagon_has_two_pockets():
    P = pg.validate([(0, 0), (2, 1), (4, 0), (4, 3), (2, 2), (0, 3)])
    pockets = cv.find_pockets(P)
    assert [p.lid for p in pockets] == [(0, 2), (3, 5)]
    # oracle: each lid joins hull vertices that are not adjacent on the polygon
    hull = set(cv.convex_hull(P.vertices))
    for p in pockets:
        assert set(p.lid) <= hull and (p.lid[1] - p.lid[0]) % P.n > 1


def test_pockets_need_simple_polygon():
    with pytest.raises(NotSimple):
        cv.find_pockets(pg.validate(BOWTIE))


def test_collinear_chain_vertex_is_not_a_pocket():
    # (1, 0) lies on the hull edge from (0, 0) to (2, 0)
    P = pg.validate([(0, 0), (1, 0), (2, 0), (2, 2), (0, 2)])
    assert cv.find_pockets(P) == []


def test_reflection_formula():
    got = cv.reflect_across_line([(2, 1)], (4, 0), (2, 3))
    assert np.allclose(got, [(50 / 13, 29 / 13)], atol=1e-12)


def test_dart_flip():
    P = pg.validate(DART)
    step = cv.flip(P, cv.find_pockets(P)[0])
    assert np.allclose(step.polygon_after.vertices[2], (50 / 13, 29 / 13), atol=1e-12, rtol=0)
    assert pg.signed_area(step.polygon_after) == pytest.approx(8)
    assert step.tau_i == pytest.approx(4)


def test_flip_two_vertex_chain():
    P = pg.validate([(0, 0), (1, 1), (3, 1), (4, 0), (2, 5)])
    (p,) = cv.find_pockets(P)
    assert p.lid == (0, 3) and p.chain == (1, 2)
    step = cv.flip(P, p)
    after = step.polygon_after.vertices
    assert np.allclose(after[1:3], [(1, -1), (3, -1)])
    # both chain vertices cross from the inner to the outer side of the lid
    assert all(v[1] < 0 for v in after[1:3])
    assert pg.perimeter(step.polygon_after) == pytest.approx(pg.perimeter(P), rel=1e-12)
    assert step.tau_i == pytest.approx(2 * 3)


def test_convexify_convex_input():
    tr = cv.convexify(pg.validate(RECTANGLE))
    assert len(tr) == 0 and tr.tau == 0 and tr.alpha_c == 0
    assert cv.tau(pg.validate(RECTANGLE)) == 0 and cv.alpha_c(pg.validate(RECTANGLE)) == 0


def test_convexify_dart():
    P = pg.validate(DART)
    tr = cv.convexify(P)
    assert len(tr) == 1
    assert tr.tau == pytest.approx(4) and tr.alpha_c == pytest.approx(8 - 4)
    assert cv.tau(P) == pytest.approx(4) and cv.alpha_c(P) == pytest.approx(4)


def test_convexify_random_ten_gon():
    P = pg.random_simple_polygon(10, 7)
    for policy in (cv.FIRST_POCKET, cv.LARGEST_POCKET):
        tr = cv.convexify(P, policy)
        assert pg.is_convex(tr.final)
        for s in tr.steps:
            L0 = pg.perimeter(s.polygon_before)
            assert abs(pg.perimeter(s.polygon_after) - L0) <= 1e-12 * L0
            assert s.tau_i > 0


@pytest.mark.parametrize("n", range(4, 13))
def test_corpus_invariants_and_bookkeeping(n):
    for P in pg.random_corpus(n, 25, seed=77):
        tr = cv.convexify(P)
        assert pg.is_convex(tr.final)
        assert np.allclose(np.sort(pg.side_lengths(P)), np.sort(pg.side_lengths(tr.final)), atol=1e-9)
        m0, m1 = pg.metrics(P), pg.metrics(tr.final)
        assert abs(m0.delta - m1.delta - m0.c_n * tr.tau) <= 1e-9 * m0.L**2
        assert tr.alpha_c == pytest.approx(tr.tau, rel=1e-9, abs=1e-12)


def test_step_budget_keeps_partial_trace():
    P = pg.validate([(0, 0), (2, 1), (4, 0), (4, 3), (2, 2), (0, 3)])
    with pytest.raises(StepBudgetExceeded) as info:
        cv.convexify(P, max_steps=1)
    tr = info.value.trace
    assert len(tr) == 1 and not tr.complete


def test_unknown_policy():
    with pytest.raises(ValueError):
        cv.convexify(pg.validate(DART), policy="random")


def test_convexify_refuses_self_intersecting():
    with pytest.raises(NotSimple):
        cv.convexify(pg.validate(BOWTIE))


def test_trace_json_layout():
    doc = json.loads(cv.convexify(pg.validate(DART)).to_json())
    assert set(doc) == {"steps", "tau", "alpha_c"}
    (step,) = doc["steps"]
    assert step["lid"] == [1, 3] and step["chain"] == [2]
    assert step["tau_i"] == pytest.approx(4)
    assert len(step["vertices_after"]) == 4
    assert math.isclose(step["vertices_after"][2][0], 50 / 13, rel_tol=1e-12)
