import math

import numpy as np
import pytest
from scipy.optimize import minimize_scalar

from nocollide.geometry import (
    Ball,
    Configuration,
    Rect,
    body_clearance,
    box_dilate,
    center_clearance,
    circumscribed,
    dist_inf_sets,
    dist_p,
    lattice_border,
    point_ball,
    shadow,
)


def test_dist_p_pythagorean_triple():
    assert dist_p((0, 0), (3, 4), 2) == 5
    assert dist_p((0, 0), (3, 4), 1) == 7
    assert dist_p((0, 0), (3, 4), math.inf) == 4


def test_dist_p_norm_ordering(rng):
    for _ in range(200):
        z, w = rng.uniform(-10, 10, 2), rng.uniform(-10, 10, 2)
        dinf, d2, d1 = dist_p(z, w, math.inf), dist_p(z, w, 2), dist_p(z, w, 1)
        assert dinf <= d2 + 1e-12
        assert d2 <= d1 + 1e-12


def test_dist_inf_rects():
    assert dist_inf_sets(Rect(0, 1, 0, 1), Rect(5, 6, 0, 1)) == 4
    assert dist_inf_sets(Rect(0, 1, 0, 1), Rect(0, 1, 0, 1)) == 0


def _dinf_point_rect(px, py, rect):
    gx = max(0.0, rect.a - px, px - rect.b)
    gy = max(0.0, rect.c - py, py - rect.d)
    return max(gx, gy)


def test_dist_inf_ball_rect_against_1d_optimization():
    # minimize d_inf(point on disk boundary, rect) over the boundary angle
    ball = Ball((0.0, 0.0), 0.5)
    rect = Rect(2, 3, -1, 1)

    def objective(theta):
        return _dinf_point_rect(0.5 * math.cos(theta), 0.5 * math.sin(theta), rect)

    res = minimize_scalar(objective, bounds=(-math.pi, math.pi), method="bounded",
                          options={"xatol": 1e-12})
    assert res.fun == pytest.approx(1.5, abs=1e-9)
    assert dist_inf_sets(ball, rect) == pytest.approx(1.5, abs=1e-12)


def test_dist_inf_ball_rect_random_against_optimization(rng):
    for _ in range(50):
        c = rng.uniform(-5, 5, 2)
        r = float(rng.uniform(0.1, 2.0))
        a, b = sorted(rng.uniform(-5, 5, 2))
        cc, d = sorted(rng.uniform(-5, 5, 2))
        rect = Rect(a, b, cc, d)
        ball = Ball((c[0], c[1]), r)

        def objective(theta):
            return _dinf_point_rect(c[0] + r * math.cos(theta), c[1] + r * math.sin(theta), rect)

        # interior point may already touch
        brute = min(objective(t) for t in np.linspace(-math.pi, math.pi, 20001))
        if _dinf_point_rect(c[0], c[1], rect) == 0.0 or brute == 0.0:
            brute = 0.0
        assert dist_inf_sets(ball, rect) == pytest.approx(brute, abs=2e-4)


def test_dist_inf_ball_ball_diagonal():
    b1 = Ball((0, 0), 0.5)
    b2 = Ball((2, 2), 0.5)
    # Minkowski-reduce to the point (2,2) against a disk of radius 1, then
    # brute-force the boundary angle
    ths = np.linspace(0, math.pi / 2, 200001)
    brute = min(max(abs(2 - math.cos(t)), abs(2 - math.sin(t))) for t in ths)
    expected = 0.5 * ((2 + 2) - math.sqrt(2.0 * 1.0 - 0.0))
    assert brute == pytest.approx(expected, abs=1e-9)
    assert dist_inf_sets(b1, b2) == pytest.approx(expected, abs=1e-12)


def test_lattice_border_counts():
    _, c1 = lattice_border(Rect(0, 0, 0, 0))
    assert c1 == 4
    _, c2 = lattice_border(Rect(0, 1, 0, 0))
    assert c2 == 6
    # brute-force enumeration over a dilated window
    rect = Rect(0, 2, 0, 1)
    sites = {(x, y) for x in range(0, 3) for y in range(0, 2)}
    brute = set()
    for x in range(-2, 5):
        for y in range(-2, 4):
            if (x, y) in sites:
                continue
            if any(abs(x - sx) + abs(y - sy) == 1 for sx, sy in sites):
                brute.add((x, y))
    border, count = lattice_border(rect)
    assert set(border) == brute
    assert count == len(brute) == 10


def test_lattice_border_formula_matches_bruteforce(rng):
    for _ in range(25):
        a = int(rng.integers(-10, 10))
        c = int(rng.integers(-10, 10))
        w = int(rng.integers(0, 20))
        h = int(rng.integers(0, 20))
        rect = Rect(a, a + w, c, c + h)
        sites = {(x, y) for x in range(a, a + w + 1) for y in range(c, c + h + 1)}
        brute = set()
        for (x, y) in sites:
            for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                if (x + dx, y + dy) not in sites:
                    brute.add((x + dx, y + dy))
        _, count = lattice_border(rect)
        assert count == len(brute) == 2 * w + 2 * h + 4


def test_lattice_border_rejects_non_integral():
    with pytest.raises(ValueError):
        lattice_border(Rect(0, 1.5, 0, 1))


def test_box_dilate():
    assert box_dilate(Rect(0, 1, 0, 1), 0) == Rect(0, 1, 0, 1)
    assert box_dilate((0, 0), 0.5) == Rect(-0.5, 0.5, -0.5, 0.5)
    assert box_dilate(Rect(0, 2, 1, 1), 2) == Rect(-2, 4, -1, 3)


def test_box_dilate_composes_additively(rng):
    for _ in range(50):
        a, b = sorted(rng.uniform(-5, 5, 2))
        c, d = sorted(rng.uniform(-5, 5, 2))
        r, s = rng.uniform(0, 3, 2)
        one = box_dilate(box_dilate(Rect(a, b, c, d), r), s)
        two = box_dilate(Rect(a, b, c, d), r + s)
        assert one.as_tuple() == pytest.approx(two.as_tuple(), abs=1e-12)


def test_circumscribed():
    assert circumscribed([Rect(0, 1, 0, 1), Rect(2, 3, 0, 1)]) == Rect(0, 3, 0, 1)
    assert circumscribed([Rect(0, 1, 0, 1)]) == Rect(0, 1, 0, 1)
    assert circumscribed([Rect(0, 1, 0, 1), Rect(2, 3, 5, 6)]) == Rect(0, 3, 0, 6)
    with pytest.raises(ValueError):
        circumscribed([])


def test_circumscribed_monotone_idempotent(rng):
    rects = [Rect(*sorted(rng.uniform(-5, 5, 2)), *sorted(rng.uniform(-5, 5, 2)))
             for _ in range(6)]
    inner = circumscribed(rects[:3])
    outer = circumscribed(rects)
    assert outer.a <= inner.a and outer.b >= inner.b
    assert outer.c <= inner.c and outer.d >= inner.d
    assert circumscribed([outer]) == outer


def test_shadow():
    sh = shadow([Rect(0, 1, 0, 1), Rect(3, 4, 0, 1)], "horizontal")
    assert sh.intervals == ((0, 1), (3, 4))
    sh = shadow([Rect(0, 1, 0, 1), Rect(0.5, 2, 5, 6)], "horizontal")
    assert sh.intervals == ((0, 2),)
    assert shadow([], "vertical").intervals == ()


def test_body_clearance_examples():
    lat = Configuration(np.array([[0, 0], [5, 0]]), "lattice")
    assert body_clearance(lat, []) == 4
    cont = Configuration(np.array([[0.0, 0.0], [5.0, 0.0]]), "continuous")
    assert body_clearance(cont, []) == 4
    cfg = Configuration(np.array([[0.0, 0.0], [10.0, 10.0]]), "continuous")
    # nearest feature: first particle's disk against the rectangle
    assert body_clearance(cfg, [Rect(3, 4, -1, 1)]) == pytest.approx(2.5, abs=1e-12)


def test_body_clearance_ball_rect_matches_bruteforce(rng):
    rect = Rect(3, 4, -1, 1)
    ths = np.linspace(-math.pi, math.pi, 40001)
    brute = min(_dinf_point_rect(0.5 * math.cos(t), 0.5 * math.sin(t), rect) for t in ths)
    cfg = Configuration(np.array([[0.0, 0.0], [10.0, 10.0]]), "continuous")
    assert body_clearance(cfg, [rect]) == pytest.approx(brute, abs=1e-6)


def test_center_clearance_examples():
    assert center_clearance(Configuration(np.array([[3.0, 0], [0, 4.0]]))) == 3
    assert center_clearance(Configuration(np.array([[1.0, 0], [-1.0, 0]]))) == 1
    assert center_clearance(Configuration(np.array([[6.0, 8.0], [-5.0, -12.0]]))) == 10


def test_clearances_translation_and_rotation_invariance():
    # the origin term binds here: min |z_i| = 2 < min pairwise distance
    pts = np.array([[2.0, 0.0], [0.0, 2.0], [5.0, 5.0], [-3.0, 4.0]])
    cfg = Configuration(pts, "continuous")
    rect = Rect(6, 8, -2, 0)
    shift = np.array([10.0, 10.0])
    cfg2 = Configuration(pts + shift, "continuous")
    rect2 = Rect(rect.a + shift[0], rect.b + shift[0], rect.c + shift[1], rect.d + shift[1])
    assert body_clearance(cfg, [rect]) == pytest.approx(body_clearance(cfg2, [rect2]), abs=1e-9)
    # center clearance is anchored at the origin: only rotations about O preserve it
    th = 0.83
    R = np.array([[math.cos(th), -math.sin(th)], [math.sin(th), math.cos(th)]])
    cfg_rot = Configuration(pts @ R.T, "continuous")
    assert center_clearance(cfg) == pytest.approx(2.0, abs=1e-12)
    assert center_clearance(cfg) == pytest.approx(center_clearance(cfg_rot), abs=1e-9)
    assert abs(center_clearance(cfg2) - center_clearance(cfg)) > 0.5


def test_configuration_validation():
    with pytest.raises(ValueError):
        Configuration(np.array([[0.0, 0.0]]))
    with pytest.raises(ValueError):
        Configuration(np.array([[0.5, 0.0], [1.0, 1.0]]), "lattice")
    with pytest.raises(ValueError):
        Rect(1, 0, 0, 1)


def test_point_ball_shape():
    b = point_ball((2.0, -1.0))
    assert b.center == (2.0, -1.0)
    assert b.radius == 0.5
