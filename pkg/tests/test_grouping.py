import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nocollide.geometry import Rect, dist_inf_sets
from nocollide.grouping import (
    ObstacleSet,
    composition_check,
    group_fixpoint,
    group_once,
    mesoscopic_scale,
    perimeter_inequality_check,
    shadow_preservation_check,
)


def _random_obstacles(rng, max_rects=8, span=20.0):
    k = int(rng.integers(1, max_rects + 1))
    rects = []
    seen = set()
    while len(rects) < k:
        x, y = rng.uniform(-span, span, 2)
        w, h = rng.uniform(0, 4, 2)
        if rng.random() < 0.15:
            w = 0.0  # degenerate segments are legal obstacles
        r = Rect(x, x + w, y, y + h)
        if r.as_tuple() not in seen:
            seen.add(r.as_tuple())
            rects.append(r)
    return ObstacleSet.of(rects)


def test_group_once_merges_close_pair():
    S = ObstacleSet.of([Rect(0, 1, 0, 1), Rect(1.5, 2, 0, 1)])
    assert group_once(S, 1.0) == ObstacleSet.of([Rect(0, 2, 0, 1)])


def test_group_once_keeps_far_pair():
    S = ObstacleSet.of([Rect(0, 1, 0, 1), Rect(5, 6, 0, 1)])
    assert group_once(S, 1.0) == S


def test_group_once_sigma_zero_is_identity(rng):
    for _ in range(20):
        S = _random_obstacles(rng)
        assert group_once(S, 0.0) == S


def test_fixpoint_chain_of_three():
    S = ObstacleSet.of([Rect(0, 1, 0, 1), Rect(1.5, 2.5, 0, 1), Rect(3, 4, 0, 1)])
    g = group_fixpoint(S, 1.0)
    assert g == ObstacleSet.of([Rect(0, 4, 0, 1)])


def test_fixpoint_needs_iteration():
    # the staggered pair hulls into a taller rectangle whose bulge reaches
    # the point obstacle; only the second pass picks that up
    S = ObstacleSet.of([
        Rect(0, 1, 0, 1),
        Rect(0.5, 1.5, 1.5, 2.5),
        Rect(2.3, 2.3, 0.25, 0.25),
    ])
    assert min(dist_inf_sets(S.rects[2], S.rects[0]),
               dist_inf_sets(S.rects[2], S.rects[1])) >= 1.0
    once = group_once(S, 1.0)
    fix = group_fixpoint(S, 1.0)
    assert len(once) == 2
    assert len(fix) == 1
    assert group_once(fix, 1.0) == fix


def test_fixpoint_y_gap_dominates():
    r1, r2 = Rect(0, 1, 0, 1), Rect(1.2, 2.2, 3, 4)
    assert dist_inf_sets(r1, r2) == pytest.approx(2.0)
    S = ObstacleSet.of([r1, r2])
    assert group_fixpoint(S, 1.0) == S


def test_fixpoint_empty():
    S = ObstacleSet.of([])
    assert group_fixpoint(S, 2.0) == S


def test_perimeter_inequality_by_hand():
    # unit squares with gap 0.5 merge at sigma=1 into [0,2.5]x[0,1]:
    # 7 <= 8 + 4*1*(2-1)
    S = ObstacleSet.of([Rect(0, 1, 0, 1), Rect(1.5, 2.5, 0, 1)])
    g = group_fixpoint(S, 1.0)
    assert g == ObstacleSet.of([Rect(0, 2.5, 0, 1)])
    assert g.total_perimeter() == pytest.approx(7.0)
    assert S.total_perimeter() + 4.0 * 1.0 * (len(S) - len(g)) == pytest.approx(12.0)
    assert perimeter_inequality_check(S, 1.0)


def test_perimeter_inequality_trivial_slack():
    S = ObstacleSet.of([Rect(0, 1, 0, 1), Rect(9, 10, 0, 1)])
    g = group_fixpoint(S, 1.0)
    assert g == S
    assert perimeter_inequality_check(S, 1.0)


def test_checks_on_random_instances(rng):
    for _ in range(300):
        S = _random_obstacles(rng)
        sigma = float(rng.uniform(0, 10))
        sigma2 = sigma + float(rng.uniform(0, 5))
        assert perimeter_inequality_check(S, sigma)
        assert shadow_preservation_check(S, sigma, sigma2)
        assert composition_check(S, sigma, sigma2)


def test_shadow_preservation_explicit():
    S = ObstacleSet.of([Rect(0, 1, 0, 1), Rect(1.5, 2.5, 0, 1)])
    assert shadow_preservation_check(S, 1.0, 1.0)
    with pytest.raises(ValueError):
        shadow_preservation_check(S, 2.0, 1.0)


def test_composition_degenerate_cases(rng):
    S = _random_obstacles(rng)
    assert composition_check(S, 0.0, 0.0)
    assert composition_check(S, 2.0, 2.0)


def test_monotone_coarsening(rng):
    for _ in range(50):
        S = _random_obstacles(rng)
        sigma = float(rng.uniform(0, 6))
        sigma2 = sigma + float(rng.uniform(0, 6))
        fine = group_fixpoint(S, sigma)
        coarse = group_fixpoint(S, sigma2)
        assert len(coarse) <= len(fine)
        for r in fine:
            assert any(
                c.a <= r.a and c.b >= r.b and c.c <= r.c and c.d >= r.d for c in coarse
            )


def test_merge_order_independence(rng):
    for _ in range(30):
        S = _random_obstacles(rng)
        sigma = float(rng.uniform(0, 8))
        base = group_fixpoint(S, sigma)
        perm = list(S.rects)
        rng.shuffle(perm)
        assert group_fixpoint(ObstacleSet.of(perm), sigma) == base


def test_cardinality_drop_iff_changed(rng):
    for _ in range(50):
        S = _random_obstacles(rng)
        sigma = float(rng.uniform(0, 8))
        g = group_fixpoint(S, sigma)
        assert len(g) <= len(S)
        if len(g) == len(S):
            assert g == S


def test_mesoscopic_scale_examples():
    def squares_with_gap(gap):
        return ObstacleSet.of([Rect(0, 1, 0, 1), Rect(1 + gap, 2 + gap, 0, 1)])

    assert mesoscopic_scale(squares_with_gap(5.0)) == 5.0
    assert mesoscopic_scale(squares_with_gap(1.0)) == 3.0
    S = ObstacleSet.of([Rect(0, 1, 0, 1), Rect(5, 6, 0, 1), Rect(13, 14, 0, 1)])
    assert mesoscopic_scale(S) == 4.0


def test_mesoscopic_scale_is_the_drop_threshold(rng):
    # scan candidate scales around the reported infimum: no drop at or below,
    # drop strictly above
    for _ in range(30):
        S = _random_obstacles(rng, max_rects=5)
        if len(S) < 2:
            continue
        s0 = mesoscopic_scale(S)
        assert s0 >= 3.0
        if len(group_fixpoint(S, 3.0)) < len(S):
            assert s0 == 3.0
            continue
        assert len(group_fixpoint(S, s0)) == len(S)
        assert len(group_fixpoint(S, s0 * (1 + 1e-9) + 1e-9)) < len(S)


def test_mesoscopic_scale_needs_two():
    with pytest.raises(ValueError):
        mesoscopic_scale(ObstacleSet.of([Rect(0, 1, 0, 1)]))


@st.composite
def _rect_sets(draw):
    k = draw(st.integers(min_value=1, max_value=5))
    rects = []
    seen = set()
    for _ in range(k):
        x = draw(st.floats(-20, 20, allow_nan=False))
        y = draw(st.floats(-20, 20, allow_nan=False))
        w = draw(st.floats(0, 5, allow_nan=False))
        h = draw(st.floats(0, 5, allow_nan=False))
        r = Rect(x, x + w, y, y + h)
        if r.as_tuple() not in seen:
            seen.add(r.as_tuple())
            rects.append(r)
    return ObstacleSet.of(rects)


@given(_rect_sets(), st.floats(0, 12, allow_nan=False), st.floats(0, 6, allow_nan=False))
@settings(max_examples=150, deadline=None)
def test_grouping_laws_hypothesis(S, sigma, extra):
    sigma2 = sigma + extra
    assert perimeter_inequality_check(S, sigma)
    assert shadow_preservation_check(S, sigma, sigma2)
    assert composition_check(S, sigma, sigma2)


def test_duplicate_rects_rejected():
    with pytest.raises(ValueError):
        ObstacleSet.of([Rect(0, 1, 0, 1), Rect(0, 1, 0, 1)])
