"""Obstacle grouping: merge rectangles that chain together below a distance
scale into their circumscribed rectangles, iterated to a fixpoint.

The single-pass operator connects rectangles at d_inf strictly below sigma
(union-find over the pairwise distance graph) and replaces every class by
the circumscribed rectangle of its union.  Merging can create new
proximities, hence the fixpoint iteration; the rectangle count strictly
drops on every non-trivial pass, so at most ``len(S)`` passes run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator, List, Tuple

from .geometry import Rect, box_dilate, circumscribed, dist_inf_sets, shadow

__all__ = [
    "ObstacleSet",
    "group_once",
    "group_fixpoint",
    "perimeter_inequality_check",
    "shadow_preservation_check",
    "composition_check",
    "mesoscopic_scale",
]


@dataclass(frozen=True)
class ObstacleSet:
    """Finite set of distinct rectangles."""

    rects: Tuple[Rect, ...]

    def __post_init__(self):
        if len(set(r.as_tuple() for r in self.rects)) != len(self.rects):
            raise ValueError("duplicate rectangle in obstacle set")

    @classmethod
    def of(cls, rects: Iterable[Rect]) -> "ObstacleSet":
        return cls(tuple(rects))

    def __len__(self) -> int:
        return len(self.rects)

    def __iter__(self) -> Iterator[Rect]:
        return iter(self.rects)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ObstacleSet):
            return NotImplemented
        return set(r.as_tuple() for r in self.rects) == set(r.as_tuple() for r in other.rects)

    def total_perimeter(self) -> float:
        return sum(r.perimeter for r in self.rects)


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, x: int, y: int) -> None:
        px, py = self.find(x), self.find(y)
        if px != py:
            self.parent[max(px, py)] = min(px, py)


def group_once(S: ObstacleSet, sigma: float) -> ObstacleSet:
    """One grouping pass: chain-connect rectangles at d_inf < sigma and
    replace each connected class by the circumscribed rectangle of its union."""
    if sigma < 0:
        raise ValueError("negative grouping scale")
    rects = S.rects
    k = len(rects)
    uf = _UnionFind(k)
    for i in range(k):
        for j in range(i + 1, k):
            if dist_inf_sets(rects[i], rects[j]) < sigma:
                uf.union(i, j)
    classes: dict[int, List[Rect]] = {}
    for i, r in enumerate(rects):
        classes.setdefault(uf.find(i), []).append(r)
    merged = [circumscribed(members) for _, members in sorted(classes.items())]
    # merging distinct classes can only produce distinct hulls, but two
    # classes may collapse onto the same rectangle; dedup preserves set laws
    out: List[Rect] = []
    seen = set()
    for r in merged:
        if r.as_tuple() not in seen:
            seen.add(r.as_tuple())
            out.append(r)
    return ObstacleSet.of(out)


def group_fixpoint(S: ObstacleSet, sigma: float) -> ObstacleSet:
    """Iterate :func:`group_once` until the set stops changing."""
    current = S
    for _ in range(len(S) + 1):
        nxt = group_once(current, sigma)
        if nxt == current:
            return nxt
        current = nxt
    return current


def perimeter_inequality_check(S: ObstacleSet, sigma: float) -> bool:
    """Total perimeter grows by at most 4*sigma per merged rectangle."""
    g = group_fixpoint(S, sigma)
    lhs = g.total_perimeter()
    rhs = S.total_perimeter() + 4.0 * sigma * (len(S) - len(g))
    return lhs <= rhs + 1e-9 * max(1.0, abs(rhs))


def shadow_preservation_check(S: ObstacleSet, sigma: float, sigma_prime: float) -> bool:
    """Dilating by sigma' >= sigma erases the difference between the grouped
    and ungrouped sets: both shadows agree on each axis."""
    if sigma_prime < sigma:
        raise ValueError("sigma_prime must be >= sigma")
    g = group_fixpoint(S, sigma)
    for axis in ("horizontal", "vertical"):
        sh_g = shadow([box_dilate(r, sigma_prime) for r in g], axis)
        sh_s = shadow([box_dilate(r, sigma_prime) for r in S], axis)
        if sh_g.intervals != sh_s.intervals:
            return False
    return True


def composition_check(S: ObstacleSet, sigma: float, sigma_prime: float) -> bool:
    """Grouping at sigma then at sigma' >= sigma equals grouping at sigma'."""
    if sigma_prime < sigma:
        raise ValueError("sigma_prime must be >= sigma")
    left = group_fixpoint(group_fixpoint(S, sigma), sigma_prime)
    right = group_fixpoint(S, sigma_prime)
    return left == right


def mesoscopic_scale(S: ObstacleSet) -> float:
    """Smallest scale >= 3 at which grouping strictly drops the obstacle count.

    Grouping uses strict inequality, so the count drops exactly for scales
    beyond the minimum pairwise distance; the infimum is that distance,
    floored at 3.
    """
    if len(S) < 2:
        raise ValueError("mesoscopic scale needs at least two obstacles")
    rects = S.rects
    d_min = math.inf
    for i in range(len(rects)):
        for j in range(i + 1, len(rects)):
            d_min = min(d_min, dist_inf_sets(rects[i], rects[j]))
    return max(3.0, d_min)
