"""Planar geometric primitives: axis-aligned rectangles, unit particles,
lattice borders, dilations, shadows and the clearance measures used by the
simulation engines.

Everything here is exact where the inputs allow it: rectangle/rectangle and
box/box distances reduce to coordinate arithmetic, and disk distances use a
closed-form case analysis instead of iterative optimization, so collision
predicates are reproducible bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, List, Sequence, Tuple

import numpy as np

Point = Tuple[float, float]

__all__ = [
    "Point",
    "Rect",
    "Ball",
    "Configuration",
    "Shadow",
    "dist_p",
    "dist_inf_sets",
    "lattice_border",
    "box_dilate",
    "circumscribed",
    "shadow",
    "body_clearance",
    "center_clearance",
    "point_ball",
    "lattice_box",
]


@dataclass(frozen=True)
class Rect:
    """Closed axis-aligned rectangle [a,b] x [c,d]; degenerate sides allowed."""

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        if not (self.a <= self.b and self.c <= self.d):
            raise ValueError(f"malformed rectangle [{self.a},{self.b}]x[{self.c},{self.d}]")

    @property
    def width(self) -> float:
        return self.b - self.a

    @property
    def height(self) -> float:
        return self.d - self.c

    @property
    def perimeter(self) -> float:
        return 2.0 * (self.width + self.height)

    def as_tuple(self) -> Tuple[float, float, float, float]:
        return (self.a, self.b, self.c, self.d)

    def is_integral(self) -> bool:
        return all(float(v).is_integer() for v in self.as_tuple())


@dataclass(frozen=True)
class Ball:
    """Closed Euclidean disk, used for unit-diameter particles (radius 1/2)."""

    center: Point
    radius: float

    def __post_init__(self):
        if self.radius < 0:
            raise ValueError("negative radius")


def point_ball(z: Point, radius: float = 0.5) -> Ball:
    """The region occupied by a particle centered at ``z``."""
    return Ball((float(z[0]), float(z[1])), radius)


def lattice_box(z: Point, half: float = 0.5) -> Rect:
    """The square of side ``2*half`` around a lattice site."""
    x, y = float(z[0]), float(z[1])
    return Rect(x - half, x + half, y - half, y + half)


@dataclass
class Configuration:
    """Ordered tuple of particle centers, lattice or continuous flavor."""

    points: np.ndarray
    flavor: str = "continuous"

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise ValueError("points must be an (n, 2) array")
        if pts.shape[0] < 2:
            raise ValueError("need at least two particles")
        if not np.all(np.isfinite(pts)):
            raise ValueError("non-finite coordinate")
        if self.flavor not in ("lattice", "continuous"):
            raise ValueError(f"unknown flavor {self.flavor!r}")
        if self.flavor == "lattice" and not np.all(pts == np.round(pts)):
            raise ValueError("lattice flavor requires integral coordinates")
        self.points = pts

    @property
    def n(self) -> int:
        return self.points.shape[0]


@dataclass(frozen=True)
class Shadow:
    """Axis projection of a rectangle set, as a normalized interval union."""

    axis: str
    intervals: Tuple[Tuple[float, float], ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.axis not in ("horizontal", "vertical"):
            raise ValueError(f"unknown axis {self.axis!r}")

    @property
    def total_length(self) -> float:
        return sum(hi - lo for lo, hi in self.intervals)


def dist_p(z: Sequence[float], w: Sequence[float], p) -> float:
    """p-norm distance between two planar points, p in {1, 2, inf}."""
    dx = abs(float(z[0]) - float(w[0]))
    dy = abs(float(z[1]) - float(w[1]))
    if p == 1:
        return dx + dy
    if p == 2:
        return math.hypot(dx, dy)
    if p == math.inf or p == "inf":
        return max(dx, dy)
    raise ValueError(f"unsupported norm index {p!r}")


def _interval_gap(lo1: float, hi1: float, lo2: float, hi2: float) -> float:
    return max(0.0, lo2 - hi1, lo1 - hi2)


def _dinf_rect_rect(r1: Rect, r2: Rect) -> float:
    # d_inf between products of intervals separates per axis
    gx = _interval_gap(r1.a, r1.b, r2.a, r2.b)
    gy = _interval_gap(r1.c, r1.d, r2.c, r2.d)
    return max(gx, gy)


def _dinf_gap_to_disk(gx: float, gy: float, rho: float) -> float:
    """d_inf distance between a disk of radius rho and a target whose axis
    gaps from the disk center are (gx, gy), both >= 0.

    Smallest t such that the square of half-side t around the gap point
    touches the disk: either one axis dominates (gap difference >= rho) or
    the optimum touches the circle between the axes.
    """
    if gx < gy:
        gx, gy = gy, gx
    if gx * gx + gy * gy <= rho * rho:
        return 0.0
    if gx - gy >= rho:
        return gx - rho
    return 0.5 * ((gx + gy) - math.sqrt(2.0 * rho * rho - (gx - gy) ** 2))


def _dinf_ball_rect(ball: Ball, rect: Rect) -> float:
    cx, cy = ball.center
    gx = max(0.0, rect.a - cx, cx - rect.b)
    gy = max(0.0, rect.c - cy, cy - rect.d)
    return _dinf_gap_to_disk(gx, gy, ball.radius)


def _dinf_ball_ball(b1: Ball, b2: Ball) -> float:
    # Minkowski sum: distance from the center offset to a disk of summed radii
    gx = abs(b1.center[0] - b2.center[0])
    gy = abs(b1.center[1] - b2.center[1])
    return _dinf_gap_to_disk(gx, gy, b1.radius + b2.radius)


def dist_inf_sets(A, B) -> float:
    """inf over point pairs of the d_inf distance between two closed convex
    sets from the supported catalog (Rect, Ball); 0 when they intersect."""
    if isinstance(A, Rect) and isinstance(B, Rect):
        return _dinf_rect_rect(A, B)
    if isinstance(A, Ball) and isinstance(B, Ball):
        return _dinf_ball_ball(A, B)
    if isinstance(A, Ball) and isinstance(B, Rect):
        return _dinf_ball_rect(A, B)
    if isinstance(A, Rect) and isinstance(B, Ball):
        return _dinf_ball_rect(B, A)
    raise TypeError(f"unsupported operand types {type(A).__name__}, {type(B).__name__}")


def lattice_border(rect: Rect) -> Tuple[List[Tuple[int, int]], int]:
    """External border of an integral rectangle on the lattice.

    Returns the set of sites outside the rectangle at d_1 distance exactly 1
    from it, plus its cardinality 2*width + 2*height + 4.
    """
    if not rect.is_integral():
        raise ValueError("lattice border requires integral corners")
    a, b, c, d = (int(v) for v in rect.as_tuple())
    border = []
    for x in range(a, b + 1):
        border.append((x, c - 1))
        border.append((x, d + 1))
    for y in range(c, d + 1):
        border.append((a - 1, y))
        border.append((b + 1, y))
    return border, len(border)


def box_dilate(obj, r: float) -> Rect:
    """Sup-norm dilation by r: grow a rectangle (or point) by r on every side."""
    if r < 0:
        raise ValueError("negative dilation radius")
    if isinstance(obj, Rect):
        return Rect(obj.a - r, obj.b + r, obj.c - r, obj.d + r)
    x, y = float(obj[0]), float(obj[1])
    return Rect(x - r, x + r, y - r, y + r)


def circumscribed(rects: Iterable[Rect]) -> Rect:
    """Smallest rectangle containing the union of the given rectangles."""
    rects = list(rects)
    if not rects:
        raise ValueError("circumscribed rectangle of an empty collection")
    return Rect(
        min(r.a for r in rects),
        max(r.b for r in rects),
        min(r.c for r in rects),
        max(r.d for r in rects),
    )


def merge_intervals(intervals: Iterable[Tuple[float, float]]) -> Tuple[Tuple[float, float], ...]:
    """Normalize a union of closed intervals: sort and merge overlapping or
    touching pieces."""
    ivals = sorted((float(lo), float(hi)) for lo, hi in intervals)
    merged: List[Tuple[float, float]] = []
    for lo, hi in ivals:
        if merged and lo <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], hi))
        else:
            merged.append((lo, hi))
    return tuple(merged)


def shadow(rects: Iterable[Rect], axis: str) -> Shadow:
    """Union of axis projections of a rectangle set."""
    if axis == "horizontal":
        ivals = [(r.a, r.b) for r in rects]
    elif axis == "vertical":
        ivals = [(r.c, r.d) for r in rects]
    else:
        raise ValueError(f"unknown axis {axis!r}")
    return Shadow(axis, merge_intervals(ivals))


def body_clearance(config: Configuration, rects: Sequence[Rect] = ()) -> float:
    """Minimum d_inf clearance between particle bodies and obstacles.

    Continuous flavor uses unit-diameter disks around the centers, lattice
    flavor the unit boxes around the sites.  With no obstacles this is the
    minimum over particle pairs alone.
    """
    pts = config.points
    n = config.n
    if config.flavor == "continuous":
        bodies = [point_ball(tuple(pts[i])) for i in range(n)]
    else:
        bodies = [lattice_box(tuple(pts[i])) for i in range(n)]
    best = math.inf
    for i in range(n):
        for j in range(i + 1, n):
            best = min(best, dist_inf_sets(bodies[i], bodies[j]))
        for rect in rects:
            best = min(best, dist_inf_sets(bodies[i], rect))
    return best


def center_clearance(config: Configuration) -> float:
    """Minimum Euclidean distance among particle centers and from each
    center to the origin (the origin plays the role of a fixed particle)."""
    pts = config.points
    n = config.n
    best = math.inf
    for i in range(n):
        best = min(best, math.hypot(pts[i, 0], pts[i, 1]))
        for j in range(i + 1, n):
            best = min(best, math.hypot(pts[i, 0] - pts[j, 0], pts[i, 1] - pts[j, 1]))
    return best
