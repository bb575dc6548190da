"""Simulation scenes, stopping conditions and run outcomes."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..geometry import (
    Configuration,
    Rect,
    dist_inf_sets,
    dist_p,
    lattice_box,
    point_ball,
)
from ..grouping import ObstacleSet

__all__ = ["Scene", "StopSpec", "RunRecord", "STOP_KINDS"]

STOP_KINDS = ("elongation", "center_clearance", "body_clearance", "exit_ball")


@dataclass(frozen=True)
class StopSpec:
    """First-hit tracker: record when a scalar observable reaches its
    threshold, optionally terminating the run.

    Kinds: ``elongation`` (running max particle displacement), neither
    clearance ever decreases a run on its own; ``exit_ball`` measures the
    Euclidean distance of the full configuration from ``center`` (defaults
    to the scene's initial configuration) in R^(2n).
    """

    kind: str
    threshold: float
    terminal: bool = False
    center: Optional[Tuple[float, ...]] = None

    def __post_init__(self):
        if self.kind not in STOP_KINDS:
            raise ValueError(f"unknown stop kind {self.kind!r}")
        if self.threshold < 0:
            raise ValueError("negative stop threshold")
        if self.center is not None and self.kind != "exit_ball":
            raise ValueError("center only applies to exit_ball stops")

    @property
    def name(self) -> str:
        return f"{self.kind}>={self.threshold:g}"


@dataclass
class Scene:
    """Obstacles plus an initial configuration, flavor and time horizon.

    ``origin_particle`` adds a fixed unit-diameter particle at the origin to
    the collision predicate (continuous flavor only); it is not expressible
    as a rectangle because its collision threshold is center distance 1.
    """

    obstacles: ObstacleSet
    init: Configuration
    horizon: float
    origin_particle: bool = False

    @property
    def flavor(self) -> str:
        return self.init.flavor

    @property
    def n(self) -> int:
        return self.init.n

    def rect_array(self) -> np.ndarray:
        if len(self.obstacles) == 0:
            return np.zeros((0, 4))
        return np.array([r.as_tuple() for r in self.obstacles], dtype=float)

    def min_perimeter_budget(self) -> int:
        """Smallest even p >= 2 compatible with the obstacle set (total
        perimeter at most p, at most p/4 rectangles)."""
        need = max(2.0, self.obstacles.total_perimeter(), 4.0 * len(self.obstacles))
        return int(2 * math.ceil(need / 2.0))

    def validate(self) -> List[str]:
        """All violated initial-condition hypotheses, by name; empty if valid."""
        errors: List[str] = []
        pts = self.init.points
        n = self.n
        rects = list(self.obstacles)
        if self.horizon < 0:
            errors.append("horizon: T >= 0")
        if self.flavor == "lattice":
            if self.origin_particle:
                errors.append("origin particle: continuous flavor only")
            for r in rects:
                if not r.is_integral():
                    errors.append(f"lattice obstacle corners integral: {r.as_tuple()}")
            for i in range(n):
                for j in range(i + 1, n):
                    if dist_p(pts[i], pts[j], 1) <= 1:
                        errors.append(
                            f"particle separation: d_1(z_{i}, z_{j}) > 1"
                        )
            for i in range(n):
                for k, r in enumerate(rects):
                    gx = max(0.0, r.a - pts[i, 0], pts[i, 0] - r.b)
                    gy = max(0.0, r.c - pts[i, 1], pts[i, 1] - r.d)
                    if max(gx, gy) <= 3:
                        errors.append(
                            f"particle-obstacle separation: d_inf(z_{i}, R_{k}) > 3"
                        )
            for a in range(len(rects)):
                for b in range(a + 1, len(rects)):
                    if dist_inf_sets(rects[a], rects[b]) <= 3:
                        errors.append(
                            f"obstacle separation: d_inf(R_{a}, R_{b}) > 3"
                        )
        else:
            bodies = [point_ball(tuple(pts[i])) for i in range(n)]
            for i in range(n):
                for j in range(i + 1, n):
                    if dist_p(pts[i], pts[j], 2) < 2:
                        errors.append(
                            f"particle separation: d_2(z^_{i}, z^_{j}) >= 1"
                        )
            for i in range(n):
                for k, r in enumerate(rects):
                    if dist_inf_sets(bodies[i], r) < 3:
                        errors.append(
                            f"particle-obstacle separation: d_inf(z^_{i}, R_{k}) >= 3"
                        )
            for a in range(len(rects)):
                for b in range(a + 1, len(rects)):
                    if dist_inf_sets(rects[a], rects[b]) < 3:
                        errors.append(
                            f"obstacle separation: d_inf(R_{a}, R_{b}) >= 3"
                        )
            if self.origin_particle:
                for i in range(n):
                    if math.hypot(pts[i, 0], pts[i, 1]) < 2:
                        errors.append(
                            f"particle-origin separation: d_2(z^_{i}, O^) >= 1"
                        )
        return errors

    def require_valid(self) -> None:
        errors = self.validate()
        if errors:
            raise ValueError("invalid scene: " + "; ".join(errors))


@dataclass
class RunRecord:
    """Outcome of one replica."""

    replica: int
    status: str  # horizon | collided | stopped | budget
    collided: bool
    collision_time: Optional[float]
    t_end: float
    event_count: int
    max_elongation: float
    stop_times: Dict[str, Optional[float]] = field(default_factory=dict)
