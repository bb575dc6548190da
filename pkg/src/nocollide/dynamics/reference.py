"""Interpreted single-replica engines, mirrors of the jitted kernels.

These replicate :mod:`._kernels` operation for operation on the identical
random stream (see :class:`nocollide.rng.ReplicaStream`), so a reference run
reproduces a kernel run bit for bit; tests enforce this.  They exist to
cross-check the kernels and to record trajectories for the debug CSV dump,
so clarity beats speed here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..rng import ReplicaStream
from .scene import RunRecord, Scene, StopSpec

__all__ = ["TrajectoryEvent", "run_lattice_reference", "run_continuous_reference"]

_STATUS_NAMES = ("horizon", "collided", "stopped", "budget")
_KIND_CODES = {"elongation": 0, "center_clearance": 1, "body_clearance": 2, "exit_ball": 3}


@dataclass(frozen=True)
class TrajectoryEvent:
    t: float
    particle: int
    x: float
    y: float


def _gap_to_disk(gx, gy, rho):
    if gx < gy:
        gx, gy = gy, gx
    if gx * gx + gy * gy <= rho * rho:
        return 0.0
    if gx - gy >= rho:
        return gx - rho
    return 0.5 * ((gx + gy) - math.sqrt(2.0 * rho * rho - (gx - gy) * (gx - gy)))


def _body_clearance_f(pos, rects, lattice):
    n = pos.shape[0]
    best = math.inf
    for i in range(n):
        for j in range(i + 1, n):
            dx = abs(pos[i, 0] - pos[j, 0])
            dy = abs(pos[i, 1] - pos[j, 1])
            if lattice:
                m = dx if dx > dy else dy
                v = max(0.0, m - 1.0)
            else:
                v = _gap_to_disk(dx, dy, 1.0)
            best = min(best, v)
    for i in range(n):
        for k in range(rects.shape[0]):
            if lattice:
                gx = max(0.0, rects[k, 0] - (pos[i, 0] + 0.5), (pos[i, 0] - 0.5) - rects[k, 1])
                gy = max(0.0, rects[k, 2] - (pos[i, 1] + 0.5), (pos[i, 1] - 0.5) - rects[k, 3])
                v = gx if gx > gy else gy
            else:
                gx = max(0.0, rects[k, 0] - pos[i, 0], pos[i, 0] - rects[k, 1])
                gy = max(0.0, rects[k, 2] - pos[i, 1], pos[i, 1] - rects[k, 3])
                v = _gap_to_disk(gx, gy, 0.5)
            best = min(best, v)
    return best


def _center_clearance_f(pos):
    n = pos.shape[0]
    best = math.inf
    for i in range(n):
        best = min(best, math.sqrt(pos[i, 0] * pos[i, 0] + pos[i, 1] * pos[i, 1]))
        for j in range(i + 1, n):
            dx = pos[i, 0] - pos[j, 0]
            dy = pos[i, 1] - pos[j, 1]
            best = min(best, math.sqrt(dx * dx + dy * dy))
    return best


class _StopTracker:
    def __init__(self, stops: Sequence[StopSpec], scene: Scene):
        self.stops = list(stops)
        self.times: List[Optional[float]] = [None] * len(self.stops)
        self.centers = []
        flat_init = scene.init.points.reshape(-1)
        for s in self.stops:
            if s.kind == "exit_ball":
                self.centers.append(
                    np.asarray(s.center, dtype=float) if s.center is not None else flat_init.copy()
                )
            else:
                self.centers.append(None)

    def evaluate(self, pos, rects, lattice, t, rho2_max) -> bool:
        terminal_hit = False
        for s, spec in enumerate(self.stops):
            if self.times[s] is not None:
                continue
            if spec.kind == "elongation":
                hit = rho2_max >= spec.threshold * spec.threshold
            elif spec.kind == "center_clearance":
                hit = _center_clearance_f(pos) >= spec.threshold
            elif spec.kind == "body_clearance":
                hit = _body_clearance_f(pos, rects, lattice) >= spec.threshold
            else:
                center = self.centers[s]
                acc = 0.0
                for i in range(pos.shape[0]):
                    dx = pos[i, 0] - center[2 * i]
                    dy = pos[i, 1] - center[2 * i + 1]
                    acc += dx * dx + dy * dy
                hit = acc >= spec.threshold * spec.threshold
            if hit:
                self.times[s] = t
                if spec.terminal:
                    terminal_hit = True
        return terminal_hit

    def as_dict(self):
        return {spec.name: self.times[s] for s, spec in enumerate(self.stops)}


def run_lattice_reference(
    scene: Scene,
    master_seed: int,
    replica: int = 0,
    stops: Sequence[StopSpec] = (),
    max_events: int = 2**62,
    record: bool = False,
) -> Tuple[RunRecord, List[TrajectoryEvent]]:
    scene.require_valid()
    stream = ReplicaStream(master_seed, replica)
    n = scene.n
    pos = scene.init.points.astype(np.int64).copy()
    pos0 = pos.copy()
    posf = pos.astype(np.float64)
    rects_i = scene.rect_array().astype(np.int64) if len(scene.obstacles) else np.zeros((0, 4), np.int64)
    rects_f = rects_i.astype(np.float64)
    tracker = _StopTracker(stops, scene)
    horizon = scene.horizon

    t = 0.0
    events = 0
    rho2_max = 0.0
    status = 0
    col_time = None
    t_end = horizon
    trajectory: List[TrajectoryEvent] = []
    if record:
        for i in range(n):
            trajectory.append(TrajectoryEvent(0.0, i, float(pos[i, 0]), float(pos[i, 1])))

    if tracker.stops and tracker.evaluate(posf, rects_f, True, 0.0, rho2_max):
        return (
            RunRecord(replica, "stopped", False, None, 0.0, 0, 0.0, tracker.as_dict()),
            trajectory,
        )

    while True:
        if events >= max_events:
            status = 3
            t_end = t
            break
        dt = -math.log(1.0 - stream.uniform()) / n
        if t + dt > horizon:
            status = 0
            t_end = horizon
            break
        t = t + dt
        events += 1
        mv = stream.index(4 * n)
        p = mv >> 2
        d = mv & 3
        if d == 0:
            pos[p, 0] += 1
        elif d == 1:
            pos[p, 0] -= 1
        elif d == 2:
            pos[p, 1] += 1
        else:
            pos[p, 1] -= 1
        posf[p, 0] = pos[p, 0]
        posf[p, 1] = pos[p, 1]
        if record:
            trajectory.append(TrajectoryEvent(t, p, float(pos[p, 0]), float(pos[p, 1])))

        ddx = posf[p, 0] - pos0[p, 0]
        ddy = posf[p, 1] - pos0[p, 1]
        disp2 = ddx * ddx + ddy * ddy
        if disp2 > rho2_max:
            rho2_max = disp2

        collided = False
        for q in range(n):
            if q == p:
                continue
            if abs(pos[p, 0] - pos[q, 0]) + abs(pos[p, 1] - pos[q, 1]) <= 1:
                collided = True
                break
        if not collided:
            for k in range(rects_i.shape[0]):
                gx = max(0, rects_i[k, 0] - pos[p, 0], pos[p, 0] - rects_i[k, 1])
                gy = max(0, rects_i[k, 2] - pos[p, 1], pos[p, 1] - rects_i[k, 3])
                if gx + gy <= 1:
                    collided = True
                    break
        if collided:
            status = 1
            col_time = t
            t_end = t
            break

        if tracker.stops and tracker.evaluate(posf, rects_f, True, t, rho2_max):
            status = 2
            t_end = t
            break

    return (
        RunRecord(
            replica,
            _STATUS_NAMES[status],
            status == 1,
            col_time,
            t_end,
            events,
            math.sqrt(rho2_max),
            tracker.as_dict(),
        ),
        trajectory,
    )


def _margins_continuous(pos, rects, origin_flag):
    n = pos.shape[0]
    pair_min = math.inf
    pa = pb = -1
    for i in range(n):
        for j in range(i + 1, n):
            dx = pos[i, 0] - pos[j, 0]
            dy = pos[i, 1] - pos[j, 1]
            m = math.sqrt(dx * dx + dy * dy) - 1.0
            if m < pair_min:
                pair_min = m
                pa, pb = i, j
    best = pair_min
    for i in range(n):
        for k in range(rects.shape[0]):
            gx = max(0.0, rects[k, 0] - pos[i, 0], pos[i, 0] - rects[k, 1])
            gy = max(0.0, rects[k, 2] - pos[i, 1], pos[i, 1] - rects[k, 3])
            m = 2.0 * math.sqrt(gx * gx + gy * gy) - 1.0
            if m < best:
                best = m
    if origin_flag:
        for i in range(n):
            m = math.sqrt(pos[i, 0] * pos[i, 0] + pos[i, 1] * pos[i, 1]) - 1.0
            if m < best:
                best = m
    return best, pair_min, pa, pb


def run_continuous_reference(
    scene: Scene,
    master_seed: int,
    replica: int = 0,
    stops: Sequence[StopSpec] = (),
    dt: float = 1e-2,
    dt_min: float = 1e-6,
    margin_guard: float = 0.25,
    bridge: bool = True,
    increment_scale: float = 1.0,
    max_steps: int = 2**62,
    record: bool = False,
) -> Tuple[RunRecord, List[TrajectoryEvent]]:
    scene.require_valid()
    stream = ReplicaStream(master_seed, replica)
    n = scene.n
    pos = scene.init.points.astype(np.float64).copy()
    pos0 = pos.copy()
    newpos = np.empty_like(pos)
    rects = scene.rect_array()
    origin_flag = scene.origin_particle
    tracker = _StopTracker(stops, scene)
    horizon = scene.horizon

    t = 0.0
    steps = 0
    rho2_max = 0.0
    status = 0
    col_time = None
    t_end = horizon
    h = dt
    trajectory: List[TrajectoryEvent] = []
    if record:
        for i in range(n):
            trajectory.append(TrajectoryEvent(0.0, i, pos[i, 0], pos[i, 1]))

    if tracker.stops and tracker.evaluate(pos, rects, False, 0.0, rho2_max):
        return (
            RunRecord(replica, "stopped", False, None, 0.0, 0, 0.0, tracker.as_dict()),
            trajectory,
        )

    while t < horizon:
        if steps >= max_steps:
            status = 3
            t_end = t
            break
        steps += 1
        h_step = h
        clipped = False
        if horizon - t < h_step:
            h_step = horizon - t
            clipped = True
        sh = math.sqrt(h_step) * increment_scale
        for i in range(n):
            g1, g2 = stream.normal_pair()
            newpos[i, 0] = pos[i, 0] + sh * g1
            newpos[i, 1] = pos[i, 1] + sh * g2
        u_bridge = stream.uniform()

        margin, pair_m1, pa, pb = _margins_continuous(newpos, rects, origin_flag)
        collided = margin <= 0.0
        if not collided and bridge and pa >= 0 and h_step > 0.0:
            dx = pos[pa, 0] - pos[pb, 0]
            dy = pos[pa, 1] - pos[pb, 1]
            pair_m0 = math.sqrt(dx * dx + dy * dy) - 1.0
            if pair_m0 > 0.0 and pair_m1 > 0.0:
                p_cross = math.exp(-pair_m0 * pair_m1 / h_step)
                if u_bridge < p_cross:
                    collided = True

        for i in range(n):
            ddx = newpos[i, 0] - pos0[i, 0]
            ddy = newpos[i, 1] - pos0[i, 1]
            disp2 = ddx * ddx + ddy * ddy
            if disp2 > rho2_max:
                rho2_max = disp2

        if clipped:
            t = horizon
        else:
            t = t + h_step

        if record:
            for i in range(n):
                trajectory.append(TrajectoryEvent(t, i, newpos[i, 0], newpos[i, 1]))

        if collided:
            status = 1
            col_time = t
            t_end = t
            break

        pos[:, :] = newpos

        if tracker.stops and tracker.evaluate(pos, rects, False, t, rho2_max):
            status = 2
            t_end = t
            break

        if margin < margin_guard:
            h = max(h * 0.25, dt_min)
        else:
            h = min(h * 4.0, dt)

    if status == 0:
        t_end = horizon

    return (
        RunRecord(
            replica,
            _STATUS_NAMES[status],
            status == 1,
            col_time,
            t_end,
            steps,
            math.sqrt(rho2_max),
            tracker.as_dict(),
        ),
        trajectory,
    )
