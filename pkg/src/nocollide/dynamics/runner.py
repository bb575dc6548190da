"""Batch execution of replicas over the jitted kernels.

Each replica's stream is keyed by (master_seed, replica_index), so batch
results are independent of thread count and batch splitting; merging is a
plain array write indexed by replica.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from . import _kernels
from .scene import RunRecord, Scene, StopSpec

__all__ = ["BatchResult", "run_batch", "run_lattice", "run_continuous", "StepControl"]

_KIND_CODES = {"elongation": 0, "center_clearance": 1, "body_clearance": 2, "exit_ball": 3}
_STATUS_NAMES = ("horizon", "collided", "stopped", "budget")


@dataclass(frozen=True)
class StepControl:
    """Continuous-flavor discretization knobs."""

    dt: float = 1e-2
    dt_min: float = 1e-6
    margin_guard: float = 0.25
    bridge: bool = True
    increment_scale: float = 1.0

    def __post_init__(self):
        if not (0 < self.dt_min <= self.dt):
            raise ValueError("need 0 < dt_min <= dt")
        if self.margin_guard < 0:
            raise ValueError("negative margin guard")


@dataclass
class BatchResult:
    """Struct-of-arrays outcome of a replica batch."""

    scene: Scene
    master_seed: int
    stops: List[StopSpec]
    status: np.ndarray
    collision_time: np.ndarray
    t_end: np.ndarray
    event_count: np.ndarray
    max_elongation: np.ndarray
    stop_times: np.ndarray

    @property
    def n_replicas(self) -> int:
        return len(self.status)

    @property
    def collided(self) -> np.ndarray:
        return self.status == _kernels.STATUS_COLLIDED

    def survivors(self, horizon: Optional[float] = None) -> int:
        """Replicas not collided (by ``horizon``, when given: nested horizons
        on one batch share trajectories, so survivor counts are coupled)."""
        if horizon is None:
            return int(np.sum(~self.collided))
        if horizon > self.scene.horizon:
            raise ValueError("horizon exceeds the simulated horizon")
        return int(np.sum(~self.collided | (self.collision_time > horizon)))

    def record(self, r: int) -> RunRecord:
        ct = float(self.collision_time[r])
        stop_times = {}
        for s, spec in enumerate(self.stops):
            v = float(self.stop_times[r, s])
            stop_times[spec.name] = None if math.isnan(v) else v
        return RunRecord(
            replica=r,
            status=_STATUS_NAMES[self.status[r]],
            collided=bool(self.status[r] == _kernels.STATUS_COLLIDED),
            collision_time=None if math.isnan(ct) else ct,
            t_end=float(self.t_end[r]),
            event_count=int(self.event_count[r]),
            max_elongation=float(self.max_elongation[r]),
            stop_times=stop_times,
        )

    def records(self) -> List[RunRecord]:
        return [self.record(r) for r in range(self.n_replicas)]


def _encode_stops(scene: Scene, stops: Sequence[StopSpec]):
    kinds = np.array([_KIND_CODES[s.kind] for s in stops], dtype=np.int64)
    thresh = np.array([s.threshold for s in stops], dtype=np.float64)
    terminal = np.array([s.terminal for s in stops], dtype=np.bool_)
    center = scene.init.points.reshape(-1).astype(np.float64)
    for s in stops:
        if s.kind == "exit_ball" and s.center is not None:
            center = np.asarray(s.center, dtype=np.float64)
    return kinds, thresh, terminal, center


def set_threads(threads: Optional[int]) -> None:
    if threads is not None:
        import numba

        numba.set_num_threads(threads)


def run_batch(
    scene: Scene,
    n_replicas: int,
    master_seed: int,
    stops: Sequence[StopSpec] = (),
    step: Optional[StepControl] = None,
    max_events: int = 2**62,
    threads: Optional[int] = None,
) -> BatchResult:
    """Run ``n_replicas`` independent replicas of the scene.

    The scene must validate; an infinite horizon requires at least one
    terminal stop so every replica terminates.
    """
    scene.require_valid()
    if n_replicas < 1:
        raise ValueError("need at least one replica")
    if math.isinf(scene.horizon) and not any(s.terminal for s in stops):
        raise ValueError("infinite horizon needs a terminal stop")
    set_threads(threads)

    kinds, thresh, terminal, center = _encode_stops(scene, stops)
    out_status = np.empty(n_replicas, dtype=np.int64)
    out_coltime = np.empty(n_replicas, dtype=np.float64)
    out_tend = np.empty(n_replicas, dtype=np.float64)
    out_events = np.empty(n_replicas, dtype=np.int64)
    out_rho = np.empty(n_replicas, dtype=np.float64)
    out_stop_times = np.full((n_replicas, len(stops)), np.nan, dtype=np.float64)

    if scene.flavor == "lattice":
        pos0 = scene.init.points.astype(np.int64)
        rects_i = scene.rect_array().astype(np.int64)
        rects_f = rects_i.astype(np.float64)
        _kernels.lattice_batch(
            master_seed, n_replicas, pos0, rects_i, rects_f, float(scene.horizon),
            kinds, thresh, terminal, center, max_events,
            out_status, out_coltime, out_tend, out_events, out_rho, out_stop_times,
        )
    else:
        sc = step or StepControl()
        pos0 = scene.init.points.astype(np.float64)
        rects = scene.rect_array()
        _kernels.continuous_batch(
            master_seed, n_replicas, pos0, rects, scene.origin_particle,
            float(scene.horizon), sc.dt, sc.dt_min, sc.margin_guard,
            sc.bridge, sc.increment_scale,
            kinds, thresh, terminal, center, max_events,
            out_status, out_coltime, out_tend, out_events, out_rho, out_stop_times,
        )

    return BatchResult(
        scene=scene,
        master_seed=master_seed,
        stops=list(stops),
        status=out_status,
        collision_time=out_coltime,
        t_end=out_tend,
        event_count=out_events,
        max_elongation=out_rho,
        stop_times=out_stop_times,
    )


def run_lattice(scene: Scene, stops: Sequence[StopSpec] = (), master_seed: int = 0,
                replica: int = 0, max_events: int = 2**62) -> RunRecord:
    """Single lattice replica through the jitted kernel."""
    if scene.flavor != "lattice":
        raise ValueError("lattice scene required")
    scene.require_valid()
    kinds, thresh, terminal, center = _encode_stops(scene, stops)
    stop_times = np.full(len(stops), np.nan)
    pos0 = scene.init.points.astype(np.int64)
    rects_i = scene.rect_array().astype(np.int64)
    status, col_time, t_end, events, rho = _kernels.lattice_replica(
        master_seed, replica, pos0, rects_i, rects_i.astype(np.float64),
        float(scene.horizon), kinds, thresh, terminal, center, max_events, stop_times,
    )
    return _single_record(replica, status, col_time, t_end, events, rho, stops, stop_times)


def run_continuous(scene: Scene, stops: Sequence[StopSpec] = (), master_seed: int = 0,
                   replica: int = 0, step: Optional[StepControl] = None,
                   max_events: int = 2**62) -> RunRecord:
    """Single continuous replica through the jitted kernel."""
    if scene.flavor != "continuous":
        raise ValueError("continuous scene required")
    scene.require_valid()
    sc = step or StepControl()
    kinds, thresh, terminal, center = _encode_stops(scene, stops)
    stop_times = np.full(len(stops), np.nan)
    status, col_time, t_end, steps, rho = _kernels.continuous_replica(
        master_seed, replica, scene.init.points.astype(np.float64),
        scene.rect_array(), scene.origin_particle, float(scene.horizon),
        sc.dt, sc.dt_min, sc.margin_guard, sc.bridge, sc.increment_scale,
        kinds, thresh, terminal, center, max_events, stop_times,
    )
    return _single_record(replica, status, col_time, t_end, steps, rho, stops, stop_times)


def _single_record(replica, status, col_time, t_end, events, rho, stops, stop_times):
    times = {}
    for s, spec in enumerate(stops):
        v = float(stop_times[s])
        times[spec.name] = None if math.isnan(v) else v
    return RunRecord(
        replica=replica,
        status=_STATUS_NAMES[status],
        collided=status == _kernels.STATUS_COLLIDED,
        collision_time=None if math.isnan(col_time) else float(col_time),
        t_end=float(t_end),
        event_count=int(events),
        max_elongation=float(rho),
        stop_times=times,
    )
