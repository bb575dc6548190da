"""Jitted replica engines.

Every replica owns its counter-based stream (see :mod:`nocollide.rng`), so
batches parallelize over replicas with bit-reproducible output for any
thread count.  The pure-Python engines in :mod:`.reference` replicate these
kernels operation for operation; keep the two in lockstep when editing
(equality is enforced by tests).

Status codes: 0 horizon reached, 1 collided, 2 terminal stop hit,
3 event/step budget exhausted.
Stop kind codes: 0 elongation, 1 center clearance, 2 body clearance,
3 exit ball.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit, prange

from ..rng import next_index, next_normal_pair, next_uniform, state_new

STATUS_HORIZON = 0
STATUS_COLLIDED = 1
STATUS_STOPPED = 2
STATUS_BUDGET = 3


@njit(cache=True, inline="always")
def _gap_to_disk(gx, gy, rho):
    # d_inf distance from a disk of radius rho to a point with axis gaps (gx, gy)
    if gx < gy:
        gx, gy = gy, gx
    if gx * gx + gy * gy <= rho * rho:
        return 0.0
    if gx - gy >= rho:
        return gx - rho
    return 0.5 * ((gx + gy) - math.sqrt(2.0 * rho * rho - (gx - gy) * (gx - gy)))


@njit(cache=True)
def _body_clearance_f(pos, rects, lattice):
    n = pos.shape[0]
    best = math.inf
    for i in range(n):
        for j in range(i + 1, n):
            dx = abs(pos[i, 0] - pos[j, 0])
            dy = abs(pos[i, 1] - pos[j, 1])
            if lattice:
                m = dx if dx > dy else dy
                v = m - 1.0
                if v < 0.0:
                    v = 0.0
            else:
                v = _gap_to_disk(dx, dy, 1.0)
            if v < best:
                best = v
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
            if v < best:
                best = v
    return best


@njit(cache=True)
def _center_clearance_f(pos):
    n = pos.shape[0]
    best = math.inf
    for i in range(n):
        v = math.sqrt(pos[i, 0] * pos[i, 0] + pos[i, 1] * pos[i, 1])
        if v < best:
            best = v
        for j in range(i + 1, n):
            dx = pos[i, 0] - pos[j, 0]
            dy = pos[i, 1] - pos[j, 1]
            v = math.sqrt(dx * dx + dy * dy)
            if v < best:
                best = v
    return best


@njit(cache=True)
def _eval_stops(pos, rects, lattice, t, rho2_max, stop_kinds, stop_thresh,
                stop_terminal, exit_center, stop_times):
    """Record first-hit times; returns True when a terminal stop fires."""
    terminal_hit = False
    for s in range(stop_kinds.shape[0]):
        if not math.isnan(stop_times[s]):
            continue
        kind = stop_kinds[s]
        hit = False
        if kind == 0:
            hit = rho2_max >= stop_thresh[s] * stop_thresh[s]
        elif kind == 1:
            hit = _center_clearance_f(pos) >= stop_thresh[s]
        elif kind == 2:
            hit = _body_clearance_f(pos, rects, lattice) >= stop_thresh[s]
        else:
            acc = 0.0
            n = pos.shape[0]
            for i in range(n):
                dx = pos[i, 0] - exit_center[2 * i]
                dy = pos[i, 1] - exit_center[2 * i + 1]
                acc += dx * dx + dy * dy
            hit = acc >= stop_thresh[s] * stop_thresh[s]
        if hit:
            stop_times[s] = t
            if stop_terminal[s]:
                terminal_hit = True
    return terminal_hit


@njit(cache=True)
def lattice_replica(master_seed, replica, pos0, rects_i, rects_f, horizon,
                    stop_kinds, stop_thresh, stop_terminal, exit_center,
                    max_events, stop_times):
    """Event-driven continuous-time walk of n particles among rectangles.

    Global exponential clock of rate n, uniform particle choice, uniform
    direction; collision when some inter-particle d_1 or particle-rectangle
    lattice d_1 reaches 1, checked after every jump (positions change only
    at jumps, so this is exact).
    """
    n = pos0.shape[0]
    st, buf = state_new(master_seed, replica)
    pos = pos0.copy()
    posf = pos0.astype(np.float64)
    t = 0.0
    events = 0
    rho2_max = 0.0
    status = STATUS_HORIZON
    col_time = math.nan
    t_end = horizon

    if stop_kinds.shape[0] > 0:
        if _eval_stops(posf, rects_f, True, 0.0, rho2_max, stop_kinds,
                       stop_thresh, stop_terminal, exit_center, stop_times):
            return STATUS_STOPPED, col_time, 0.0, events, 0.0

    while True:
        if events >= max_events:
            status = STATUS_BUDGET
            t_end = t
            break
        dt = -math.log(1.0 - next_uniform(st, buf)) / n
        if t + dt > horizon:
            status = STATUS_HORIZON
            t_end = horizon
            break
        t = t + dt
        events += 1
        mv = next_index(st, buf, 4 * n)
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

        ddx = posf[p, 0] - pos0[p, 0]
        ddy = posf[p, 1] - pos0[p, 1]
        disp2 = ddx * ddx + ddy * ddy
        if disp2 > rho2_max:
            rho2_max = disp2

        collided = False
        for q in range(n):
            if q == p:
                continue
            d1 = abs(pos[p, 0] - pos[q, 0]) + abs(pos[p, 1] - pos[q, 1])
            if d1 <= 1:
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
            status = STATUS_COLLIDED
            col_time = t
            t_end = t
            break

        if stop_kinds.shape[0] > 0:
            if _eval_stops(posf, rects_f, True, t, rho2_max, stop_kinds,
                           stop_thresh, stop_terminal, exit_center, stop_times):
                status = STATUS_STOPPED
                t_end = t
                break

    return status, col_time, t_end, events, math.sqrt(rho2_max)


@njit(cache=True)
def _margins_continuous(pos, rects, origin_flag):
    """Minimum collision margin at a state, plus the tightest particle pair.

    Margins: pair distance - 1; 2 * (particle, rectangle) distance - 1;
    particle-origin distance - 1 when the fixed particle is present.
    """
    n = pos.shape[0]
    pair_min = math.inf
    pa = -1
    pb = -1
    for i in range(n):
        for j in range(i + 1, n):
            dx = pos[i, 0] - pos[j, 0]
            dy = pos[i, 1] - pos[j, 1]
            m = math.sqrt(dx * dx + dy * dy) - 1.0
            if m < pair_min:
                pair_min = m
                pa = i
                pb = j
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


@njit(cache=True)
def continuous_replica(master_seed, replica, pos0, rects, origin_flag, horizon,
                       dt0, dt_min, guard, bridge_on, increment_scale,
                       stop_kinds, stop_thresh, stop_terminal, exit_center,
                       max_steps, stop_times):
    """Time-stepped planar Brownian particles among rectangles.

    Gaussian increments of variance h per coordinate; the step shrinks by a
    factor 4 (down to dt_min) while any collision margin is below the guard
    and recovers geometrically otherwise.  A Brownian-bridge correction on
    the tightest particle pair catches mid-step crossings of the
    inter-particle threshold.
    """
    n = pos0.shape[0]
    st, buf = state_new(master_seed, replica)
    pos = pos0.copy()
    newpos = np.empty_like(pos)
    t = 0.0
    steps = 0
    rho2_max = 0.0
    status = STATUS_HORIZON
    col_time = math.nan
    t_end = horizon
    h = dt0

    if stop_kinds.shape[0] > 0:
        if _eval_stops(pos, rects, False, 0.0, rho2_max, stop_kinds,
                       stop_thresh, stop_terminal, exit_center, stop_times):
            return STATUS_STOPPED, col_time, 0.0, steps, 0.0

    while t < horizon:
        if steps >= max_steps:
            status = STATUS_BUDGET
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
            g1, g2 = next_normal_pair(st, buf)
            newpos[i, 0] = pos[i, 0] + sh * g1
            newpos[i, 1] = pos[i, 1] + sh * g2
        u_bridge = next_uniform(st, buf)

        margin, pair_m1, pa, pb = _margins_continuous(newpos, rects, origin_flag)
        collided = margin <= 0.0
        if not collided and bridge_on and pa >= 0 and h_step > 0.0:
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

        if collided:
            status = STATUS_COLLIDED
            col_time = t
            t_end = t
            break

        for i in range(n):
            pos[i, 0] = newpos[i, 0]
            pos[i, 1] = newpos[i, 1]

        if stop_kinds.shape[0] > 0:
            if _eval_stops(pos, rects, False, t, rho2_max, stop_kinds,
                           stop_thresh, stop_terminal, exit_center, stop_times):
                status = STATUS_STOPPED
                t_end = t
                break

        if margin < guard:
            h = h * 0.25
            if h < dt_min:
                h = dt_min
        else:
            h = h * 4.0
            if h > dt0:
                h = dt0

    if status == STATUS_HORIZON:
        t_end = horizon

    return status, col_time, t_end, steps, math.sqrt(rho2_max)


@njit(parallel=True, cache=True)
def lattice_batch(master_seed, n_replicas, pos0, rects_i, rects_f, horizon,
                  stop_kinds, stop_thresh, stop_terminal, exit_center,
                  max_events, out_status, out_coltime, out_tend, out_events,
                  out_rho, out_stop_times):
    for r in prange(n_replicas):
        status, col_time, t_end, events, rho = lattice_replica(
            master_seed, r, pos0, rects_i, rects_f, horizon,
            stop_kinds, stop_thresh, stop_terminal, exit_center,
            max_events, out_stop_times[r],
        )
        out_status[r] = status
        out_coltime[r] = col_time
        out_tend[r] = t_end
        out_events[r] = events
        out_rho[r] = rho


@njit(parallel=True, cache=True)
def continuous_batch(master_seed, n_replicas, pos0, rects, origin_flag, horizon,
                     dt0, dt_min, guard, bridge_on, increment_scale,
                     stop_kinds, stop_thresh, stop_terminal, exit_center,
                     max_steps, out_status, out_coltime, out_tend, out_events,
                     out_rho, out_stop_times):
    for r in prange(n_replicas):
        status, col_time, t_end, steps, rho = continuous_replica(
            master_seed, r, pos0, rects, origin_flag, horizon,
            dt0, dt_min, guard, bridge_on, increment_scale,
            stop_kinds, stop_thresh, stop_terminal, exit_center,
            max_steps, out_stop_times[r],
        )
        out_status[r] = status
        out_coltime[r] = col_time
        out_tend[r] = t_end
        out_events[r] = steps
        out_rho[r] = rho
