"""Collision-correlation analysis.

Each way the system can collide (a particle pair meeting, or a particle
reaching the fixed one at the origin) is a codimension-two subspace of the
2n-dimensional configuration space.  The Gram matrix of the unit normals to
those subspaces measures how correlated the different collision directions
are; its worst case over orderings is a tridiagonal matrix with a known
closed-form spectrum, and the minimum of its quadratic form over the
non-negative unit sphere is bounded below by 1 - cos(pi/2n).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import List, Optional, Tuple

import numpy as np

from .geometry import Configuration

__all__ = [
    "CollisionIndex",
    "collision_indices",
    "index_count",
    "r_alpha",
    "gradient_matrix",
    "collision_matrix",
    "chain_matrix",
    "spectrum_closed_form",
    "charpoly",
    "chain_matrix_det",
    "correlation_lower_bound",
    "nonneg_form_min",
    "min_collision_correlation",
]

_EXACT_SUPPORT_LIMIT = 15


@dataclass(frozen=True)
class CollisionIndex:
    """One collision direction: a particle pair (i < j) or a single particle
    meeting the fixed obstacle at the origin (j is None)."""

    i: int
    j: Optional[int] = None

    @property
    def kind(self) -> str:
        return "pair" if self.j is not None else "origin"

    @property
    def alpha(self) -> float:
        return math.sqrt(2.0) if self.j is not None else 1.0


def collision_indices(n: int) -> List[CollisionIndex]:
    """Fixed enumeration: all pairs in lexicographic order, then the origin
    indices in ascending particle order.  Length n(n-1)/2 + n."""
    if n < 2:
        raise ValueError("need n >= 2")
    out = [CollisionIndex(i, j) for i, j in combinations(range(n), 2)]
    out.extend(CollisionIndex(i) for i in range(n))
    return out


def index_count(n: int) -> int:
    return n * (n - 1) // 2 + n


def r_alpha(config: Configuration, idx: CollisionIndex) -> Tuple[float, float]:
    """Distance from the configuration to the collision subspace of ``idx``
    together with the scale factor alpha (sqrt(2) for pairs, 1 for origin)."""
    pts = config.points
    if idx.j is not None:
        d = math.hypot(*(pts[idx.i] - pts[idx.j]))
        return d / math.sqrt(2.0), math.sqrt(2.0)
    return math.hypot(pts[idx.i, 0], pts[idx.i, 1]), 1.0


def gradient_matrix(config: Configuration) -> np.ndarray:
    """Unit normals to every collision subspace at the given configuration,
    one row per index, as vectors in R^(2n).

    Pair (i, j): the 2-vector (z_i - z_j)/|z_i - z_j| lands on block i and its
    negation on block j, scaled by 1/sqrt(2).  Origin i: z_i/|z_i| on block i.
    Raises if the configuration sits on a collision subspace.
    """
    pts = config.points
    n = config.n
    idxs = collision_indices(n)
    U = np.zeros((len(idxs), 2 * n))
    for k, idx in enumerate(idxs):
        if idx.j is not None:
            diff = pts[idx.i] - pts[idx.j]
            d = math.hypot(diff[0], diff[1])
            if d == 0.0:
                raise ValueError(f"particles {idx.i} and {idx.j} coincide")
            u = diff / d
            U[k, 2 * idx.i : 2 * idx.i + 2] = u / math.sqrt(2.0)
            U[k, 2 * idx.j : 2 * idx.j + 2] = -u / math.sqrt(2.0)
        else:
            d = math.hypot(pts[idx.i, 0], pts[idx.i, 1])
            if d == 0.0:
                raise ValueError(f"particle {idx.i} sits at the origin")
            U[k, 2 * idx.i : 2 * idx.i + 2] = pts[idx.i] / d
    return U


def collision_matrix(config: Configuration) -> np.ndarray:
    """Gram matrix of the collision-direction normals (unit diagonal,
    symmetric, positive semidefinite)."""
    U = gradient_matrix(config)
    Q = U @ U.T
    np.fill_diagonal(Q, 1.0)
    return 0.5 * (Q + Q.T)


def chain_matrix(n: int) -> np.ndarray:
    """Worst-case correlation matrix of an ordered chain of n collision
    directions beside the fixed obstacle: tridiagonal, unit diagonal, first
    off-diagonal entry -1/sqrt(2), the remaining ones -1/2."""
    if n < 2:
        raise ValueError("need n >= 2")
    Q = np.eye(n)
    for i in range(n - 1):
        off = -1.0 / math.sqrt(2.0) if i == 0 else -0.5
        Q[i, i + 1] = Q[i + 1, i] = off
    return Q


def spectrum_closed_form(n: int) -> np.ndarray:
    """Eigenvalues of :func:`chain_matrix`: 1 - cos((2k+1)pi/2n), ascending."""
    if n < 2:
        raise ValueError("need n >= 2")
    k = np.arange(n)
    return np.sort(1.0 - np.cos((2 * k + 1) * np.pi / (2 * n)))


def charpoly(k: int, lam: float) -> float:
    """Characteristic polynomial of the order-k tridiagonal matrix with unit
    diagonal and -1/2 off-diagonals, by the three-term recurrence."""
    if k < 0:
        raise ValueError("need k >= 0")
    prev, cur = 1.0, 1.0 - lam
    if k == 0:
        return prev
    for _ in range(2, k + 1):
        prev, cur = cur, (1.0 - lam) * cur - 0.25 * prev
    return cur


def chain_matrix_det(n: int, lam: float) -> Tuple[float, float]:
    """det(chain_matrix(n) - lam*I) via the recurrence, plus the largest
    intermediate magnitude (for scale-aware zero tests)."""
    if n < 2:
        raise ValueError("need n >= 2")
    prev, cur = 1.0, 1.0 - lam
    scale = max(1.0, abs(cur))
    for _ in range(2, n):
        prev, cur = cur, (1.0 - lam) * cur - 0.25 * prev
        scale = max(scale, abs(cur))
    det = (1.0 - lam) * cur - 0.5 * prev
    return det, scale


def correlation_lower_bound(n: int) -> float:
    """Uniform lower bound 1 - cos(pi/2n) on the collision-correlation form."""
    if n < 2:
        raise ValueError("need n >= 2")
    return 1.0 - math.cos(math.pi / (2 * n))


def _nonneg_eigen_candidates(vals: np.ndarray, vecs: np.ndarray, tol: float = 1e-11) -> List[float]:
    """Eigenvalues whose eigenvector can be taken entrywise non-negative."""
    out = []
    m = len(vals)
    claimed = np.zeros(m, dtype=bool)
    for c in range(m):
        v = vecs[:, c]
        pivot = v[np.argmax(np.abs(v))]
        if pivot < 0:
            v = -v
        if v.min() >= -tol:
            out.append(float(vals[c]))
            claimed[c] = True
    # repeated eigenvalues: a non-negative vector may hide inside the
    # eigenspace even when no single basis vector qualifies
    c = 0
    while c < m:
        e = c
        while e + 1 < m and vals[e + 1] - vals[c] < 1e-10:
            e += 1
        if e > c and not claimed[c : e + 1].any():
            basis = vecs[:, c : e + 1]
            if _eigenspace_has_nonneg(basis):
                out.append(float(vals[c]))
        c = e + 1
    return out


def _eigenspace_has_nonneg(basis: np.ndarray) -> bool:
    from scipy.optimize import linprog

    dim = basis.shape[1]
    ones = basis.sum(axis=0)
    res = linprog(
        np.zeros(dim),
        A_ub=-basis,
        b_ub=np.zeros(basis.shape[0]),
        A_eq=ones.reshape(1, -1),
        b_eq=[1.0],
        bounds=[(None, None)] * dim,
        method="highs",
    )
    return bool(res.status == 0)


def nonneg_form_min(Q: np.ndarray, exact_limit: int = _EXACT_SUPPORT_LIMIT,
                    starts: int = 64, tol: float = 1e-10, seed: int = 0) -> float:
    """Minimum of V'QV over the non-negative unit sphere.

    For order <= ``exact_limit`` the minimum is found exactly by support
    enumeration: a minimizer restricted to its support is an eigenvector of
    the principal submatrix with non-negative entries, and conversely every
    such eigenpair is feasible, so the global minimum is the smallest
    candidate eigenvalue.  Beyond the limit a multi-start projected gradient
    descent is used (not certified).
    """
    Q = np.asarray(Q, dtype=float)
    m = Q.shape[0]
    if m <= exact_limit:
        return _nonneg_form_min_exact(Q)
    return _nonneg_form_min_pg(Q, starts=starts, tol=tol, seed=seed)


def _nonneg_form_min_exact(Q: np.ndarray) -> float:
    m = Q.shape[0]
    best = math.inf
    by_size: dict[int, List[Tuple[int, ...]]] = {}
    for size in range(1, m + 1):
        by_size[size] = list(combinations(range(m), size))
    for size, supports in by_size.items():
        if size == 1:
            best = min(best, float(Q.diagonal().min()))
            continue
        subs = np.empty((len(supports), size, size))
        for s, I in enumerate(supports):
            subs[s] = Q[np.ix_(I, I)]
        vals, vecs = np.linalg.eigh(subs)
        for s in range(len(supports)):
            for cand in _nonneg_eigen_candidates(vals[s], vecs[s]):
                best = min(best, cand)
    return best


def _nonneg_form_min_pg(Q: np.ndarray, starts: int, tol: float, seed: int) -> float:
    m = Q.shape[0]
    rng = np.random.default_rng(seed)
    lam_max = float(np.linalg.eigvalsh(Q)[-1])
    best = math.inf
    for _ in range(starts):
        v = np.abs(rng.standard_normal(m))
        v /= np.linalg.norm(v)
        step = 0.5 / max(lam_max, 1e-12)
        val = float(v @ Q @ v)
        for _ in range(20000):
            g = 2.0 * (Q @ v)
            w = np.clip(v - step * g, 0.0, None)
            nrm = np.linalg.norm(w)
            if nrm == 0.0:
                w = np.zeros(m)
                w[int(np.argmin(Q.diagonal()))] = 1.0
                nrm = 1.0
            w /= nrm
            new_val = float(w @ Q @ w)
            if new_val > val + 1e-15:
                step *= 0.5
                if step < 1e-18:
                    break
                continue
            moved = np.linalg.norm(w - v)
            v, val = w, new_val
            if moved < tol:
                break
        best = min(best, val)
    return best


def min_collision_correlation(config: Configuration, **kwargs) -> float:
    """Minimum of the collision-correlation quadratic form at one
    configuration (exact by support enumeration for small systems)."""
    return nonneg_form_min(collision_matrix(config), **kwargs)
