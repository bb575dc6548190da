"""Barrier functions on configuration space and their numerical
certification.

The workhorse is the product of powered log-distances to the collision
subspaces, g = prod_k (ln alpha_k r_k)^(1/gamma): it vanishes on the
collision set and, with gamma at most the collision-correlation bound, is
subharmonic away from it.  That subharmonicity is what turns the product
into a lower bound for exit-before-collision probabilities, and this module
checks it by finite differences on random samples.  The plain product of
pair log-distances (the would-be analogue of the one-dimensional Vandermonde
harmonic function) is also provided; it is *not* subharmonic and the same
harness finds witnesses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Callable, List, Optional, Sequence

import numpy as np

from .geometry import Configuration, center_clearance
from .spectral import (
    CollisionIndex,
    collision_indices,
    correlation_lower_bound,
    gradient_matrix,
    r_alpha,
)

__all__ = [
    "BarrierSpec",
    "BarrierDomainError",
    "barrier_value",
    "pair_log_product",
    "weight_vector",
    "laplacian_ratio_analytic",
    "fd_laplacian",
    "CertifyReport",
    "certify_subharmonic",
    "sample_configurations",
    "ball_exit_survival_bound",
    "log_scale_invariance_bound",
]


class BarrierDomainError(ValueError):
    """Raised when a configuration sits on or inside the collision set."""

    def __init__(self, idx: CollisionIndex, value: float):
        self.index = idx
        self.value = value
        super().__init__(
            f"barrier undefined: scaled distance {value:.6g} <= 1 for collision index {idx}"
        )


@dataclass(frozen=True)
class BarrierSpec:
    """Parameters of the product barrier.

    ``gamma`` defaults to the proven correlation bound 1 - cos(pi/2n);
    ``include_origin`` switches the fixed particle at the origin on or off
    (off gives the pairs-only product family).
    """

    n: int
    gamma: Optional[float] = None
    include_origin: bool = True

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("need n >= 2")
        if self.gamma is not None and self.gamma <= 0:
            raise ValueError("gamma must be positive")

    @property
    def exponent(self) -> float:
        g = self.gamma if self.gamma is not None else correlation_lower_bound(self.n)
        return 1.0 / g

    def indices(self) -> List[CollisionIndex]:
        idxs = collision_indices(self.n)
        if self.include_origin:
            return idxs
        return [k for k in idxs if k.kind == "pair"]


def _scaled_distances(spec: BarrierSpec, config: Configuration):
    for idx in spec.indices():
        r, alpha = r_alpha(config, idx)
        yield idx, r, alpha * r


def barrier_value(spec: BarrierSpec, config: Configuration) -> float:
    """Value of prod_k (ln alpha_k r_k)^(1/gamma); positive and increasing in
    every scaled distance.  Raises :class:`BarrierDomainError` (with the
    offending index) whenever some scaled distance is <= 1."""
    s = spec.exponent
    total_log = 0.0
    for idx, _r, ar in _scaled_distances(spec, config):
        if ar <= 1.0:
            raise BarrierDomainError(idx, ar)
        total_log += math.log(math.log(ar))
    return math.exp(s * total_log)


def pair_log_product(config: Configuration) -> float:
    """Product over particle pairs of ln d_2(z_i, z_j) (exponent 1, origin
    excluded).  Defined where all pairwise distances exceed 1."""
    return barrier_value(BarrierSpec(config.n, gamma=1.0, include_origin=False), config)


def weight_vector(spec: BarrierSpec, config: Configuration) -> np.ndarray:
    """Log-gradient magnitudes |grad f_k| / f_k = s / (r_k ln(alpha_k r_k)),
    one entry per included collision index."""
    s = spec.exponent
    out = []
    for idx, r, ar in _scaled_distances(spec, config):
        if ar <= 1.0:
            raise BarrierDomainError(idx, ar)
        out.append(s / (r * math.log(ar)))
    return np.array(out)


def laplacian_ratio_analytic(spec: BarrierSpec, config: Configuration) -> float:
    """Closed form for (Laplacian of the barrier) / (barrier value).

    Each factor is a radial function of the distance to a codimension-two
    subspace, so its Laplacian contribution is s(s-1)/(r ln(ar))^2 * ...;
    the cross terms contract the correlation matrix against the log-gradient
    weights.
    """
    s = spec.exponent
    idxs = spec.indices()
    W = weight_vector(spec, config)
    U = gradient_matrix(config)
    all_idxs = collision_indices(config.n)
    rows = [all_idxs.index(k) for k in idxs]
    Usub = U[rows]
    Q = Usub @ Usub.T
    np.fill_diagonal(Q, 1.0)
    own = 0.0
    for idx, r, ar in _scaled_distances(spec, config):
        own += s * (s - 1.0) / (r * math.log(ar)) ** 2
    wnorm2 = float(W @ W)
    if wnorm2 == 0.0:
        return own
    vhat = W / math.sqrt(wnorm2)
    return own + wnorm2 * (float(vhat @ Q @ vhat) - 1.0)


def fd_laplacian(f: Callable[[np.ndarray], float], z: np.ndarray, h: float) -> float:
    """Central second-difference Laplacian over all 2n coordinates."""
    if h <= 0:
        raise ValueError("step must be positive")
    z = np.asarray(z, dtype=float)
    f0 = f(z)
    total = 0.0
    flat = z.reshape(-1)
    for c in range(flat.size):
        bump = np.zeros_like(flat)
        bump[c] = h
        total += f(( flat + bump).reshape(z.shape)) + f((flat - bump).reshape(z.shape)) - 2.0 * f0
    return total / (h * h)


@dataclass
class CertifyReport:
    """Per-sample finite-difference subharmonicity check results."""

    h: float
    tol: float
    values: List[float] = dc_field(default_factory=list)
    laplacians: List[float] = dc_field(default_factory=list)
    thresholds: List[float] = dc_field(default_factory=list)
    violations: List[int] = dc_field(default_factory=list)

    @property
    def n_samples(self) -> int:
        return len(self.values)

    @property
    def n_violations(self) -> int:
        return len(self.violations)


def certify_subharmonic(
    field: Callable[[np.ndarray], float],
    samples: Sequence[Configuration],
    h: float = 1e-3,
    tol: float = 1e-6,
) -> CertifyReport:
    """Evaluate the finite-difference Laplacian of ``field`` at every sample
    and flag negative values beyond the noise floor.

    The floor combines the relative tolerance with a Richardson estimate of
    the h^2 truncation error (from Laplacians at h and 2h), so a violation
    means the sign is genuinely negative, not discretization noise.
    Violations are data, not errors.
    """
    report = CertifyReport(h=h, tol=tol)
    for i, config in enumerate(samples):
        z = config.points
        value = field(z)
        lap_h = fd_laplacian(field, z, h)
        lap_2h = fd_laplacian(field, z, 2.0 * h)
        truncation = abs(lap_h - lap_2h) / 3.0
        threshold = max(tol * max(1.0, abs(value)), 10.0 * truncation)
        report.values.append(value)
        report.laplacians.append(lap_h)
        report.thresholds.append(threshold)
        if lap_h < -threshold:
            report.violations.append(i)
    return report


def sample_configurations(
    n: int,
    count: int,
    min_clearance: float = 2.0,
    box: float = 10.0,
    seed: int = 0,
) -> List[Configuration]:
    """Uniform configurations in [-box, box]^2 with center clearance at least
    ``min_clearance`` (rejection sampling)."""
    rng = np.random.default_rng(seed)
    out: List[Configuration] = []
    while len(out) < count:
        pts = rng.uniform(-box, box, size=(n, 2))
        config = Configuration(pts, "continuous")
        if center_clearance(config) >= min_clearance:
            out.append(config)
    return out


def ball_exit_survival_bound(a: float, T: float, n: int) -> float:
    """Proven lower bound on the chance that n Brownian particles, started
    with center clearance >= a from each other and from a fixed unit particle
    at the origin, collide with nothing before the configuration exits the
    ball of radius T around its starting point.

    Computed in log space; lies in (0, 1], decreasing in T, increasing in a.
    """
    if a < 2:
        raise ValueError("need a >= 2")
    if T < 0:
        raise ValueError("need T >= 0")
    if n < 2:
        raise ValueError("need n >= 2")
    gamma = correlation_lower_bound(n)
    la = math.log(a)
    log_val = n * math.log(la / math.log(a + T))
    log_val += (n * (n - 1) / 2.0) * math.log(la / math.log(a + math.sqrt(2.0) * T))
    return math.exp(log_val / gamma)


def log_scale_invariance_bound(a: float, b: float, n: int, c_eps: float) -> float:
    """(ln a / ln b)^(c_eps * n^4): the log-scale-invariant form of the exit
    bound, with the epsilon-dependent constant supplied by the caller."""
    if a < 2:
        raise ValueError("need a >= 2")
    if b < a:
        raise ValueError("need b >= a")
    if c_eps <= 0:
        raise ValueError("c_eps must be positive")
    return math.exp(c_eps * n**4 * math.log(math.log(a) / math.log(b)))
