"""Closed-form evaluators for the explicit survival bounds.

Formulas whose constants are published are evaluated numerically (in log
space, so large n and p never overflow).  Estimates that are only known up
to an unspecified universal constant are exposed as exponent *shapes* and
refuse to produce probabilities; the one genuinely unknown constant c0 is
always a caller-supplied parameter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

__all__ = [
    "BoundParams",
    "nu_T0",
    "log_survival_floor",
    "survival_floor",
    "higher_dim_noncollision_bound",
    "CorridorExponent",
    "corridor_exponent_shape",
]


@dataclass(frozen=True)
class BoundParams:
    """Inputs of the headline bound: particle count n, perimeter budget p,
    the user-supplied constant c0, and the model flavor."""

    n: int
    p: int
    c0: float
    flavor: str = "continuous"
    a: Optional[float] = None
    T: Optional[float] = None
    d: Optional[int] = None

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("need n >= 2")
        if self.p < 2:
            raise ValueError("need p >= 2")
        if self.c0 <= 0:
            raise ValueError("c0 must be positive")
        if self.flavor not in ("discrete", "continuous"):
            raise ValueError(f"unknown flavor {self.flavor!r}")


def nu_T0(params: BoundParams) -> Tuple[float, float]:
    """Survival exponent nu = c0 n^4 p^2 ln p and the time threshold T0 from
    which (ln T)^-nu is a valid lower bound: exp(nu^2) in the discrete
    flavor, nu^2 in the continuous one."""
    nu = params.c0 * params.n**4 * params.p**2 * math.log(params.p)
    if params.flavor == "discrete":
        # exp(nu^2) overflows fast; keep it finite in float where possible
        t0 = math.exp(nu * nu) if nu * nu < 700 else math.inf
    else:
        t0 = nu * nu
    return nu, t0


def log_survival_floor(T: float, nu: float) -> float:
    """ln of the bound (ln T)^-nu; log-space form safe for huge nu."""
    if T <= 1.0:
        raise ValueError("need T > 1")
    return -nu * math.log(math.log(T))


def survival_floor(T: float, nu: float) -> float:
    """(ln T)^-nu clamped to [0, 1]."""
    lv = log_survival_floor(T, nu)
    if lv >= 0.0:
        return 1.0
    return math.exp(lv) if lv > -745.0 else 0.0


def higher_dim_noncollision_bound(a: float, d: int, n: int) -> float:
    """Lower bound on the probability that n Brownian particles in dimension
    d >= 3, started pairwise at least a apart and with no fixed obstacles,
    never collide: (1 - a^(2-d))^(n(n-1) / (2 (1 - cos(pi/(n+1)))))."""
    if d < 3:
        raise ValueError("need dimension d >= 3")
    if a < 1:
        raise ValueError("need a >= 1")
    if n < 2:
        raise ValueError("need n >= 2")
    base = 1.0 - a ** (2.0 - d)
    if base <= 0.0:
        return 0.0
    exponent = n * (n - 1) / (2.0 * (1.0 - math.cos(math.pi / (n + 1))))
    return math.exp(exponent * math.log(base))


@dataclass(frozen=True)
class CorridorExponent:
    """Structured exponent (n+p) n^2 ln(theta) of the corridor estimate.

    The universal constant multiplying it is not published, so this object
    deliberately has no numeric probability: use it to report implied
    constants from data.
    """

    n: int
    p: int
    theta: float

    def __post_init__(self):
        if self.theta < 2:
            raise ValueError("need theta >= 2")

    @property
    def exponent(self) -> float:
        return (self.n + self.p) * self.n**2 * math.log(self.theta)

    def probability(self) -> float:
        raise ValueError(
            "corridor estimates carry an unspecified universal constant; "
            "only the exponent shape is available"
        )


def corridor_exponent_shape(n: int, p: int, theta: float) -> CorridorExponent:
    return CorridorExponent(n, p, theta)
