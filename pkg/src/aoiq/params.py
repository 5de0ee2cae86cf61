"""Model parameters and error types shared by all modules."""
from __future__ import annotations

import math
from dataclasses import dataclass


class UnstableSystem(Exception):
    """Raised when a closed-form quantity is requested for an unstable system."""


class NearBoundary(Exception):
    """Raised when the stability margin is too small for reliable closed forms."""


class OutOfDomain(Exception):
    """Raised when an MGF is evaluated outside its convergence strip."""


class InvalidRate(Exception):
    """Raised when a rate argument is nonpositive where positivity is required."""


class SingularDenominator(Exception):
    """Raised when a flow-graph transfer function has a vanishing denominator."""


class SingularSystem(Exception):
    """Raised when the truncated stationary linear solve fails."""


class InvalidConfig(Exception):
    """Raised when a simulation configuration is rejected."""


# Relative stability margin below which closed forms are refused: pi0 and the
# l2 -> 1 expressions lose all precision via cancellation.
NEAR_BOUNDARY_REL_MARGIN = 1e-9


@dataclass(frozen=True)
class ModelParams:
    """Rates of the two Poisson update streams and their exponential services.

    Stream 1 (rate lambda1, service mu1) is the ordinary FCFS stream; stream 2
    (rate lambda2, service mu2) is the preemptive priority stream.  lambda2 = 0
    is allowed and reduces everything to a plain M/M/1 for stream 1.
    """

    lambda1: float
    lambda2: float
    mu1: float
    mu2: float

    def __post_init__(self):
        for name in ("lambda1", "mu1", "mu2"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0.0):
                raise InvalidRate(f"{name} must be strictly positive and finite, got {v}")
        if not (math.isfinite(self.lambda2) and self.lambda2 >= 0.0):
            raise InvalidRate(f"lambda2 must be nonnegative and finite, got {self.lambda2}")

    @property
    def lam(self) -> float:
        return self.lambda1 + self.lambda2

    @property
    def p1(self) -> float:
        return self.lambda1 / self.lam

    @property
    def p2(self) -> float:
        return self.lambda2 / self.lam
