"""Closed-form engine: stability, stationary distribution and headline ages.

The ladder of state probabilities (pi_i, pi'_i) is obtained from the spectral
decomposition of the 4x4 recursion matrix of the detailed balance equations;
a matrix-power evaluation path is kept alongside for cross-checking.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .params import (
    NEAR_BOUNDARY_REL_MARGIN,
    InvalidRate,
    ModelParams,
    NearBoundary,
    OutOfDomain,
    UnstableSystem,
)


@dataclass(frozen=True)
class StabilityReport:
    margin: float
    is_stable: bool
    pi0: float | None


@dataclass(frozen=True)
class SpectralDecomposition:
    a1: float
    a2: float
    a3: float
    a4: float
    a5: float
    l1: float
    l2: float
    e1: np.ndarray
    e2: np.ndarray
    mix: float  # 1/(l2 - l1); ladder = mix*(l2^i*e2 - l1^i*e1)*pi0


@dataclass(frozen=True)
class StationaryDistribution:
    pi0: float
    ladder: list[tuple[float, float]]  # (pi_i, pi_prime_i), i = 1..i_max
    tail_mass: float


def check_stability(params: ModelParams) -> StabilityReport:
    margin = params.mu1 - params.lambda1 * (1.0 + params.lambda2 / params.mu2)
    stable = margin > 0.0
    pi0 = None
    if stable:
        pi0 = params.mu2 / (params.mu2 + params.lambda2) - params.lambda1 / params.mu1
    return StabilityReport(margin=margin, is_stable=stable, pi0=pi0)


def _require_stable(params: ModelParams) -> StabilityReport:
    rep = check_stability(params)
    if not rep.is_stable:
        raise UnstableSystem(
            f"mu1 <= lambda1*(1 + lambda2/mu2) (margin={rep.margin:g})"
        )
    if rep.margin / params.mu1 < NEAR_BOUNDARY_REL_MARGIN:
        raise NearBoundary(
            f"relative margin {rep.margin / params.mu1:.3e} too small for closed forms"
        )
    return rep


def solve_quadratic(b: float, c: float) -> tuple[float, float]:
    """Roots of x^2 + b*x + c, sorted ascending, in the cancellation-safe form."""
    disc = b * b - 4.0 * c
    if disc < 0.0:
        raise ValueError(f"complex roots, discriminant {disc:g}")
    sq = math.sqrt(disc)
    if b >= 0.0:
        q = -0.5 * (b + sq)
    else:
        q = -0.5 * (b - sq)
    if q == 0.0:  # b == c == 0
        return 0.0, 0.0
    r1, r2 = q, c / q
    return (r1, r2) if r1 <= r2 else (r2, r1)


def rate_ratios(params: ModelParams) -> tuple[float, float, float, float, float]:
    l1, l2, m1, m2 = params.lambda1, params.lambda2, params.mu1, params.mu2
    a1 = 1.0 + (l1 + l2) / m1 - m2 * l2 / (m1 * (m2 + l1))
    a2 = m2 * l1 / (m1 * (m2 + l1))
    a3 = l1 / m1
    a4 = l2 / (m2 + l1)
    a5 = l1 / (m2 + l1)
    return a1, a2, a3, a4, a5


def spectral(params: ModelParams) -> SpectralDecomposition:
    _require_stable(params)
    a1, a2, a3, a4, a5 = rate_ratios(params)
    # p(l) = l^2 - l*(a1 + a5 - 1) + a3*a5
    l1, l2 = solve_quadratic(-(a1 + a5 - 1.0), a3 * a5)
    if not (0.0 < l1 <= l2 < 1.0):
        raise UnstableSystem(f"ladder eigenvalues outside (0,1): {l1:g}, {l2:g}")
    if (l2 - l1) < 1e-12 * l2:
        raise NearBoundary(f"coincident ladder eigenvalues l1 = l2 = {l2:g}")

    def evec(l: float) -> np.ndarray:
        return np.array([l * (l - a5), l * a4, l - a5, a4])

    return SpectralDecomposition(
        a1=a1, a2=a2, a3=a3, a4=a4, a5=a5,
        l1=l1, l2=l2, e1=evec(l1), e2=evec(l2), mix=1.0 / (l2 - l1),
    )


def default_i_max(pi0: float, l2: float) -> int:
    """Truncation depth at which the discarded geometric tail is below 1e-10."""
    k = math.ceil(math.log(1e-10 / pi0) / math.log(l2))
    return max(8, min(k, 100_000))


def stationary(params: ModelParams, i_max: int | None = None) -> StationaryDistribution:
    rep = _require_stable(params)
    sp = spectral(params)
    pi0 = rep.pi0
    assert pi0 is not None
    if i_max is None:
        i_max = default_i_max(pi0, sp.l2)
    if i_max < 1:
        raise ValueError("i_max must be >= 1")
    ladder = []
    total = pi0
    # A_i = mix*(l2^i*e2 - l1^i*e1)*pi0 = [pi_{i+1}, pi'_{i+1}, pi_i, pi'_i]
    p1 = sp.l1
    p2 = sp.l2
    for _ in range(i_max):
        pi_i = sp.mix * (p2 * (sp.l2 - sp.a5) - p1 * (sp.l1 - sp.a5)) * pi0
        pip_i = sp.mix * sp.a4 * (p2 - p1) * pi0
        ladder.append((pi_i, pip_i))
        total += pi_i + pip_i
        p1 *= sp.l1
        p2 *= sp.l2
    return StationaryDistribution(pi0=pi0, ladder=ladder, tail_mass=1.0 - total)


def recursion_matrix(params: ModelParams) -> np.ndarray:
    """4x4 matrix H driving [pi_{i+1}, pi'_{i+1}, pi_i, pi'_i]."""
    a1, a2, a3, a4, a5 = rate_ratios(params)
    return np.array([
        [a1, -a2, -a3, 0.0],
        [a4, a5, 0.0, 0.0],
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
    ])


def stationary_power_path(params: ModelParams, i_max: int) -> StationaryDistribution:
    """Same ladder as `stationary`, via iterating the detailed-balance recursion."""
    rep = _require_stable(params)
    pi0 = rep.pi0
    assert pi0 is not None
    a1, _, _, a4, _ = rate_ratios(params)
    h = recursion_matrix(params)
    vec = np.array([a1 - 1.0, a4, 1.0, 0.0]) * pi0  # A_0
    ladder = []
    total = pi0
    for _ in range(i_max):
        vec = h @ vec
        pi_i, pip_i = vec[2], vec[3]
        ladder.append((pi_i, pip_i))
        total += pi_i + pip_i
    return StationaryDistribution(pi0=pi0, ladder=ladder, tail_mass=1.0 - total)


def queue_length_mgf(params: ModelParams, s: float) -> float:
    rep = _require_stable(params)
    l1, l2, m1, m2 = params.lambda1, params.lambda2, params.mu1, params.mu2
    x = math.exp(s)
    # Denominator quadratic in x = e^s; the MGF geometric series converges only
    # strictly below its smaller root.
    a = l1 * l1
    b = -(l1 * l1 + l1 * l2 + l1 * m1 + l1 * m2)
    c = m1 * m2 + m1 * l1
    x_min, _ = solve_quadratic(b / a, c / a)
    if x >= x_min:
        raise OutOfDomain(f"e^s = {x:g} not below convergence bound {x_min:g}")
    num = rep.pi0 * m1 * (l1 + l2 + m2 - l1 * x)
    den = c + b * x + a * x * x
    return num / den


def expected_queue_length(params: ModelParams) -> float:
    _require_stable(params)
    l1, l2, m1, m2 = params.lambda1, params.lambda2, params.mu1, params.mu2
    num = l1 * (2.0 * l2 * m2 + l2 * m1 + l2 * l2 + m2 * m2)
    den = (m2 + l2) * (m1 * m2 - l1 * (m2 + l2))
    return num / den


def peak_age_ordinary(params: ModelParams) -> float:
    return (1.0 + expected_queue_length(params)) / params.lambda1


def priority_age(params: ModelParams) -> float:
    if params.lambda2 <= 0.0:
        raise InvalidRate("priority stream age needs lambda2 > 0")
    return 1.0 / params.mu2 + 1.0 / params.lambda2


def reference_mm1_age(lambda1: float, mu1: float) -> float:
    """Average age of a plain M/M/1 FCFS update stream (the lambda2 = 0 limit)."""
    if lambda1 <= 0.0 or mu1 <= 0.0:
        raise InvalidRate("rates must be strictly positive")
    if lambda1 >= mu1:
        raise UnstableSystem(f"lambda1 = {lambda1:g} >= mu1 = {mu1:g}")
    rho = lambda1 / mu1
    return (1.0 + 1.0 / rho + rho * rho / (1.0 - rho)) / mu1
