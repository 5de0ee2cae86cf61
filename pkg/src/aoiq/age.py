"""Virtual-service-time law and the M/G/1 lower bound on the ordinary age.

The head-of-line occupancy Z of an ordinary packet (service plus priority
interruptions) is a race between exponential clocks; its MGF comes out of a
signal-flow-graph transfer function evaluated at the clock MGFs.  The lower
bound is the exact average age of the fictitious variant in which an ordinary
arrival that finds only a priority packet in service discards it.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .analytic import _require_stable, check_stability, solve_quadratic
from .params import ModelParams, OutOfDomain, SingularDenominator, UnstableSystem

# Relative discriminant below which the system-time quadratic is treated as a
# double root and the limiting (non partial-fraction) density is used.
DEGENERATE_DISC_REL = 1e-12


@dataclass(frozen=True)
class VirtualServiceLaw:
    a: float   # P(service beats next priority arrival | serving ordinary)
    b: float   # P(priority arrival beats priority service)
    u: float   # P(priority service beats next priority arrival)
    v: float   # P(priority arrival beats ordinary service)
    mean_Y: float
    m2_Y: float
    mean_Yp: float
    m2_Yp: float
    pi_prime_1: float
    mean_Z: float
    m2_Z: float


@dataclass(frozen=True)
class SystemTimeLB:
    """Two-exponential system-time density of the fictitious M/G/1 system.

    f_T(t) = -c1*exp(-alpha1*t) - c2*exp(-alpha2*t).  When the quadratic has a
    (limiting) double root alpha, `degenerate` is set and the coefficients are
    reinterpreted as f_T(t) = (-c1 - c2*t)*exp(-alpha*t).
    """

    rho: float
    alpha1: float
    alpha2: float
    c1: float
    c2: float
    degenerate: bool = False

    def density(self, t):
        if self.degenerate:
            return (-self.c1 - self.c2 * t) * np.exp(-self.alpha1 * t)
        return -self.c1 * np.exp(-self.alpha1 * t) - self.c2 * np.exp(-self.alpha2 * t)

    def mean(self) -> float:
        if self.degenerate:
            a = self.alpha1
            return -self.c1 / a**2 - 2.0 * self.c2 / a**3
        return -self.c1 / self.alpha1**2 - self.c2 / self.alpha2**2


def clock_probabilities(params: ModelParams) -> tuple[float, float, float, float]:
    l2, m1, m2 = params.lambda2, params.mu1, params.mu2
    a = m1 / (m1 + l2)
    b = l2 / (m2 + l2)
    u = m2 / (m2 + l2)
    v = l2 / (m1 + l2)
    return a, b, u, v


def detour_gf_H1(a, b, u, v, D1, D2, D3, D4) -> float:
    """Transfer function of the race graph entered with the server free."""
    den = 1.0 - b * D2 - u * D3 * v * D4
    if abs(den) < 1e-300:
        raise SingularDenominator(f"flow-graph denominator vanished ({den:g})")
    return a * D1 * (1.0 - b * D2) / den


def detour_gf_H2(a, b, u, v, D1, D2, D3, D4) -> float:
    """Transfer function of the race graph entered with a priority packet in service."""
    den = 1.0 - b * D2 - v * D4 * u * D3
    if abs(den) < 1e-300:
        raise SingularDenominator(f"flow-graph denominator vanished ({den:g})")
    return a * D1 * u * D3 / den


def _y_denominator(params: ModelParams, s: float) -> float:
    m1, m2, l2 = params.mu1, params.mu2, params.lambda2
    s_min, _ = solve_quadratic(-(m1 + m2 + l2), m1 * m2)
    if s >= s_min:
        raise OutOfDomain(f"s = {s:g} not below convergence bound {s_min:g}")
    return s * s - s * (m2 + m1 + l2) + m1 * m2


def mgf_Y(params: ModelParams, s: float) -> float:
    return params.mu1 * (params.mu2 - s) / _y_denominator(params, s)


def mgf_Yp(params: ModelParams, s: float) -> float:
    return params.mu1 * params.mu2 / _y_denominator(params, s)


def _clock_mgfs(params: ModelParams, s: float) -> tuple[float, float, float, float]:
    l2, m1, m2 = params.lambda2, params.mu1, params.mu2
    if s >= l2 + m1 or s >= l2 + m2:
        raise OutOfDomain(f"s = {s:g} outside the clock MGF domain")
    ea = (l2 + m1) / (l2 + m1 - s)   # E[e^{sA}] = E[e^{sV}]
    eb = (l2 + m2) / (l2 + m2 - s)   # E[e^{sB}] = E[e^{sU}]
    return ea, eb, eb, ea


def mgf_Y_via_detour(params: ModelParams, s: float) -> float:
    a, b, u, v = clock_probabilities(params)
    return detour_gf_H1(a, b, u, v, *_clock_mgfs(params, s))


def mgf_Yp_via_detour(params: ModelParams, s: float) -> float:
    a, b, u, v = clock_probabilities(params)
    return detour_gf_H2(a, b, u, v, *_clock_mgfs(params, s))


def virtual_service_moments(params: ModelParams) -> VirtualServiceLaw:
    rep = _require_stable(params)
    l1, l2, m1, m2 = params.lambda1, params.lambda2, params.mu1, params.mu2
    a, b, u, v = clock_probabilities(params)
    mm = m1 * m2
    mean_Y = (m2 + l2) / mm
    mean_Yp = (m1 + m2 + l2) / mm
    m2_Y = 2.0 * ((m2 + l2) ** 2 + m1 * l2) / mm**2
    m2_Yp = 2.0 * ((m1 + m2 + l2) ** 2 - mm) / mm**2
    pip1 = rep.pi0 * l2 / (l1 + m2)
    mean_Z = l2 / ((l1 + m2) * (m2 + l2)) + (l1 + l2 + m2) / (m1 * (l1 + m2))
    m2_Z = (
        2.0 * ((l2 + m2) ** 2 * (l2 + m2 + l1) + l2 * m1 * (2.0 * l2 + m1 + 2.0 * m2))
        / (m1 * m1 * m2 * (l1 + m2) * (l2 + m2))
    )
    return VirtualServiceLaw(
        a=a, b=b, u=u, v=v,
        mean_Y=mean_Y, m2_Y=m2_Y, mean_Yp=mean_Yp, m2_Yp=m2_Yp,
        pi_prime_1=pip1, mean_Z=mean_Z, m2_Z=m2_Z,
    )


def system_time_lb(params: ModelParams) -> SystemTimeLB:
    rep = _require_stable(params)
    l1, l2, m1, m2 = params.lambda1, params.lambda2, params.mu1, params.mu2
    rho = l1 * (m2 + l2) / (m1 * m2)
    bq = -(m1 + m2 + l2 - l1)
    cq = m1 * m2 - l1 * m2 - l1 * l2
    disc = bq * bq - 4.0 * cq
    if disc < DEGENERATE_DISC_REL * bq * bq:
        alpha = -bq / 2.0
        # Limiting density (1-rho)*mu1*((mu2-alpha)*t + 1)*exp(-alpha*t).
        return SystemTimeLB(rho=rho, alpha1=alpha, alpha2=alpha,
                            c1=-(1.0 - rho) * m1,
                            c2=-(1.0 - rho) * m1 * (m2 - alpha),
                            degenerate=True)
    a2, a1 = solve_quadratic(bq, cq)  # ascending; alpha1 > alpha2 > 0
    c1 = (1.0 - rho) * m1 * (m2 - a1) / (a1 - a2)
    c2 = (1.0 - rho) * m1 * (m2 - a2) / (a2 - a1)
    return SystemTimeLB(rho=rho, alpha1=a1, alpha2=a2, c1=c1, c2=c2)


def system_time_mgf(params: ModelParams, s: float) -> float:
    """MGF of the fictitious system time, via the M/G/1 transform of Y."""
    rho = system_time_lb(params).rho
    if s == 0.0:
        return 1.0
    phi_y = mgf_Y(params, s)
    den = s + params.lambda1 * (1.0 - phi_y)
    if abs(den) < 1e-300:
        raise SingularDenominator("system-time transform denominator vanished")
    return (1.0 - rho) * s * phi_y / den


def expected_overlap(params: ModelParams) -> float:
    """E[X*(T-X)^+] for the fictitious system, X ~ exp(lambda1), T the system time."""
    lb = system_time_lb(params)
    l1 = params.lambda1
    if lb.degenerate:
        a = lb.alpha1
        c_const, c_lin = -lb.c1, -lb.c2
        term = (c_const / a**2 + 2.0 * c_lin / a**3) * l1 / (l1 + a) ** 2
        term += (c_lin / a**2) * 2.0 * l1 / (l1 + a) ** 3
        return term
    out = 0.0
    for c, alpha in ((lb.c1, lb.alpha1), (lb.c2, lb.alpha2)):
        out += (-c) * l1 / (alpha**2 * (l1 + alpha) ** 2)
    return out


def age_lower_bound(params: ModelParams) -> float:
    """Exact average age of the fictitious system; lower-bounds the true one."""
    if not check_stability(params).is_stable:
        raise UnstableSystem("lower bound needs a stable system")
    mean_y = (params.mu2 + params.lambda2) / (params.mu1 * params.mu2)
    # lambda1*(E[X^2]/2 + E[T X]) with E[X^2] = 2/lambda1^2 and
    # E[T X] = E[X(T-X)^+] + E[Y]/lambda1.
    return 1.0 / params.lambda1 + params.lambda1 * expected_overlap(params) + mean_y
