"""Cross-validation suite: every closed form checked against an independent path.

Each check compares a closed-form quantity with a CTMC solve, a numerical
integral, a Monte-Carlo estimate or a simulation, at a pinned tolerance.
`run_all` returns the list of check results; the CLI prints one line each and
exits nonzero if any failed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from . import age, analytic, ctmc, sim
from .params import ModelParams

P_STAR = ModelParams(lambda1=2.0, lambda2=5.0, mu1=10.0, mu2=5.0)
SWEEP_GRID = [0.5 * k for k in range(1, 39)]  # lambda2 in {0.5, 1, ..., 19}


@dataclass
class Check:
    name: str
    expected: float | str
    observed: float | str
    tolerance: str
    passed: bool


def _close(name, observed, expected, abs_tol=None, rel_tol=None) -> Check:
    err = abs(observed - expected)
    if rel_tol is not None:
        bound = rel_tol * abs(expected)
        tol = f"rel {rel_tol:g}"
    else:
        bound = abs_tol
        tol = f"abs {abs_tol:g}"
    return Check(name, expected, observed, tol, bool(err <= bound))


def _flag(name, condition, detail="") -> Check:
    return Check(name, "true", detail or str(bool(condition)), "exact", bool(condition))


def _sim(params, seed, deliveries, mode=sim.TRUE_SYSTEM, warmup=1000, **kw):
    return sim.run(params, sim.SimConfig(seed=seed, target_deliveries=deliveries,
                                         warmup_deliveries=warmup, mode=mode, **kw))


def criterion_1_stationary(quick=False) -> list[Check]:
    checks = []
    rep = analytic.check_stability(P_STAR)
    checks.append(_close("1a closed-form pi0", rep.pi0, 0.3, abs_tol=1e-15))
    gen = ctmc.build_generator(P_STAR, 200)
    pi, _ = ctmc.solve_stationary(gen)
    checks.append(_close("1b oracle pi0 (K=200)", pi[0], 0.3, abs_tol=1e-9))
    dist = analytic.stationary(P_STAR, i_max=50)
    worst = 0.0
    for i in range(1, 51):
        worst = max(worst, abs(dist.ladder[i - 1][0] - pi[gen.idx_q(i)]),
                    abs(dist.ladder[i - 1][1] - pi[gen.idx_qp(i)]))
    checks.append(_close("1c spectral ladder vs oracle (i<=50)", worst, 0.0, abs_tol=1e-9))
    full = analytic.stationary(P_STAR)
    total = full.pi0 + sum(a + b for a, b in full.ladder)
    checks.append(_close("1d probability normalization", total, 1.0, abs_tol=1e-8))
    return checks


def criterion_2_expected_n(quick=False) -> list[Check]:
    checks = []
    en = analytic.expected_queue_length(P_STAR)
    checks.append(_close("2a E[N] closed form", en, 1.0, abs_tol=1e-12))
    checks.append(_close("2b E[N] CTMC oracle", ctmc.oracle_expected_n(P_STAR, 200),
                         en, abs_tol=1e-8))
    h = 1e-6
    der = (analytic.queue_length_mgf(P_STAR, h)
           - analytic.queue_length_mgf(P_STAR, -h)) / (2 * h)
    checks.append(_close("2c E[N] numeric MGF derivative", der, en, rel_tol=1e-5))
    n = 100_000 if quick else 1_000_000
    res = _sim(P_STAR, seed=101, deliveries=n)
    checks.append(_close("2d E[N] simulated", res.time_avg_n, en, rel_tol=0.02))
    return checks


def criterion_3_peak_age(quick=False) -> list[Check]:
    checks = []
    peak = analytic.peak_age_ordinary(P_STAR)
    checks.append(_close("3a peak age closed form", peak, 1.0, abs_tol=1e-12))
    n = 100_000 if quick else 1_000_000
    for seed in (7, 8, 9):
        res = _sim(P_STAR, seed=seed, deliveries=n)
        checks.append(_close(f"3b simulated peak (seed {seed})", res.avg_peak_1,
                             peak, rel_tol=0.02))
    return checks


def criterion_4_priority_age(quick=False) -> list[Check]:
    checks = []
    a2 = analytic.priority_age(P_STAR)
    checks.append(_close("4a priority age closed form", a2, 0.4, abs_tol=1e-12))
    n = 100_000 if quick else 1_000_000
    res = _sim(P_STAR, seed=11, deliveries=n)
    checks.append(_close("4b simulated priority age", res.avg_age_2, a2, rel_tol=0.02))
    return checks


def criterion_5_lower_bound(quick=False) -> list[Check]:
    checks = []
    lb_val = age.age_lower_bound(P_STAR)
    checks.append(_close("5a lower bound closed form", lb_val, 0.80287, rel_tol=5e-4))
    n = 100_000 if quick else 1_000_000
    res = _sim(P_STAR, seed=21, deliveries=n, mode=sim.FICTITIOUS_SYSTEM)
    checks.append(_close("5b fictitious-mode simulated age", res.avg_age_1,
                         lb_val, rel_tol=0.02))
    overlap = age.expected_overlap(P_STAR)
    lbd = age.system_time_lb(P_STAR)
    l1 = P_STAR.lambda1

    def inner(x):
        return integrate.quad(lambda t: (t - x) * lbd.density(t), x, np.inf)[0]

    quad_val = integrate.quad(lambda x: x * inner(x) * l1 * np.exp(-l1 * x),
                              0.0, np.inf, limit=200)[0]
    checks.append(_close("5c overlap vs numerical integral", quad_val, overlap,
                         rel_tol=0.005))
    rng = np.random.default_rng(5)
    m = 2_000_000 if quick else 10_000_000
    w1 = -lbd.c1 / lbd.alpha1
    pick = rng.random(m) < w1
    t_samp = np.where(pick, rng.exponential(1.0 / lbd.alpha1, m),
                      rng.exponential(1.0 / lbd.alpha2, m))
    x_samp = rng.exponential(1.0 / l1, m)
    mc = float(np.mean(x_samp * np.maximum(t_samp - x_samp, 0.0)))
    checks.append(_close("5d overlap vs Monte Carlo", mc, overlap, rel_tol=0.005))
    return checks


def criterion_6_mm1_reduction(quick=False) -> list[Check]:
    checks = []
    p0 = ModelParams(lambda1=2.0, lambda2=0.0, mu1=10.0, mu2=5.0)
    rep = analytic.check_stability(p0)
    checks.append(_close("6a pi0 at lambda2=0", rep.pi0, 0.8, abs_tol=1e-10))
    checks.append(_close("6b peak age at lambda2=0", analytic.peak_age_ordinary(p0),
                         0.625, abs_tol=1e-10))
    ref = analytic.reference_mm1_age(2.0, 10.0)
    checks.append(_close("6c lower bound = M/M/1 age", age.age_lower_bound(p0),
                         ref, abs_tol=1e-10))
    checks.append(_close("6d M/M/1 reference age", ref, 0.605, abs_tol=1e-10))
    lbd = age.system_time_lb(p0)
    single = abs(lbd.alpha1 - 8.0) <= 1e-10 and abs(-lbd.c1 - 8.0) <= 1e-10 \
        and abs(lbd.c2) <= 1e-10
    checks.append(_flag("6e f_T is a single exponential with rate 8", single,
                        f"alpha1={lbd.alpha1!r}, -c1={-lbd.c1!r}, c2={lbd.c2!r}"))
    n = 100_000 if quick else 1_000_000
    res = _sim(p0, seed=31, deliveries=n)
    checks.append(_close("6f simulated age at lambda2=0", res.avg_age_1, 0.605,
                         rel_tol=0.02))
    checks.append(_close("6g simulated peak at lambda2=0", res.avg_peak_1, 0.625,
                         rel_tol=0.02))
    return checks


def criterion_7_sweep(quick=False) -> list[Check]:
    checks = []
    n = 100_000 if quick else 1_000_000
    peaks, lbs, ens, u2s, sims, ses = [], [], [], [], [], []
    for idx, l2 in enumerate(SWEEP_GRID):
        params = ModelParams(lambda1=2.0, lambda2=l2, mu1=10.0, mu2=5.0)
        peaks.append(analytic.peak_age_ordinary(params))
        lbs.append(age.age_lower_bound(params))
        ens.append(analytic.expected_queue_length(params))
        u2s.append(analytic.priority_age(params))
        res = _sim(params, seed=sim.mix64(0, idx), deliveries=n)
        sims.append(res.avg_age_1)
        ses.append(res.avg_age_1_se)
    # 3-sigma batch-means confidence band around each simulated point
    ok_a = all(lbs[i] <= sims[i] + 3.0 * ses[i]
               and sims[i] - 3.0 * ses[i] <= peaks[i]
               for i in range(len(SWEEP_GRID)))
    checks.append(_flag("7a LB <= sim age <= peak on the grid", ok_a,
                        "3-sigma band"))

    def increasing(xs):
        return all(b > a for a, b in zip(xs, xs[1:]))

    ok_b = (increasing(peaks) and increasing(lbs) and increasing(ens)
            and increasing(sims) and all(b < a for a, b in zip(u2s, u2s[1:])))
    checks.append(_flag("7b stream-1 curves increase, priority age decreases", ok_b))

    crossing = None
    for i in range(len(SWEEP_GRID) - 1):
        d0 = sims[i] - u2s[i]
        d1 = sims[i + 1] - u2s[i + 1]
        if d0 <= 0.0 <= d1:
            crossing = SWEEP_GRID[i] + 0.5 * (-d0) / (d1 - d0)
            break
    ok_c = crossing is not None and 1.6 <= crossing <= 2.2
    checks.append(_flag("7c age crossing in [1.6, 2.2]", ok_c,
                        f"crossing at lambda2 = {crossing}"))

    i5 = SWEEP_GRID.index(5.0)
    ratio = sims[i5] / analytic.reference_mm1_age(2.0, 10.0)
    checks.append(_flag("7d sim age / reference in [1.35, 1.65] at lambda2=5",
                        1.35 <= ratio <= 1.65, f"ratio = {ratio:.4f}"))
    return checks


def criterion_8_virtual_service(quick=False) -> list[Check]:
    checks = []
    law = age.virtual_service_moments(P_STAR)
    n = 100_000 if quick else 1_000_000
    res = _sim(P_STAR, seed=41, deliveries=n)
    checks.append(_close("8a empirical Z mean", res.z_mean, law.mean_Z, rel_tol=0.02))
    checks.append(_close("8b empirical Z second moment", res.z_m2, law.m2_Z,
                         rel_tol=0.02))
    for freq, expect, nm in zip(res.race_freqs, (law.a, law.b, law.u, law.v),
                                ("a", "b", "u", "v")):
        checks.append(_close(f"8c race frequency {nm}", freq, expect, abs_tol=0.01))
    return checks


def criterion_9_properties(quick=False) -> list[Check]:
    checks = []
    sp = analytic.spectral(P_STAR)
    vieta = max(abs(sp.l1 * sp.l2 - sp.a3 * sp.a5),
                abs(sp.l1 + sp.l2 - (sp.a1 + sp.a5 - 1.0)))
    checks.append(_close("9a Vieta identities", vieta, 0.0, abs_tol=1e-12))
    d_spec = analytic.stationary(P_STAR, i_max=50)
    d_pow = analytic.stationary_power_path(P_STAR, i_max=50)
    worst = max(max(abs(a - c), abs(b - d))
                for (a, b), (c, d) in zip(d_spec.ladder, d_pow.ladder))
    checks.append(_close("9b spectral vs matrix-power ladder", worst, 0.0,
                         abs_tol=1e-10))
    worst = 0.0
    for s in (-1.0, -0.1, 0.0, 0.1):
        worst = max(worst,
                    abs(age.mgf_Y(P_STAR, s) - age.mgf_Y_via_detour(P_STAR, s))
                    / abs(age.mgf_Y(P_STAR, s)),
                    abs(age.mgf_Yp(P_STAR, s) - age.mgf_Yp_via_detour(P_STAR, s))
                    / abs(age.mgf_Yp(P_STAR, s)))
    checks.append(_close("9c dual-path MGF of Y, Y'", worst, 0.0, abs_tol=1e-10))
    law = age.virtual_service_moments(P_STAR)
    mix_err = max(abs(law.mean_Z - (law.pi_prime_1 * law.mean_Yp
                                    + (1 - law.pi_prime_1) * law.mean_Y)),
                  abs(law.m2_Z - (law.pi_prime_1 * law.m2_Yp
                                  + (1 - law.pi_prime_1) * law.m2_Y)))
    checks.append(_close("9d Z closed form = mixture form", mix_err, 0.0,
                         abs_tol=1e-12))
    lbd = age.system_time_lb(P_STAR)
    checks.append(_close("9e f_T normalization",
                         -lbd.c1 / lbd.alpha1 - lbd.c2 / lbd.alpha2, 1.0,
                         abs_tol=1e-12))
    n = 100_000 if quick else 300_000
    r1 = _sim(P_STAR, seed=51, deliveries=n)
    r2 = _sim(P_STAR, seed=51, deliveries=n)
    checks.append(_flag("9f determinism (same seed, same result)",
                        r1.avg_peak_1 == r2.avg_peak_1
                        and r1.avg_age_1 == r2.avg_age_1
                        and r1.z_mean == r2.z_mean))
    lam_eff = r1.deliveries_observed / r1.sim_time
    checks.append(_close("9g Little's law", r1.time_avg_n,
                         lam_eff * r1.mean_system_time_1, rel_tol=0.02))
    n_occ = 300_000 if quick else 1_000_000
    r_occ = _sim(P_STAR, seed=52, deliveries=n_occ)
    dist = analytic.stationary(P_STAR, i_max=5)
    occ = sim.occupancy_check(r_occ, dist)
    checks.append(_close("9h occupancy deviation (q0..q5, q'1..q'5)",
                         occ["max_deviation"], 0.0, abs_tol=0.01))
    r_rs = _sim(P_STAR, seed=51, deliveries=n, resample_on_resume=True)
    checks.append(_close("9i resume vs resample (peak)", r_rs.avg_peak_1,
                         r1.avg_peak_1, rel_tol=0.02))
    checks.append(_close("9j resume vs resample (age)", r_rs.avg_age_1,
                         r1.avg_age_1, rel_tol=0.02))
    return checks


CRITERIA = [
    ("1 stationary consistency", criterion_1_stationary),
    ("2 expected queue length", criterion_2_expected_n),
    ("3 peak age", criterion_3_peak_age),
    ("4 priority age", criterion_4_priority_age),
    ("5 age lower bound", criterion_5_lower_bound),
    ("6 M/M/1 reduction", criterion_6_mm1_reduction),
    ("7 sweep reproduction", criterion_7_sweep),
    ("8 virtual service law", criterion_8_virtual_service),
    ("9 property suite", criterion_9_properties),
]


def run_all(quick: bool = False) -> list[Check]:
    out = []
    for _, fn in CRITERIA:
        out.extend(fn(quick=quick))
    return out


def print_report(checks: list[Check]) -> int:
    failed = 0
    for c in checks:
        status = "PASS" if c.passed else "FAIL"
        if not c.passed:
            failed += 1
        print(f"{status}  {c.name}: expected={c.expected!r} "
              f"observed={c.observed!r} tolerance={c.tolerance}")
    print(f"{len(checks) - failed}/{len(checks)} checks passed")
    return failed
