"""Event-driven simulator: determinism, sample-path identities, statistics."""
import numpy as np
import pytest

from aoiq import age, analytic, sim
from aoiq.params import InvalidConfig, ModelParams

P = ModelParams(lambda1=2.0, lambda2=5.0, mu1=10.0, mu2=5.0)


def _run(params=P, **kw):
    defaults = dict(seed=1, target_deliveries=200_000, warmup_deliveries=1000)
    defaults.update(kw)
    return sim.run(params, sim.SimConfig(**defaults))


def test_determinism_same_seed():
    r1 = _run(target_deliveries=50_000)
    r2 = _run(target_deliveries=50_000)
    assert r1.avg_age_1 == r2.avg_age_1
    assert r1.avg_peak_1 == r2.avg_peak_1
    assert r1.z_mean == r2.z_mean
    assert r1.sim_time == r2.sim_time


def test_different_seeds_differ():
    r1 = _run(seed=1, target_deliveries=50_000)
    r2 = _run(seed=2, target_deliveries=50_000)
    assert r1.avg_age_1 != r2.avg_age_1


def test_modes_identical_without_priority_stream():
    p0 = ModelParams(2.0, 0.0, 10.0, 5.0)
    rt = _run(p0, mode=sim.TRUE_SYSTEM, target_deliveries=50_000)
    rf = _run(p0, mode=sim.FICTITIOUS_SYSTEM, target_deliveries=50_000)
    assert rt.avg_age_1 == rf.avg_age_1  # bit-identical sample paths
    assert rt.sim_time == rf.sim_time


def test_peak_identity_and_fifo_order():
    res = _run(target_deliveries=100_000, record_deliveries=True)
    log = res.deliveries_log
    gen, dep, peak = log["gen"], log["dep"], log["peak"]
    # FCFS: generation and departure orders both increase
    assert np.all(np.diff(gen) > 0)
    assert np.all(np.diff(dep) > 0)
    assert np.all(dep > gen)
    # peak age just before delivery j is inter-generation gap + system time
    k_j = (gen[1:] - gen[:-1]) + (dep[1:] - gen[1:])
    np.testing.assert_allclose(peak[1:], k_j, rtol=1e-12)
    # z = departure minus start of head-of-line occupancy
    z_j = dep[1:] - np.maximum(dep[:-1], gen[1:])
    np.testing.assert_allclose(log["z"][1:], z_j, rtol=1e-12)


def test_statistics_match_closed_forms():
    res = _run(seed=5, target_deliveries=500_000)
    assert res.time_avg_n == pytest.approx(analytic.expected_queue_length(P), rel=0.02)
    assert res.avg_peak_1 == pytest.approx(analytic.peak_age_ordinary(P), rel=0.02)
    assert res.avg_age_2 == pytest.approx(analytic.priority_age(P), rel=0.02)
    law = age.virtual_service_moments(P)
    assert res.z_mean == pytest.approx(law.mean_Z, rel=0.02)
    assert res.z_m2 == pytest.approx(law.m2_Z, rel=0.03)
    for freq, expect in zip(res.race_freqs, (law.a, law.b, law.u, law.v)):
        assert freq == pytest.approx(expect, abs=0.01)


def test_littles_law():
    res = _run(seed=6, target_deliveries=300_000)
    lam_eff = res.deliveries_observed / res.sim_time
    assert res.time_avg_n == pytest.approx(
        lam_eff * res.mean_system_time_1, rel=0.02)


def test_occupancy_fractions():
    res = _run(seed=7, target_deliveries=500_000)
    dist = analytic.stationary(P, i_max=5)
    occ = sim.occupancy_check(res, dist)
    assert occ["max_deviation"] < 0.01


def test_fictitious_mode_matches_lower_bound():
    res = _run(seed=8, target_deliveries=500_000, mode=sim.FICTITIOUS_SYSTEM)
    assert res.avg_age_1 == pytest.approx(age.age_lower_bound(P), rel=0.02)


def test_resume_vs_resample_statistically_equivalent():
    r_resume = _run(seed=9, target_deliveries=500_000)
    r_resample = _run(seed=9, target_deliveries=500_000, resample_on_resume=True)
    # different sample paths under exponential service, same statistics
    assert r_resume.avg_age_1 != r_resample.avg_age_1
    assert r_resume.avg_age_1 == pytest.approx(r_resample.avg_age_1, rel=0.02)
    assert r_resume.avg_peak_1 == pytest.approx(r_resample.avg_peak_1, rel=0.02)


def test_batch_means_standard_error():
    res = _run(seed=10, target_deliveries=500_000)
    assert np.isfinite(res.avg_age_1_se)
    # 3-sigma band should cover the true vs fictitious gap direction
    assert 0.0 < res.avg_age_1_se < 0.05 * res.avg_age_1


def test_event_log_debug_dump():
    res = _run(target_deliveries=10, warmup_deliveries=0, max_events=50)
    text = sim.dump_event_log(res)
    lines = text.splitlines()
    assert 0 < len(lines) <= 50
    assert all("\t" in ln for ln in lines)


def test_invalid_config_rejected():
    with pytest.raises(InvalidConfig):
        sim.SimConfig(target_deliveries=0)
    with pytest.raises(InvalidConfig):
        sim.SimConfig(warmup_deliveries=-1)
    with pytest.raises(InvalidConfig):
        sim.SimConfig(mode="other")


def test_mix64_substream_derivation():
    vals = {sim.mix64(0, i) for i in range(100)}
    assert len(vals) == 100
    assert all(0 <= v < 2**64 for v in vals)
    assert sim.mix64(1, 0) != sim.mix64(0, 0)
