"""Truncated-CTMC oracle: generator structure and agreement with closed forms."""
import numpy as np
import pytest

from aoiq import analytic, ctmc
from aoiq.params import ModelParams

P = ModelParams(lambda1=2.0, lambda2=5.0, mu1=10.0, mu2=5.0)


def test_generator_rows_small_example():
    gen = ctmc.build_generator(P, K=2)
    q = gen.Q.toarray()
    # state order: q0, q1, q2, q'1, q'2
    np.testing.assert_allclose(q[0], [-7.0, 2.0, 0.0, 5.0, 0.0])
    np.testing.assert_allclose(q[1], [10.0, -17.0, 2.0, 0.0, 5.0])
    np.testing.assert_allclose(q[2], [0.0, 10.0, -10.0, 0.0, 0.0])  # reflecting
    np.testing.assert_allclose(q[3], [5.0, 0.0, 0.0, -7.0, 2.0])
    np.testing.assert_allclose(q[4], [0.0, 5.0, 0.0, 0.0, -5.0])
    np.testing.assert_allclose(q.sum(axis=1), 0.0, atol=1e-14)


def test_oracle_matches_closed_form_pi0_and_ladder():
    gen = ctmc.build_generator(P, K=200)
    pi, diag = ctmc.solve_stationary(gen)
    assert not diag["non_vanishing_tail"]
    assert pi[0] == pytest.approx(0.3, abs=1e-9)
    dist = analytic.stationary(P, i_max=30)
    for i in range(1, 31):
        assert pi[gen.idx_q(i)] == pytest.approx(dist.ladder[i - 1][0], abs=1e-9)
        assert pi[gen.idx_qp(i)] == pytest.approx(dist.ladder[i - 1][1], abs=1e-9)


def test_oracle_expected_n():
    assert ctmc.oracle_expected_n(P, K=200) == pytest.approx(
        analytic.expected_queue_length(P), abs=1e-8)


def test_truncation_error_shrinks_with_K():
    exact = analytic.expected_queue_length(P)
    errs = [abs(ctmc.oracle_expected_n(P, K=k) - exact) for k in (10, 20, 40, 80)]
    assert all(b < a for a, b in zip(errs, errs[1:]))
    assert errs[-1] < 1e-10


def test_random_stable_points_agree():
    rng = np.random.default_rng(2024)
    found = 0
    while found < 20:
        l1, l2, m1, m2 = rng.uniform(0.2, 8.0, size=4)
        params = ModelParams(l1, l2, m1, m2)
        rep = analytic.check_stability(params)
        if not rep.is_stable or rep.margin / m1 < 0.05:
            continue
        found += 1
        K = ctmc.default_K(params)
        gen = ctmc.build_generator(params, K)
        pi, diag = ctmc.solve_stationary(gen)
        assert not diag["non_vanishing_tail"]
        assert pi[0] == pytest.approx(rep.pi0, abs=1e-8)
        assert ctmc.oracle_expected_n(params, K) == pytest.approx(
            analytic.expected_queue_length(params), abs=1e-8)
        dist = analytic.stationary(params, i_max=10)
        for i in range(1, 11):
            assert pi[gen.idx_q(i)] == pytest.approx(dist.ladder[i - 1][0], abs=1e-8)
            assert pi[gen.idx_qp(i)] == pytest.approx(dist.ladder[i - 1][1], abs=1e-8)


def test_unstable_point_flagged_by_tail_mass():
    bad = ModelParams(2.0, 25.0, 10.0, 5.0)
    gen = ctmc.build_generator(bad, K=100)
    pi, diag = ctmc.solve_stationary(gen)
    assert diag["non_vanishing_tail"]


def test_lambda2_zero_is_mm1():
    p0 = ModelParams(2.0, 0.0, 10.0, 5.0)
    gen = ctmc.build_generator(p0, K=120)
    pi, _ = ctmc.solve_stationary(gen)
    rho = 0.2
    for i in range(6):
        assert pi[gen.idx_q(i)] == pytest.approx((1 - rho) * rho**i, abs=1e-12)
    assert pi[gen.idx_qp(1):].sum() == pytest.approx(0.0, abs=1e-12)
