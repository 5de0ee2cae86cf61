"""Truncated-chain numerical ground truth for the stationary distribution.

States are indexed [q0, q1..qK, q'1..q'K]; q_i means an ordinary packet in
service with i-1 more waiting, q'_i a priority packet in service with i-1
ordinary packets waiting.  The truncation is reflecting: up-transitions that
would leave level K are dropped so the generator stays a proper CTMC.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .analytic import check_stability, spectral
from .params import ModelParams, SingularSystem

# Boundary-level mass above which the truncated solve is flagged as not
# approximating any stationary distribution (transient / unstable input).
NON_VANISHING_TAIL = 1e-6


@dataclass(frozen=True)
class GeneratorMatrix:
    params: ModelParams
    K: int
    Q: sp.csr_matrix  # (2K+1) x (2K+1)

    @property
    def dim(self) -> int:
        return 2 * self.K + 1

    def idx_q(self, i: int) -> int:
        return i  # q0..qK

    def idx_qp(self, i: int) -> int:
        return self.K + i  # q'1..q'K


def build_generator(params: ModelParams, K: int) -> GeneratorMatrix:
    if K < 2:
        raise ValueError("K must be >= 2")
    l1, l2, m1, m2 = params.lambda1, params.lambda2, params.mu1, params.mu2
    n = 2 * K + 1
    q = sp.lil_matrix((n, n))

    def qi(i):
        return i

    def qpi(i):
        return K + i

    q[qi(0), qi(1)] = l1
    if l2 > 0.0:
        q[qi(0), qpi(1)] = l2
    for i in range(1, K + 1):
        q[qi(i), qi(i - 1)] = m1
        if i < K:
            q[qi(i), qi(i + 1)] = l1
            if l2 > 0.0:
                q[qi(i), qpi(i + 1)] = l2
        q[qpi(i), qi(i - 1)] = m2
        if i < K:
            q[qpi(i), qpi(i + 1)] = l1
    q.setdiag(-np.asarray(q.sum(axis=1)).ravel())
    return GeneratorMatrix(params=params, K=K, Q=q.tocsr())


def solve_stationary(gen: GeneratorMatrix) -> tuple[np.ndarray, dict]:
    """Solve pi Q = 0, sum(pi) = 1; returns pi and tail diagnostics."""
    n = gen.dim
    a = gen.Q.T.tolil()
    a[n - 1, :] = 1.0  # replace one balance equation by normalization
    b = np.zeros(n)
    b[n - 1] = 1.0
    try:
        if n <= 1500:
            pi = np.linalg.solve(a.toarray(), b)
        else:
            pi = spla.spsolve(a.tocsc(), b)
    except Exception as exc:  # singular matrix from either path
        raise SingularSystem(str(exc)) from exc
    if not np.all(np.isfinite(pi)):
        raise SingularSystem("non-finite stationary solve")
    boundary_mass = pi[gen.idx_q(gen.K)] + pi[gen.idx_qp(gen.K)]
    diag = {
        "boundary_mass": float(boundary_mass),
        "non_vanishing_tail": bool(boundary_mass > NON_VANISHING_TAIL),
    }
    return pi, diag


def default_K(params: ModelParams) -> int:
    """Depth at which the closed-form geometric tail bound drops below 1e-12."""
    rep = check_stability(params)
    if not rep.is_stable:
        return 200
    l2 = spectral(params).l2
    k = math.ceil(math.log(1e-12 * (1.0 - l2) / rep.pi0) / math.log(l2))
    return max(64, min(k, 10_000))


def oracle_expected_n(params: ModelParams, K: int | None = None) -> float:
    """E[number of ordinary packets]: count i at q_i and i-1 at q'_i."""
    if K is None:
        K = default_K(params)
    gen = build_generator(params, K)
    pi, _ = solve_stationary(gen)
    counts = np.concatenate([np.arange(K + 1), np.arange(K)])  # q0..qK, q'1..q'K
    return float(counts @ pi)
