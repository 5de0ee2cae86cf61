"""Event-driven simulation of the two-stream preemptive-priority update queue.

The core loop is a numba kernel: at every state change the next event is the
minimum of the pending stream-1 arrival, stream-2 arrival and the in-service
completion.  Service is tracked as a remaining requirement so the preemption
rule (resume the frozen remainder vs. resample) produces genuinely different
sample paths; under exponential service both must agree statistically.

Randomness comes from three splitmix64 substreams (stream-1 arrivals, stream-2
arrivals, service draws) derived from one 64-bit seed, so runs are bit
reproducible and comparable across modes and preemption rules.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .analytic import StationaryDistribution
from .params import InvalidConfig, ModelParams

TRUE_SYSTEM = "true"
FICTITIOUS_SYSTEM = "fictitious"

# Event kinds in the debug log.
EV_ARRIVAL_1 = 1
EV_ARRIVAL_2 = 2
EV_DELIVERY_1 = 3
EV_DELIVERY_2 = 4
EV_DISCARD_2 = 5  # fictitious mode: ordinary arrival displaces the priority packet


@dataclass(frozen=True)
class SimConfig:
    seed: int = 0
    target_deliveries: int = 1_000_000
    warmup_deliveries: int = 1_000
    mode: str = TRUE_SYSTEM
    resample_on_resume: bool = False
    occupancy_cap: int = 64
    record_deliveries: bool = False
    max_events: int = 0  # >0: debug run, stop after this many logged events

    def __post_init__(self):
        if self.target_deliveries < 1:
            raise InvalidConfig("target_deliveries must be >= 1")
        if self.warmup_deliveries < 0:
            raise InvalidConfig("warmup_deliveries must be >= 0")
        if self.mode not in (TRUE_SYSTEM, FICTITIOUS_SYSTEM):
            raise InvalidConfig(f"unknown mode {self.mode!r}")
        if self.occupancy_cap < 1:
            raise InvalidConfig("occupancy_cap must be >= 1")


@dataclass
class SimResult:
    avg_age_1: float
    avg_age_1_se: float  # batch-means standard error of avg_age_1
    avg_peak_1: float
    avg_age_2: float
    time_avg_n: float
    occupancy_q: np.ndarray    # fractions for q0..q_cap plus one overflow bin
    occupancy_qp: np.ndarray   # fractions for q'1..q'_cap plus one overflow bin
    z_mean: float
    z_m2: float
    mean_system_time_1: float
    deliveries_observed: int
    sim_time: float
    race_freqs: tuple[float, float, float, float]  # empirical (a, b, u, v)
    config: SimConfig
    params: ModelParams
    deliveries_log: dict = field(default_factory=dict)  # gen/dep/peak/z arrays
    event_log: dict = field(default_factory=dict)       # time/kind/state arrays


_GAMMA = np.uint64(0x9E3779B97F4A7C15)


@njit(cache=True, nogil=True, inline="always")
def _mix64(z):
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def mix64(seed: int, index: int) -> int:
    """Per-point seed derivation: splitmix64 finalizer of seed + index*gamma."""
    mask = (1 << 64) - 1
    z = (seed + index * 0x9E3779B97F4A7C15) & mask
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & mask
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & mask
    return z ^ (z >> 31)


@njit(cache=True, nogil=True, inline="always")
def _next_exp(state, rate):
    state = state + _GAMMA
    z = _mix64(state)
    u = float(z >> np.uint64(11)) * (1.0 / 9007199254740992.0)
    return state, -np.log(1.0 - u) / rate


N_BATCHES = 64  # batch-means groups for the age standard error


@njit(cache=True, nogil=True)
def _run_kernel(lam1, lam2, mu1, mu2, seed, target, warmup, fictitious, resample,
                occ_cap, rec_gen, rec_dep, rec_peak, rec_z,
                ev_time, ev_kind, ev_state, batch_int, batch_dur):
    INF = 1.0e300
    base = _mix64(np.uint64(seed))
    s_a1 = _mix64(base + np.uint64(1))
    s_a2 = _mix64(base + np.uint64(2))
    s_sv = _mix64(base + np.uint64(3))

    # FIFO ring buffer of generation timestamps of ordinary packets in system.
    cap = 1024
    qbuf = np.empty(cap)
    qhead = 0
    qlen = 0

    t = 0.0
    serving = 0          # 0 idle, 1 ordinary, 2 priority
    r1 = 0.0             # remaining requirement of the ordinary head
    head_started = False
    r2 = 0.0
    u2_gen = 0.0
    last_gen1 = 0.0
    last_gen2 = 0.0
    last_d1 = 0.0

    s_a1, d = _next_exp(s_a1, lam1)
    next_a1 = t + d
    if lam2 > 0.0:
        s_a2, d = _next_exp(s_a2, lam2)
        next_a2 = t + d
    else:
        next_a2 = INF

    measuring = warmup == 0
    m_start = 0.0
    m_end = 0.0
    age1_int = 0.0
    age2_int = 0.0
    n_int = 0.0
    z_sum = 0.0
    z_sum2 = 0.0
    peak_sum = 0.0
    st_sum = 0.0
    n_meas = 0
    races_a = 0.0
    races_b = 0.0
    races_u = 0.0
    races_v = 0.0
    deliveries = 0
    occ_q = np.zeros(occ_cap + 2)
    occ_qp = np.zeros(occ_cap + 2)
    n_rec = rec_gen.shape[0]
    max_ev = ev_time.shape[0]
    n_ev = 0

    while True:
        comp = INF
        if serving == 1:
            comp = t + r1
        elif serving == 2:
            comp = t + r2
        # tie order: completion, then priority arrival, then ordinary arrival
        if comp <= next_a2 and comp <= next_a1:
            ev = 0
            te = comp
        elif next_a2 <= next_a1:
            ev = 1
            te = next_a2
        else:
            ev = 2
            te = next_a1

        dt = te - t
        if measuring:
            d_age1 = dt * (t - last_gen1) + 0.5 * dt * dt
            age1_int += d_age1
            bi = n_meas * N_BATCHES // target
            if bi >= N_BATCHES:
                bi = N_BATCHES - 1
            batch_int[bi] += d_age1
            batch_dur[bi] += dt
            age2_int += dt * (t - last_gen2) + 0.5 * dt * dt
            n_int += dt * qlen
            if serving == 0:
                occ_q[0] += dt
            elif serving == 1:
                occ_q[qlen if qlen <= occ_cap else occ_cap + 1] += dt
            else:
                k = qlen + 1
                occ_qp[k if k <= occ_cap else occ_cap + 1] += dt
        if ev != 0:
            if serving == 1:
                r1 -= dt
            elif serving == 2:
                r2 -= dt
        t = te
        kind = 0

        if ev == 0:
            if serving == 1:
                gen = qbuf[qhead]
                qhead = (qhead + 1) % cap
                qlen -= 1
                deliveries += 1
                if measuring:
                    races_a += 1.0
                    peak = t - last_gen1
                    z = t - (last_d1 if last_d1 > gen else gen)
                    peak_sum += peak
                    z_sum += z
                    z_sum2 += z * z
                    st_sum += t - gen
                    if n_meas < n_rec:
                        rec_gen[n_meas] = gen
                        rec_dep[n_meas] = t
                        rec_peak[n_meas] = peak
                        rec_z[n_meas] = z
                    n_meas += 1
                last_gen1 = gen
                last_d1 = t
                kind = EV_DELIVERY_1
                if not measuring and deliveries >= warmup:
                    measuring = True
                    m_start = t
                if deliveries >= warmup + target:
                    m_end = t
                    break
                if qlen > 0:
                    serving = 1
                    s_sv, r1 = _next_exp(s_sv, mu1)
                    head_started = True
                else:
                    serving = 0
                    head_started = False
            else:
                if measuring:
                    races_u += 1.0
                last_gen2 = u2_gen
                kind = EV_DELIVERY_2
                if qlen > 0:
                    serving = 1
                    if resample or not head_started:
                        s_sv, r1 = _next_exp(s_sv, mu1)
                        head_started = True
                else:
                    serving = 0
        elif ev == 1:
            if serving == 2:
                if measuring:
                    races_b += 1.0
            elif serving == 1:
                if measuring:
                    races_v += 1.0
                if resample:
                    head_started = False
            serving = 2
            u2_gen = t
            s_sv, r2 = _next_exp(s_sv, mu2)
            kind = EV_ARRIVAL_2
            s_a2, d = _next_exp(s_a2, lam2)
            next_a2 = t + d
        else:
            if qlen == cap:
                newbuf = np.empty(cap * 2)
                for j in range(qlen):
                    newbuf[j] = qbuf[(qhead + j) % cap]
                qbuf = newbuf
                qhead = 0
                cap *= 2
            qbuf[(qhead + qlen) % cap] = t
            qlen += 1
            kind = EV_ARRIVAL_1
            if serving == 0:
                serving = 1
                s_sv, r1 = _next_exp(s_sv, mu1)
                head_started = True
            elif fictitious and serving == 2 and qlen == 1:
                # ordinary arrival displaces the lone priority packet
                serving = 1
                s_sv, r1 = _next_exp(s_sv, mu1)
                head_started = True
                kind = EV_DISCARD_2
            s_a1, d = _next_exp(s_a1, lam1)
            next_a1 = t + d

        if max_ev > 0:
            ev_time[n_ev] = t
            ev_kind[n_ev] = kind
            # state-after: q_i coded i, q'_i coded -i
            if serving == 2:
                ev_state[n_ev] = -(qlen + 1)
            else:
                ev_state[n_ev] = qlen
            n_ev += 1
            if n_ev >= max_ev:
                m_end = t
                break

    stats = np.empty(15)
    stats[0] = m_start
    stats[1] = m_end
    stats[2] = age1_int
    stats[3] = age2_int
    stats[4] = n_int
    stats[5] = z_sum
    stats[6] = z_sum2
    stats[7] = peak_sum
    stats[8] = st_sum
    stats[9] = float(n_meas)
    stats[10] = races_a
    stats[11] = races_b
    stats[12] = races_u
    stats[13] = races_v
    stats[14] = float(n_ev)
    return stats, occ_q, occ_qp


def run(params: ModelParams, config: SimConfig) -> SimResult:
    """Run one simulation; identical (params, config) gives identical results."""
    n_rec = config.target_deliveries if config.record_deliveries else 0
    rec_gen = np.empty(n_rec)
    rec_dep = np.empty(n_rec)
    rec_peak = np.empty(n_rec)
    rec_z = np.empty(n_rec)
    max_ev = max(config.max_events, 0)
    ev_time = np.empty(max_ev)
    ev_kind = np.empty(max_ev, dtype=np.int64)
    ev_state = np.empty(max_ev, dtype=np.int64)

    batch_int = np.zeros(N_BATCHES)
    batch_dur = np.zeros(N_BATCHES)
    stats, occ_q, occ_qp = _run_kernel(
        params.lambda1, params.lambda2, params.mu1, params.mu2,
        np.uint64(config.seed), config.target_deliveries, config.warmup_deliveries,
        config.mode == FICTITIOUS_SYSTEM, config.resample_on_resume,
        config.occupancy_cap, rec_gen, rec_dep, rec_peak, rec_z,
        ev_time, ev_kind, ev_state, batch_int, batch_dur,
    )
    m_start, m_end = stats[0], stats[1]
    sim_time = m_end - m_start
    n_meas = int(stats[9])
    occ_total = occ_q.sum() + occ_qp.sum()
    races_sv1 = stats[10] + stats[13]
    used = batch_dur > 0
    if used.sum() >= 8:
        means = batch_int[used] / batch_dur[used]
        age1_se = float(np.std(means, ddof=1) / np.sqrt(used.sum()))
    else:
        age1_se = float("nan")
    races_sv2 = stats[11] + stats[12]
    n_ev = int(stats[14])

    result = SimResult(
        avg_age_1=stats[2] / sim_time if sim_time > 0 else float("nan"),
        avg_age_1_se=age1_se,
        avg_peak_1=stats[7] / n_meas if n_meas else float("nan"),
        avg_age_2=stats[3] / sim_time if sim_time > 0 else float("nan"),
        time_avg_n=stats[4] / sim_time if sim_time > 0 else float("nan"),
        occupancy_q=occ_q / occ_total if occ_total > 0 else occ_q,
        occupancy_qp=occ_qp / occ_total if occ_total > 0 else occ_qp,
        z_mean=stats[5] / n_meas if n_meas else float("nan"),
        z_m2=stats[6] / n_meas if n_meas else float("nan"),
        mean_system_time_1=stats[8] / n_meas if n_meas else float("nan"),
        deliveries_observed=n_meas,
        sim_time=sim_time,
        race_freqs=(
            stats[10] / races_sv1 if races_sv1 else float("nan"),
            stats[11] / races_sv2 if races_sv2 else float("nan"),
            stats[12] / races_sv2 if races_sv2 else float("nan"),
            stats[13] / races_sv1 if races_sv1 else float("nan"),
        ),
        config=config,
        params=params,
    )
    if config.record_deliveries:
        k = min(n_meas, n_rec)
        result.deliveries_log = {
            "gen": rec_gen[:k], "dep": rec_dep[:k],
            "peak": rec_peak[:k], "z": rec_z[:k],
        }
    if max_ev > 0:
        result.event_log = {
            "time": ev_time[:n_ev], "kind": ev_kind[:n_ev], "state": ev_state[:n_ev],
        }
    return result


def dump_event_log(result: SimResult) -> str:
    """Line-delimited debug dump: time, event kind, state-after."""
    kinds = {EV_ARRIVAL_1: "arr1", EV_ARRIVAL_2: "arr2", EV_DELIVERY_1: "dep1",
             EV_DELIVERY_2: "dep2", EV_DISCARD_2: "disc2"}
    lines = []
    log = result.event_log
    for t, k, s in zip(log["time"], log["kind"], log["state"]):
        state = f"q{s}" if s >= 0 else f"q'{-s}"
        lines.append(f"{t!r}\t{kinds[int(k)]}\t{state}")
    return "\n".join(lines)


def occupancy_check(result: SimResult, dist: StationaryDistribution) -> dict:
    """Absolute deviation between empirical state fractions and the closed form."""
    devs = {}
    devs["q0"] = abs(result.occupancy_q[0] - dist.pi0)
    n = min(len(dist.ladder), len(result.occupancy_q) - 2)
    for i in range(1, n + 1):
        pi_i, pip_i = dist.ladder[i - 1]
        devs[f"q{i}"] = abs(result.occupancy_q[i] - pi_i)
        devs[f"q'{i}"] = abs(result.occupancy_qp[i] - pip_i)
    return {"per_state": devs, "max_deviation": max(devs.values())}
