"""Discrete-event CSMA/CA simulator used as desk-scale ground truth.

Every AP with a user is saturated on the downlink and runs DCF: it defers
while any AP in its sensing set occupies the channel, waits DIFS, counts down
a uniform backoff in slot steps (frozen while busy), and doubles its window
after a failed attempt. A frame is received iff no sensed AP overlapped it
and the worst SINR over its duration clears the threshold of its MCS. A
successful exchange keeps the channel busy for SIFS plus the ACK. Rates
follow the mean SINR each receiver has observed, re-evaluated periodically.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numba
import numpy as np

from .curves import CcdfCurve, empirical_ccdf
from .geometry import Deployment, RadioConfig, db2lin, lin2db
from .phy import FrameTimings, RateTable, frame_duration

TX_START, TX_END, COLLISION, ACK = 0, 1, 2, 3
EVENT_NAMES = ("tx_start", "tx_end", "collision", "ack")

_FROZEN, _COUNTING, _DATA, _ACK = 0, 1, 2, 3
_EV_COUNTDOWN, _EV_DATA_END, _EV_ACK_END = 1, 2, 3

ERR_OK, ERR_STALL = 0, 1


class SimulationError(RuntimeError):
    pass


@dataclass(frozen=True)
class DesConfig:
    sim_duration_s: float = 10.0
    timings: FrameTimings = FrameTimings()
    table: RateTable = RateTable()
    rng_seed: int = 0
    rate_update_s: float = 0.1
    # oracle-fixed mode: every AP sends at this rate instead of adapting
    fixed_rate_bps: float | None = None
    trace: bool = False
    trace_capacity: int = 2_000_000

    def __post_init__(self):
        if not self.sim_duration_s > 0:
            raise ValueError("simulation duration must be positive")
        if self.fixed_rate_bps is not None and self.fixed_rate_bps not in self.table.rates_bps:
            raise ValueError("fixed rate must be one of the table rates")


@dataclass(frozen=True)
class DesLinkStats:
    ap_id: int
    user_id: int
    mean_rx_sinr_db: float
    delivered_bits: int
    throughput_bps: float
    tx_attempts: int
    collisions: int
    successes: int = 0
    # bits-equivalent of successful frame air time at the sending rate
    phy_bits: float = 0.0
    busy_time_s: float = 0.0
    inner_flag: bool = True


@dataclass
class DesResult:
    links: list[DesLinkStats]
    trace: np.ndarray | None = None  # structured (time_s, ap_id, event)
    trace_truncated: bool = False
    ap_busy_time_s: np.ndarray = field(default_factory=lambda: np.zeros(0))


# ---------------------------------------------------------------- heap helpers

@numba.njit(cache=True)
def _less(key, a, b):
    return key[a] < key[b] or (key[a] == key[b] and a < b)


@numba.njit(cache=True)
def _sift_up(heap, pos, key, k):
    while k > 0:
        parent = (k - 1) >> 1
        if _less(key, heap[k], heap[parent]):
            a, b = heap[k], heap[parent]
            heap[k], heap[parent] = b, a
            pos[b], pos[a] = k, parent
            k = parent
        else:
            break


@numba.njit(cache=True)
def _sift_down(heap, pos, key, k):
    n = heap.shape[0]
    while True:
        l = 2 * k + 1
        if l >= n:
            break
        c = l
        if l + 1 < n and _less(key, heap[l + 1], heap[l]):
            c = l + 1
        if _less(key, heap[c], heap[k]):
            a, b = heap[k], heap[c]
            heap[k], heap[c] = b, a
            pos[b], pos[a] = k, c
            k = c
        else:
            break


@numba.njit(cache=True)
def _set_key(heap, pos, key, item, value):
    old = key[item]
    key[item] = value
    if value < old:
        _sift_up(heap, pos, key, pos[item])
    else:
        _sift_down(heap, pos, key, pos[item])


# ---------------------------------------------------------------- event loop

@numba.njit(cache=True)
def _recompute_interference(act, n_act, gain, i_now):
    for a in range(n_act):
        k = act[a]
        s = 0.0
        for b in range(n_act):
            if b != a:
                s += gain[act[b], k]
        i_now[k] = s


@numba.njit(cache=True)
def _simulate(adj, nb_ptr, nb_idx, gain, has_user, noise, thr_lin, rates, tf, fixed_idx,
              sigma, sifs, difs, ack_dur, cw_min, cw_max, duration, rate_period, seed,
              trace_cap):
    n = adj.shape[0]
    np.random.seed(seed)
    inf = np.inf
    eps = 1e-10
    n_rates = rates.shape[0]

    state = np.full(n, _COUNTING, np.int64)
    busy = np.zeros(n, np.int64)
    backoff = np.zeros(n, np.int64)
    cw = np.full(n, cw_min, np.int64)
    resume = np.full(n, difs)
    kind = np.full(n, _EV_COUNTDOWN, np.int64)
    rate_idx = np.zeros(n, np.int64)
    if fixed_idx >= 0:
        rate_idx[:] = fixed_idx

    collided = np.zeros(n, np.bool_)
    i_now = np.zeros(n)
    i_max = np.zeros(n)
    i_int = np.zeros(n)
    i_last = np.zeros(n)
    tx_start = np.zeros(n)
    act = np.zeros(n, np.int64)
    n_act = 0

    attempts = np.zeros(n, np.int64)
    successes = np.zeros(n, np.int64)
    collisions = np.zeros(n, np.int64)
    sinr_sum = np.zeros(n)
    phy_bits = np.zeros(n)
    busy_time = np.zeros(n)
    obs_int = np.zeros(n)
    obs_time = np.zeros(n)

    tr_t = np.zeros(trace_cap)
    tr_ap = np.zeros(trace_cap, np.int64)
    tr_ev = np.zeros(trace_cap, np.int64)
    n_tr = 0
    truncated = False

    # heap over n APs plus the rate-update timer (item n)
    key = np.empty(n + 1)
    for i in range(n):
        backoff[i] = np.random.randint(0, cw_min + 1)
        key[i] = difs + backoff[i] * sigma
    key[n] = rate_period if fixed_idx < 0 else inf
    order = np.argsort(key, kind="mergesort")
    heap = order.astype(np.int64)
    pos = np.empty(n + 1, np.int64)
    for k in range(n + 1):
        pos[heap[k]] = k

    last_tx = 0.0
    err = ERR_OK
    n_events = 0

    while True:
        item = heap[0]
        t = key[item]
        if t > duration:
            break
        if t - last_tx > 1.0:
            err = ERR_STALL
            break

        if item == n:
            for i in range(n):
                if has_user[i] and obs_time[i] > 0:
                    s = gain[i, i] / (obs_int[i] / obs_time[i] + noise)
                    r = 0
                    for q in range(n_rates):
                        if s >= thr_lin[q]:
                            r = q
                    rate_idx[i] = r
            _set_key(heap, pos, key, n, t + rate_period)
            continue

        ev = kind[item]
        if ev == _EV_COUNTDOWN:
            i = item
            last_tx = t
            state[i] = _DATA
            attempts[i] += 1
            collided[i] = False
            tx_start[i] = t
            for a in range(n_act):
                j = act[a]
                i_int[j] += i_now[j] * (t - i_last[j])
                i_last[j] = t
                if adj[i, j]:
                    collided[i] = True
                    collided[j] = True
            s_new = 0.0
            for a in range(n_act):
                j = act[a]
                s_new += gain[j, i]
                i_now[j] += gain[i, j]
                if i_now[j] > i_max[j]:
                    i_max[j] = i_now[j]
            act[n_act] = i
            n_act += 1
            i_now[i] = s_new
            i_max[i] = s_new
            i_int[i] = 0.0
            i_last[i] = t
            # neighbours sense the medium busy
            for p in range(nb_ptr[i], nb_ptr[i + 1]):
                j = nb_idx[p]
                busy[j] += 1
                if state[j] == _COUNTING and key[j] > t + eps:
                    if t > resume[j]:
                        done = int(math.floor((t - resume[j]) / sigma + 1e-9))
                        backoff[j] = max(backoff[j] - done, 0)
                    state[j] = _FROZEN
                    _set_key(heap, pos, key, j, inf)
            if n_tr < trace_cap:
                tr_t[n_tr] = t; tr_ap[n_tr] = i; tr_ev[n_tr] = TX_START; n_tr += 1
            else:
                truncated = True
            kind[i] = _EV_DATA_END
            _set_key(heap, pos, key, i, t + tf[rate_idx[i]])
            continue

        if ev == _EV_DATA_END:
            i = item
            dur = t - tx_start[i]
            i_int[i] += i_now[i] * (t - i_last[i])
            for a in range(n_act):
                j = act[a]
                if j != i:
                    i_int[j] += i_now[j] * (t - i_last[j])
                    i_last[j] = t
            for a in range(n_act):
                if act[a] == i:
                    act[a] = act[n_act - 1]
                    break
            n_act -= 1
            n_events += 1
            if n_events % 4096 == 0:
                # bound drift from incremental add/subtract
                _recompute_interference(act, n_act, gain, i_now)
            else:
                for a in range(n_act):
                    j = act[a]
                    i_now[j] = max(i_now[j] - gain[i, j], 0.0)
            i_now[i] = 0.0

            ok = not collided[i]
            if has_user[i]:
                obs_int[i] += i_int[i]
                obs_time[i] += dur
                if ok:
                    ok = gain[i, i] / (i_max[i] + noise) >= thr_lin[rate_idx[i]]
            if n_tr < trace_cap:
                tr_t[n_tr] = t; tr_ap[n_tr] = i; tr_ev[n_tr] = TX_END; n_tr += 1
            else:
                truncated = True
            if ok:
                if has_user[i]:
                    successes[i] += 1
                    sinr_sum[i] += gain[i, i] / (i_int[i] / dur + noise)
                    phy_bits[i] += rates[rate_idx[i]] * dur
                busy_time[i] += dur + sifs + ack_dur
                cw[i] = cw_min
                state[i] = _ACK
                kind[i] = _EV_ACK_END
                _set_key(heap, pos, key, i, t + sifs + ack_dur)
                continue
            if collided[i]:
                collisions[i] += 1
                if n_tr < trace_cap:
                    tr_t[n_tr] = t; tr_ap[n_tr] = i; tr_ev[n_tr] = COLLISION; n_tr += 1
                else:
                    truncated = True
            cw[i] = min(2 * cw[i] + 1, cw_max)
            # fall through to release

        elif ev == _EV_ACK_END:
            i = item
            if n_tr < trace_cap:
                tr_t[n_tr] = t; tr_ap[n_tr] = i; tr_ev[n_tr] = ACK; n_tr += 1
            else:
                truncated = True

        # release the channel held by AP i
        for p in range(nb_ptr[i], nb_ptr[i + 1]):
            j = nb_idx[p]
            busy[j] -= 1
            if busy[j] == 0 and state[j] == _FROZEN:
                resume[j] = t + difs
                state[j] = _COUNTING
                kind[j] = _EV_COUNTDOWN
                _set_key(heap, pos, key, j, resume[j] + backoff[j] * sigma)
        backoff[i] = np.random.randint(0, cw[i] + 1)
        kind[i] = _EV_COUNTDOWN
        if busy[i] == 0:
            state[i] = _COUNTING
            resume[i] = t + difs
            _set_key(heap, pos, key, i, resume[i] + backoff[i] * sigma)
        else:
            state[i] = _FROZEN
            _set_key(heap, pos, key, i, inf)

    return (err, attempts, successes, collisions, sinr_sum, phy_bits, busy_time,
            tr_t[:n_tr], tr_ap[:n_tr], tr_ev[:n_tr], truncated)


# ---------------------------------------------------------------- wrappers

def _gain_matrix(dep: Deployment, cfg: RadioConfig) -> tuple[np.ndarray, np.ndarray]:
    # gain[i, k]: power from AP i at the receiver served by AP k
    ap_user = dep.ap_user
    has_user = ap_user >= 0
    g = np.zeros((dep.n_aps, dep.n_aps))
    cols = np.flatnonzero(has_user)
    g[:, cols] = cfg.tx_power_mw / dep.ap_user_loss_lin[:, ap_user[cols]]
    return g, has_user


def run_des_result(dep: Deployment, cfg: RadioConfig, des: DesConfig = DesConfig()) -> DesResult:
    if dep.sensing_adj is None:
        raise ValueError("deployment has no sensing graph")
    t, table = des.timings, des.table
    adj = np.ascontiguousarray(dep.sensing_adj, dtype=np.bool_)
    nb_ptr, nb_idx = dep.neighbors
    gain, has_user = _gain_matrix(dep, cfg)
    rates = np.asarray(table.rates_bps)
    fixed = -1 if des.fixed_rate_bps is None else int(np.flatnonzero(rates == des.fixed_rate_bps)[0])
    out = _simulate(
        adj, nb_ptr, nb_idx, gain, has_user, cfg.noise_mw,
        db2lin(np.asarray(table.thresholds_db)), rates, frame_duration(rates, t), fixed,
        t.sigma_s, t.sifs_s, t.difs_s, t.ack_duration_s, t.cw_min, t.cw_max,
        des.sim_duration_s, des.rate_update_s, des.rng_seed,
        des.trace_capacity if des.trace else 0,
    )
    err, attempts, succ, coll, sinr_sum, phy_bits, busy_time, tr_t, tr_ap, tr_ev, truncated = out
    if err == ERR_STALL:
        raise SimulationError("no transmission for one simulated second")
    inner = dep.inner_mask if dep.inner_mask is not None else np.ones(dep.n_aps, dtype=bool)
    links = []
    for u in range(dep.n_users):
        x = int(dep.association[u])
        k = int(succ[x])
        bits = k * t.msdu_bits
        links.append(DesLinkStats(
            ap_id=x,
            user_id=u,
            mean_rx_sinr_db=float(lin2db(sinr_sum[x] / k)) if k else -math.inf,
            delivered_bits=bits,
            throughput_bps=bits / des.sim_duration_s,
            tx_attempts=int(attempts[x]),
            collisions=int(coll[x]),
            successes=k,
            phy_bits=float(phy_bits[x]),
            busy_time_s=float(busy_time[x]),
            inner_flag=bool(inner[x]),
        ))
    trace = None
    if des.trace:
        trace = np.zeros(len(tr_t), dtype=[("time_s", "f8"), ("ap_id", "i8"), ("event", "i8")])
        trace["time_s"], trace["ap_id"], trace["event"] = tr_t, tr_ap, tr_ev
    return DesResult(links, trace, bool(truncated), busy_time)


def run_des(dep: Deployment, cfg: RadioConfig, des: DesConfig = DesConfig()) -> list[DesLinkStats]:
    """Simulate saturated downlink DCF over ``dep`` and return per-link statistics."""
    return run_des_result(dep, cfg, des).links


def des_ccdfs(stats, sinr_thresholds_db, throughput_thresholds_bps) -> tuple[CcdfCurve, CcdfCurve]:
    """Empirical SINR and throughput CCDFs over the inner links of all realizations.

    ``stats`` is a list of per-realization link lists (or one flat list). Links
    that never delivered a packet count as no-link (SINR -inf, throughput 0).
    """
    flat = [s for group in stats for s in (group if isinstance(group, list) else [group])]
    inner = [s for s in flat if s.inner_flag]
    sinr = [s.mean_rx_sinr_db for s in inner]
    thr = [s.throughput_bps for s in inner]
    return empirical_ccdf(sinr, sinr_thresholds_db), empirical_ccdf(thr, throughput_thresholds_bps)


def write_trace_csv(trace: np.ndarray, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["time_s", "ap_id", "event"])
        for rec in trace:
            w.writerow([repr(float(rec["time_s"])), int(rec["ap_id"]), EVENT_NAMES[int(rec["event"])]])
