"""Saturated DCF analysis: transmission probability and per-AP MAC efficiency."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .phy import FrameTimings, NoLinkError, frame_duration


class NumericalFailure(RuntimeError):
    pass


@dataclass(frozen=True)
class BianchiInputs:
    n: int
    avg_frame_s: float
    avg_success_s: float
    avg_collision_s: float
    timings: FrameTimings = FrameTimings()

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("need at least one contender")
        if min(self.avg_frame_s, self.avg_success_s, self.avg_collision_s) <= 0:
            raise ValueError("durations must be positive")
        if self.avg_success_s < self.avg_frame_s:
            raise ValueError("success period shorter than the frame")


def _tau_of_p(p: float, w: int, m: int) -> float:
    # (1-(2p)^m)/(1-2p) written as a finite geometric sum, so p = 1/2 is regular
    geo = sum((2.0 * p) ** k for k in range(m))
    return 2.0 / (1.0 + w + p * w * geo)


@lru_cache(maxsize=4096)
def solve_tau(n: int, t: FrameTimings = FrameTimings(), tol: float = 1e-10, max_steps: int = 200) -> float:
    """Per-slot transmission probability for ``n`` saturated stations with binary exponential backoff.

    Solves ``tau = 2(1-2p) / ((1-2p)(W+1) + p W (1-(2p)^m))`` with
    ``p = 1-(1-tau)^(n-1)``, ``W = cw_min+1`` and ``W 2^m = cw_max+1``,
    by bisection.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    w, m = t.cw_min + 1, t.backoff_stages
    if n == 1:
        return _tau_of_p(0.0, w, m)

    def g(tau):
        return tau - _tau_of_p(1.0 - (1.0 - tau) ** (n - 1), w, m)

    lo, hi = 0.0, 1.0
    for _ in range(max_steps):
        mid = 0.5 * (lo + hi)
        if g(mid) > 0:
            hi = mid
        else:
            lo = mid
        if hi - lo < tol:
            return 0.5 * (lo + hi)
    raise NumericalFailure(f"tau bisection did not converge for n={n}")


def collision_probability(tau: float, n: int) -> float:
    return 1.0 - (1.0 - tau) ** (n - 1)


def _efficiency(n, tf, ts, tc, sigma, tau):
    tc_star = tc / sigma
    q = (1.0 - tau) ** n
    denom = ts - tc + sigma * (tc_star - q * (tc_star - 1.0)) / (n * tau * (1.0 - tau) ** (n - 1))
    return tf, denom


def mac_efficiency(inp: BianchiInputs) -> float:
    """Fraction of channel time spent on successful frames in the sensing neighbourhood.

    Values above 1 (only reachable with inconsistent timings) are clamped with
    a warning.
    """
    t = inp.timings
    tau = solve_tau(inp.n, t)
    num, denom = _efficiency(inp.n, inp.avg_frame_s, inp.avg_success_s, inp.avg_collision_s, t.sigma_s, tau)
    if denom <= 0:
        raise ValueError("non-positive efficiency denominator; check timing inputs")
    s = num / denom
    if s > 1.0:
        warnings.warn(f"MAC efficiency {s:.4f} > 1 clamped", RuntimeWarning, stacklevel=2)
        s = 1.0
    return s


def mac_efficiency_array(n, tf, ts, tc, t: FrameTimings = FrameTimings()) -> np.ndarray:
    """Vectorised :func:`mac_efficiency` over per-AP neighbourhood timings."""
    n = np.asarray(n, dtype=int)
    uniq, inv = np.unique(n, return_inverse=True)
    tau = np.array([solve_tau(int(k), t) for k in uniq])[inv].reshape(n.shape)
    num, denom = _efficiency(n, np.asarray(tf), np.asarray(ts), np.asarray(tc), t.sigma_s, tau)
    if np.any(denom <= 0):
        raise ValueError("non-positive efficiency denominator; check timing inputs")
    s = num / denom
    if np.any(s > 1.0):
        warnings.warn("MAC efficiency > 1 clamped", RuntimeWarning, stacklevel=2)
    return np.minimum(s, 1.0)


def single_rate_timings(rate_bps: float, n: int, t: FrameTimings = FrameTimings()) -> BianchiInputs:
    """Timings when every station in the neighbourhood uses the same PHY rate."""
    tf = frame_duration(rate_bps, t)
    return BianchiInputs(
        n=n,
        avg_frame_s=tf,
        avg_success_s=tf + t.sifs_s + t.ack_duration_s + t.difs_s,
        avg_collision_s=tf + t.difs_s,
        timings=t,
    )


def neighborhood_timings_all(neighbors, rates, t: FrameTimings = FrameTimings()):
    """Per-AP ``(n, T_f, T_s, T_c)`` over ``{x} U A_x`` from CSR sensing sets.

    APs at rate 0 count towards ``n`` but not towards the durations; entries
    whose neighbourhood has no usable rate are NaN.
    """
    ptr, idx = neighbors
    rates = np.asarray(rates, dtype=float)
    n_ap = len(rates)
    deg = np.diff(ptr)
    rows = np.repeat(np.arange(n_ap), deg)
    live = rates > 0
    tf_each = np.zeros(n_ap)
    tf_each[live] = frame_duration(rates[live], t)
    cnt = live + np.bincount(rows, weights=live[idx], minlength=n_ap)
    tot = tf_each + np.bincount(rows, weights=tf_each[idx], minlength=n_ap)
    tmax = np.where(live, tf_each, -np.inf)
    if idx.size:
        np.maximum.at(tmax, rows, np.where(live[idx], tf_each[idx], -np.inf))
    with np.errstate(invalid="ignore", divide="ignore"):
        tf = np.where(cnt > 0, tot / np.maximum(cnt, 1), np.nan)
    ts = tf + t.sifs_s + t.ack_duration_s + t.difs_s
    tc = np.where(cnt > 0, tmax + t.difs_s, np.nan)
    return 1 + deg, tf, ts, tc


def neighborhood_timings(x: int, dep, rates, t: FrameTimings = FrameTimings()) -> BianchiInputs:
    """Average frame, success and collision durations in AP ``x``'s sensing neighbourhood.

    A collision holds the channel for the longest frame involved, plus DIFS.
    """
    rates = np.asarray(rates, dtype=float)
    members = np.concatenate(([x], np.flatnonzero(dep.sensing_adj[x])))
    live = members[rates[members] > 0]
    if live.size == 0:
        raise NoLinkError(f"AP {x}: no neighbour with a usable rate")
    tfs = frame_duration(rates[live], t)
    tf = float(np.mean(tfs))
    return BianchiInputs(
        n=len(members),
        avg_frame_s=tf,
        avg_success_s=tf + t.sifs_s + t.ack_duration_s + t.difs_s,
        avg_collision_s=float(np.max(tfs)) + t.difs_s,
        timings=t,
    )
