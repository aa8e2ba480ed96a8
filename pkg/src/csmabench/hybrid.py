"""Per-link time-average SINR, air-time share and throughput over a fixed deployment."""

from __future__ import annotations

import csv
from dataclasses import astuple, dataclass
from pathlib import Path

import numpy as np

from .bianchi import mac_efficiency_array, neighborhood_timings_all
from .geometry import Deployment, RadioConfig, lin2db
from .phy import FrameTimings, RateTable, frame_duration, rate_of_sinr


@dataclass(frozen=True)
class LinkMetrics:
    ap_id: int
    user_id: int
    sinr_db: float
    phy_rate_bps: float
    airtime: float
    mac_eff: float
    throughput_bps: float
    inner_flag: bool


def link_sinr_all(dep: Deployment, cfg: RadioConfig) -> np.ndarray:
    """Time-average SINR (dB) of every user; see :func:`link_sinr`."""
    ptr, idx = dep.neighbors
    rx = cfg.tx_power_mw / dep.ap_user_loss_lin  # rows: APs, columns: users
    share = 1.0 / (1.0 + np.diff(ptr))
    users = np.arange(dep.n_users)
    aps = dep.association
    total = share @ rx
    # remove the serving AP and everything it senses
    ap_user = dep.ap_user
    rows = np.repeat(np.arange(dep.n_aps), np.diff(ptr))
    served = ap_user[rows] >= 0
    sensed = np.bincount(rows[served], weights=rx[idx[served], ap_user[rows[served]]] * share[idx[served]],
                         minlength=dep.n_aps)
    signal = rx[aps, users]
    interference = np.maximum(total - signal * share[aps] - sensed[aps], 0.0)
    return lin2db(signal / (interference + cfg.noise_mw))


def link_sinr(u: int, dep: Deployment, cfg: RadioConfig) -> float:
    """SINR of user ``u``: out-of-range APs interfere in proportion to ``1/(1+|A_z|)``."""
    x = int(dep.association[u])
    rx = cfg.tx_power_mw / dep.ap_user_loss_lin[:, u]
    share = 1.0 / (1.0 + dep.n_sensed)
    mask = ~dep.sensing_adj[x]
    mask[x] = False
    interference = float(np.sum(rx[mask] * share[mask]))
    return float(lin2db(rx[x] / (interference + cfg.noise_mw)))


def airtime_all(dep: Deployment, rates, t: FrameTimings = FrameTimings()) -> np.ndarray:
    ptr, idx = dep.neighbors
    rates = np.asarray(rates, dtype=float)
    live = rates > 0
    p = 1.0 / (1.0 + np.diff(ptr))
    w = np.zeros_like(rates)
    w[live] = frame_duration(rates[live], t) * p[live]
    rows = np.repeat(np.arange(dep.n_aps), np.diff(ptr))
    others = np.bincount(rows, weights=w[idx], minlength=dep.n_aps)
    out = np.zeros_like(rates)
    out[live] = w[live] / (w[live] + others[live])
    return out


def airtime(x: int, dep: Deployment, rates, t: FrameTimings = FrameTimings()) -> float:
    """Share of channel time AP ``x`` occupies among its sensing neighbours.

    Each AP weighs its frame duration by ``p = 1/(1+|A|)``; neighbours without
    a usable rate drop out of the sum. Zero when ``x`` itself has no link.
    """
    rates = np.asarray(rates, dtype=float)
    if rates[x] <= 0:
        return 0.0
    p = 1.0 / (1.0 + dep.n_sensed)
    own = frame_duration(rates[x], t) * p[x]
    nb = np.flatnonzero(dep.sensing_adj[x] & (rates > 0))
    rest = float(np.sum(frame_duration(rates[nb], t) * p[nb])) if nb.size else 0.0
    return own / (own + rest)


def evaluate_hybrid_arrays(dep: Deployment, cfg: RadioConfig, table: RateTable = RateTable(),
                           t: FrameTimings = FrameTimings()) -> dict[str, np.ndarray]:
    """Column-oriented hybrid evaluation, one entry per user."""
    sinr = link_sinr_all(dep, cfg)
    ap_rate = np.zeros(dep.n_aps)
    ap_rate[dep.association] = rate_of_sinr(sinr, table)
    at = airtime_all(dep, ap_rate, t)
    n, tf, ts, tc = neighborhood_timings_all(dep.neighbors, ap_rate, t)
    eff = np.ones(dep.n_aps)
    ok = ~np.isnan(tf)
    if ok.any():
        eff[ok] = mac_efficiency_array(n[ok], tf[ok], ts[ok], tc[ok], t)
    a = dep.association
    mac = eff[a]
    air = at[a]
    rate = ap_rate[a]
    inner = dep.inner_mask[a] if dep.inner_mask is not None else np.ones(dep.n_users, dtype=bool)
    return {
        "ap_id": a.copy(),
        "user_id": np.arange(dep.n_users),
        "sinr_db": sinr,
        "phy_rate_bps": rate,
        "airtime": air,
        "mac_eff": mac,
        "throughput_bps": mac * air * rate,
        "inner_flag": inner,
    }


def evaluate_hybrid(dep: Deployment, cfg: RadioConfig, table: RateTable = RateTable(),
                    t: FrameTimings = FrameTimings()) -> list[LinkMetrics]:
    """Hybrid model metrics for every link of a deployment.

    Rates come from the link SINR, and air time and MAC efficiency are then
    computed once from those rates. Links below the lowest MCS threshold
    report zero throughput while their AP still counts as a contender. The
    MAC efficiency of an AP whose whole neighbourhood is linkless is reported
    as 1.
    """
    cols = evaluate_hybrid_arrays(dep, cfg, table, t)
    out = []
    for k in range(dep.n_users):
        out.append(LinkMetrics(
            ap_id=int(cols["ap_id"][k]),
            user_id=int(cols["user_id"][k]),
            sinr_db=float(cols["sinr_db"][k]),
            phy_rate_bps=float(cols["phy_rate_bps"][k]),
            airtime=float(cols["airtime"][k]),
            mac_eff=float(cols["mac_eff"][k]),
            throughput_bps=float(cols["throughput_bps"][k]),
            inner_flag=bool(cols["inner_flag"][k]),
        ))
    return out


def write_links_csv(links: list[LinkMetrics], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["ap_id", "user_id", "sinr_db", "rate_bps", "airtime", "mac_eff", "throughput_bps", "inner_flag"])
        for m in links:
            row = list(astuple(m))
            row[-1] = int(row[-1])
            w.writerow([repr(v) if isinstance(v, float) else v for v in row])
