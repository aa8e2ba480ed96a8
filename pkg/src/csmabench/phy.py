"""IEEE 802.11ac abstraction: SINR-to-rate step function and frame timing constants."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np


class NoLinkError(ValueError):
    """Raised when a link cannot carry traffic (PHY rate of zero)."""


# 20 MHz, 1 spatial stream, 800 ns guard interval
DEFAULT_THRESHOLDS_DB = (4.0, 7.0, 10.0, 13.0, 16.0, 19.0, 22.0, 25.0, 27.0)
DEFAULT_RATES_BPS = (6.5e6, 13e6, 19.5e6, 26e6, 39e6, 52e6, 58.5e6, 65e6, 78e6)


@dataclass(frozen=True)
class RateTable:
    thresholds_db: tuple[float, ...] = DEFAULT_THRESHOLDS_DB
    rates_bps: tuple[float, ...] = DEFAULT_RATES_BPS

    def __post_init__(self):
        th = np.asarray(self.thresholds_db, dtype=float)
        rt = np.asarray(self.rates_bps, dtype=float)
        if th.ndim != 1 or th.size == 0 or th.size != rt.size:
            raise ValueError("rate table needs equal-length, nonempty threshold and rate lists")
        if np.any(np.diff(th) <= 0) or np.any(np.diff(rt) <= 0):
            raise ValueError("rate table thresholds and rates must be strictly increasing")
        if rt[0] <= 0:
            raise ValueError("rates must be positive")
        object.__setattr__(self, "thresholds_db", tuple(float(x) for x in th))
        object.__setattr__(self, "rates_bps", tuple(float(x) for x in rt))

    @property
    def min_sinr_db(self) -> float:
        return self.thresholds_db[0]

    @property
    def max_rate_bps(self) -> float:
        return self.rates_bps[-1]

    @property
    def steps(self) -> list[tuple[float, float]]:
        return list(zip(self.thresholds_db, self.rates_bps))

    @classmethod
    def from_csv(cls, path: str | Path) -> "RateTable":
        """Load ``threshold_db,rate_bps`` rows (header optional)."""
        rows = []
        with open(path, newline="") as fh:
            for rec in csv.reader(fh):
                if not rec or rec[0].strip().startswith("#"):
                    continue
                try:
                    rows.append((float(rec[0]), float(rec[1])))
                except ValueError:
                    if rows:
                        raise
                    continue  # header
        rows.sort()
        return cls(tuple(r[0] for r in rows), tuple(r[1] for r in rows))

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["threshold_db", "rate_bps"])
            w.writerows(self.steps)


@dataclass(frozen=True)
class FrameTimings:
    sigma_s: float = 9e-6
    sifs_s: float = 16e-6
    difs_s: float = 34e-6
    phy_header_s: float = 40e-6
    mac_header_bits: int = 320
    msdu_bits: int = 12000
    ack_bits: int = 112
    ack_rate_bps: float = 24e6
    cw_min: int = 15
    cw_max: int = 1023

    def __post_init__(self):
        if not math.isclose(self.difs_s, self.sifs_s + 2 * self.sigma_s, rel_tol=1e-9):
            raise ValueError("DIFS must equal SIFS + 2 slots")
        ratio = (self.cw_max + 1) / (self.cw_min + 1)
        stages = math.log2(ratio)
        if ratio < 1 or not stages.is_integer():
            raise ValueError("cw_max+1 must be a power-of-two multiple of cw_min+1")

    @property
    def backoff_stages(self) -> int:
        return int(math.log2((self.cw_max + 1) / (self.cw_min + 1)))

    @property
    def ack_duration_s(self) -> float:
        return self.phy_header_s + self.ack_bits / self.ack_rate_bps

    @property
    def frame_bits(self) -> int:
        return self.mac_header_bits + self.msdu_bits


def rate_of_sinr(sinr_db, table: RateTable = RateTable()):
    """PHY rate (bps) of the largest table threshold not above ``sinr_db``; 0 below the first.

    Accepts scalars or arrays.
    """
    th = np.asarray(table.thresholds_db)
    rates = np.concatenate(([0.0], np.asarray(table.rates_bps)))
    idx = np.searchsorted(th, np.asarray(sinr_db, dtype=float), side="right")
    out = rates[idx]
    return float(out) if np.ndim(out) == 0 else out


def inv_rate(target_rate_bps: float, table: RateTable = RateTable()) -> float:
    """Smallest SINR threshold (dB) whose rate reaches ``target_rate_bps``.

    Returns -inf for targets <= 0 and +inf above the top rate.
    """
    if target_rate_bps <= 0:
        return -math.inf
    for th, r in table.steps:
        if r >= target_rate_bps:
            return th
    return math.inf


def frame_duration(phy_rate_bps, t: FrameTimings = FrameTimings()):
    """Data frame air time: PHY header plus MAC header and MSDU at the PHY rate."""
    rate = np.asarray(phy_rate_bps, dtype=float)
    if np.any(rate <= 0):
        raise NoLinkError("frame duration undefined at PHY rate 0")
    out = t.phy_header_s + t.frame_bits / rate
    return float(out) if np.ndim(out) == 0 else out
