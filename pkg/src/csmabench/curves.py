"""CCDF curves shared by all estimators: construction, comparison and CSV round trip."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

_MONO_TOL = 1e-12


@dataclass(frozen=True)
class CcdfCurve:
    thresholds: np.ndarray
    ccdf: np.ndarray
    # optional per-threshold wall-clock cost (SGM timing study)
    seconds: np.ndarray | None = None

    def __post_init__(self):
        th = np.asarray(self.thresholds, dtype=float)
        cc = np.asarray(self.ccdf, dtype=float)
        if th.shape != cc.shape or th.ndim != 1:
            raise ValueError("thresholds and ccdf must be 1-D and equal length")
        if np.any(np.diff(th) <= 0):
            raise ValueError("thresholds must be strictly increasing")
        if np.any(cc < -_MONO_TOL) or np.any(cc > 1 + _MONO_TOL):
            raise ValueError("ccdf values outside [0, 1]")
        if np.any(np.diff(cc) > _MONO_TOL):
            raise ValueError("ccdf must be non-increasing")
        object.__setattr__(self, "thresholds", th)
        object.__setattr__(self, "ccdf", np.clip(cc, 0.0, 1.0))
        if self.seconds is not None:
            object.__setattr__(self, "seconds", np.asarray(self.seconds, dtype=float))

    def __len__(self):
        return len(self.thresholds)

    def at(self, x):
        """Linear interpolation of the CCDF, flat beyond the grid ends."""
        return np.interp(x, self.thresholds, self.ccdf)

    def median(self) -> float:
        """Threshold where the CCDF crosses 0.5 (linear interpolation).

        Raises ValueError when the curve does not cross 0.5 on its grid.
        """
        cc, th = self.ccdf, self.thresholds
        if not (cc[0] >= 0.5 >= cc[-1]):
            raise ValueError("curve does not cross 0.5")
        k = int(np.argmax(cc <= 0.5))
        if k == 0 or cc[k] == 0.5:
            return float(th[k])
        # ccdf decreasing: interpolate between k-1 and k
        return float(np.interp(0.5, [cc[k], cc[k - 1]], [th[k], th[k - 1]]))

    def to_csv(self, path: str | Path, meta: dict | None = None) -> None:
        with open(path, "w", newline="") as fh:
            if meta:
                fh.write("# " + "; ".join(f"{k}={v}" for k, v in meta.items()) + "\n")
            w = csv.writer(fh)
            if self.seconds is None:
                w.writerow(["threshold", "ccdf"])
                for a, b in zip(self.thresholds, self.ccdf):
                    w.writerow([repr(float(a)), repr(float(b))])
            else:
                w.writerow(["threshold", "ccdf", "seconds"])
                for a, b, s in zip(self.thresholds, self.ccdf, self.seconds):
                    w.writerow([repr(float(a)), repr(float(b)), repr(float(s))])

    @classmethod
    def from_csv(cls, path: str | Path) -> "CcdfCurve":
        with open(path, newline="") as fh:
            lines = [ln for ln in fh if not ln.startswith("#")]
        rows = list(csv.DictReader(lines))
        th = [float(r["threshold"]) for r in rows]
        cc = [float(r["ccdf"]) for r in rows]
        secs = [float(r["seconds"]) for r in rows] if rows and "seconds" in rows[0] else None
        return cls(np.array(th), np.array(cc), None if secs is None else np.array(secs))


def read_meta(path: str | Path) -> dict[str, str]:
    with open(path) as fh:
        first = fh.readline()
    if not first.startswith("#"):
        return {}
    items = (kv.split("=", 1) for kv in first[1:].strip().split("; ") if "=" in kv)
    return {k: v for k, v in items}


def empirical_ccdf(values, thresholds) -> CcdfCurve:
    """Fraction of ``values`` strictly above each threshold (-inf entries never count)."""
    v = np.sort(np.asarray(values, dtype=float))
    th = np.asarray(thresholds, dtype=float)
    if v.size == 0:
        return CcdfCurve(th, np.zeros_like(th))
    above = v.size - np.searchsorted(v, th, side="right")
    return CcdfCurve(th, above / v.size)


def compare_curves(a: CcdfCurve, b: CcdfCurve, lo: float | None = None, hi: float | None = None) -> float:
    """Maximum vertical distance in percentage points, over ``a``'s grid.

    ``b`` is interpolated onto the part of ``a``'s grid that lies inside both
    curves' threshold ranges (optionally clipped to ``[lo, hi]``).
    """
    x = a.thresholds
    keep = (x >= b.thresholds[0]) & (x <= b.thresholds[-1])
    if lo is not None:
        keep &= x >= lo
    if hi is not None:
        keep &= x <= hi
    if not keep.any():
        raise ValueError("curves have no overlapping threshold range")
    diff = np.abs(a.ccdf[keep] - b.at(x[keep]))
    return float(diff.max() * 100.0)
