"""Stochastic-geometry estimates for a single CSMA population.

Medium access follows a Matérn type-II hard-core approximation with
Rayleigh-faded carrier sensing. SINR coverage is the nearest-AP coverage
integral evaluated by trapezoidal quadrature; rate coverage maps a
throughput target through the auto-rate inverse.
"""

from __future__ import annotations

import math
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .bianchi import mac_efficiency, single_rate_timings
from .curves import CcdfCurve
from .geometry import RadioConfig, db2lin
from .phy import FrameTimings, NoLinkError, RateTable, inv_rate, rate_of_sinr


@dataclass(frozen=True)
class SgmConfig:
    density: float  # APs per m^2
    radio: RadioConfig = RadioConfig()
    mu: float = 1.0
    outer_points: int = 97
    # f_W mass left beyond the outer cutoff
    outer_tail: float = 1e-8
    field_radius_m: float | None = None
    field_radial: int = 160
    field_angular: int = 64
    map_points: int = 20001

    def __post_init__(self):
        if not self.density > 0:
            raise ValueError("density must be positive")
        if min(self.outer_points, self.field_radial, self.field_angular) < 2:
            raise ValueError("quadrature grids need at least two points")
        if self.field_radius < 20 * self.mean_nn_distance:
            raise ValueError("field radius must be at least 20 mean nearest-neighbour distances")

    @property
    def mean_nn_distance(self) -> float:
        return 0.5 / math.sqrt(self.density)

    @property
    def field_radius(self) -> float:
        return self.field_radius_m if self.field_radius_m is not None else 40.0 * self.mean_nn_distance

    @property
    def outer_cutoff_m(self) -> float:
        return math.sqrt(-math.log(self.outer_tail) / (math.pi * self.density))

    def refined(self, factor: int = 2) -> "SgmConfig":
        return SgmConfig(
            self.density, self.radio, self.mu,
            outer_points=(self.outer_points - 1) * factor + 1,
            outer_tail=self.outer_tail,
            field_radius_m=self.field_radius_m,
            field_radial=(self.field_radial - 1) * factor + 1,
            field_angular=self.field_angular * factor,
            map_points=self.map_points,
        )

    def with_field_radius(self, radius_m: float) -> "SgmConfig":
        return SgmConfig(self.density, self.radio, self.mu, self.outer_points, self.outer_tail,
                         radius_m, self.field_radial, self.field_angular, self.map_points)

    def p_sense(self, d):
        """Probability that an AP at distance ``d`` is sensed under Rayleigh fading."""
        r = self.radio
        return np.exp(-self.mu * r.cst_mw * r.pathloss_lin(d) / r.tx_power_mw)

    @cached_property
    def mean_contenders(self) -> float:
        """Mean number of fading-sensed neighbours of a typical AP."""
        d = np.linspace(0.0, self.field_radius, self.map_points)
        return self.density * float(np.trapezoid(self.p_sense(d) * 2.0 * np.pi * d, d))

    @cached_property
    def p_map(self) -> float:
        return _matern_retention(self.mean_contenders)

    @cached_property
    def p_map_tagged(self) -> float:
        return _tagged_map(self)


def _matern_retention(n_bar):
    # P(uniform mark below Poisson(n_bar) neighbours' marks)
    n_bar = np.asarray(n_bar, dtype=float)
    small = n_bar < 1e-9
    safe = np.where(small, 1.0, n_bar)
    out = np.where(small, 1.0 - 0.5 * n_bar, -np.expm1(-safe) / safe)
    return float(out) if out.ndim == 0 else out


def _outer_nodes(cfg: SgmConfig, n: int):
    """Nodes and weights for integrals against the nearest-AP distance density.

    Works in ``u = lambda pi r0^2`` where the density is ``e^-u``: the
    integrand is replaced by its piecewise-linear (trapezoidal) interpolant
    and integrated exactly against ``e^-u``. Nodes cluster near ``u = 0``.
    """
    U = -math.log(cfg.outer_tail)
    u = U * np.linspace(0.0, 1.0, n) ** 2
    a, h = u[:-1], np.diff(u)
    ea, emh = np.exp(-a), np.exp(-h)
    left = ea * (h - 1.0 + emh) / h
    right = ea * (1.0 - emh - h * emh) / h
    wts = np.zeros(n)
    wts[:-1] += left
    wts[1:] += right
    wts[-1] += math.exp(-U)  # remaining mass, integrand held at its last value
    r0 = np.sqrt(u / (math.pi * cfg.density))
    return r0, wts


def _tagged_map(cfg: SgmConfig, n_outer: int = 193, n_rad: int = 96, n_ang: int = 96) -> float:
    # Given the user at the origin and its AP at (r0, 0), the ball B(0, r0) is empty,
    # so the AP's contenders are only those sensed from outside the ball.
    r0, wts = _outer_nodes(cfg, n_outer)
    frac = (np.arange(n_rad) + 0.5) / n_rad
    theta = (np.arange(n_ang) + 0.5) * np.pi / n_ang
    R = r0[:, None, None] * frac[None, :, None]
    dist = np.sqrt(R**2 + r0[:, None, None] ** 2 - 2 * R * r0[:, None, None] * np.cos(theta)[None, None, :])
    # midpoint rule over the disc (half-plane, doubled)
    cell = (r0 / n_rad)[:, None] * (np.pi / n_ang)
    in_ball = 2.0 * np.sum(cfg.p_sense(dist).sum(axis=2) * R[:, :, 0] * cell, axis=1)
    n_r0 = np.maximum(cfg.mean_contenders - cfg.density * in_ball, 0.0)
    return float(np.dot(_matern_retention(n_r0), wts))


def map_typical(cfg: SgmConfig) -> float:
    """Medium access probability of a typical AP, ``(1 - e^-N)/N``."""
    return cfg.p_map


def map_tagged(cfg: SgmConfig) -> float:
    """Medium access probability of the AP nearest to a typical user."""
    return cfg.p_map_tagged


def h1(cfg: SgmConfig, r0, dist_to_tagged):
    """Probability that an AP transmits given that the tagged AP does.

    Independent-thinning approximation: an AP outside the tagged AP's
    (fading-randomised) sensing range transmits with the typical access
    probability.
    """
    return cfg.p_map * (1.0 - cfg.p_sense(dist_to_tagged))


def _coverage_integrand(T: float, cfg: SgmConfig, r0: np.ndarray) -> np.ndarray:
    radio = cfg.radio
    alpha = radio.pathloss_exponent
    n_rad, n_ang = cfg.field_radial, cfg.field_angular
    Rmax = cfg.field_radius
    l0 = radio.pathloss_lin(r0)

    # log-radial nodes from r0 to Rmax; offset angular nodes on (0, pi), mirrored
    span = np.log(np.maximum(Rmax / np.maximum(r0, 1e-12), 1.0))
    s = np.linspace(0.0, 1.0, n_rad)
    R = r0[:, None] * np.exp(span[:, None] * s[None, :])
    theta = (np.arange(n_ang) + 0.5) * np.pi / n_ang
    cos_t = np.cos(theta)
    d2 = R[:, :, None] ** 2 + (r0**2)[:, None, None] - 2.0 * R[:, :, None] * r0[:, None, None] * cos_t
    dist = np.sqrt(np.maximum(d2, 0.0))
    kern = T * l0[:, None] / (radio.pathloss_lin(R) + T * l0[:, None])
    ang = h1(cfg, r0[:, None, None], dist).sum(axis=2) * (2.0 * np.pi / n_ang)
    # d(area) = R^2 dtheta d(log R)
    radial = kern * ang * R**2
    inner = cfg.density * np.trapezoid(radial, dx=1.0, axis=1) * (span / (n_rad - 1))
    # far field beyond Rmax: h1 -> p, kernel -> T l0 / l(R)
    ref = 10.0 ** (radio.pathloss_ref_db / 10.0)
    tail = 2.0 * np.pi * cfg.density * cfg.p_map * T * l0 * Rmax ** (2.0 - alpha) / (ref * (alpha - 2.0))
    noise = np.exp(-cfg.mu * T * l0 * radio.noise_mw / radio.tx_power_mw)
    out = noise * np.exp(-(inner + tail))
    return np.where(r0 > 0, out, 1.0)


def sinr_coverage(T_db: float, cfg: SgmConfig) -> float:
    """P(SINR > T) for a typical user served by its nearest AP."""
    if T_db == -math.inf:
        return 1.0
    if T_db == math.inf:
        return 0.0
    if not math.isfinite(T_db):
        raise ValueError("threshold must be a number")
    T = float(db2lin(T_db))
    r0, wts = _outer_nodes(cfg, cfg.outer_points)
    vals = _coverage_integrand(T, cfg, r0)
    return float(min(max(np.dot(vals, wts), 0.0), 1.0))


def check_refinement(T_db: float, cfg: SgmConfig, tol: float = 1e-3) -> tuple[float, float]:
    """Coverage at ``cfg`` and at a doubled grid; warns when they differ by more than ``tol``."""
    a = sinr_coverage(T_db, cfg)
    b = sinr_coverage(T_db, cfg.refined(2))
    if abs(a - b) > tol:
        warnings.warn(f"quadrature not converged at T={T_db} dB: {a:.6f} vs {b:.6f}", RuntimeWarning, stacklevel=2)
    return a, b


def sinr_ccdf(cfg: SgmConfig, thresholds_db, workers: int = 1) -> CcdfCurve:
    """SINR coverage over a threshold grid, timing each threshold separately."""
    th = np.asarray(thresholds_db, dtype=float)

    def one(T):
        t0 = time.perf_counter()
        v = sinr_coverage(float(T), cfg)
        return v, time.perf_counter() - t0

    cfg.p_map  # computed once up front so no threshold pays for it
    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            res = list(ex.map(one, th))
    else:
        res = [one(T) for T in th]
    return CcdfCurve(th, np.array([r[0] for r in res]), np.array([r[1] for r in res]))


def rate_threshold_db(rho_bps: float, cfg: SgmConfig, table: RateTable = RateTable(),
                      S_bar: float = 1.0, shannon: bool = False) -> float:
    """SINR threshold that supports throughput ``rho_bps`` given the tagged access share."""
    target = rho_bps / (cfg.p_map_tagged * S_bar)
    if shannon:
        if target <= 0:
            return -math.inf
        expo = target / cfg.radio.bandwidth_hz
        if expo > 1000:
            return math.inf
        return 10.0 * math.log10(math.expm1(expo * math.log(2.0)))
    return inv_rate(target, table)


def rate_coverage(rho_bps: float, cfg: SgmConfig, table: RateTable = RateTable(),
                  with_overhead: bool = False, S_bar: float | None = None, shannon: bool = False) -> float:
    """Probability that the tagged AP delivers at least ``rho_bps``.

    ``with_overhead`` scales the access share by the average MAC efficiency
    ``S_bar``. ``shannon`` swaps the auto-rate inverse for the Shannon bound.
    """
    if rho_bps < 0:
        raise ValueError("throughput must be non-negative")
    if with_overhead:
        if S_bar is None or not 0 < S_bar <= 1:
            raise ValueError("S_bar must lie in (0, 1]")
    else:
        S_bar = 1.0
    return sinr_coverage(rate_threshold_db(rho_bps, cfg, table, S_bar, shannon), cfg)


def throughput_ccdf(cfg: SgmConfig, rho_grid_bps, table: RateTable = RateTable(),
                    S_bar: float | None = None, sinr_cache: dict | None = None) -> CcdfCurve:
    """Rate coverage over a throughput grid.

    Thresholds repeat because the auto-rate inverse is a step function, so
    each distinct SINR threshold is integrated once.
    """
    cache = {} if sinr_cache is None else sinr_cache
    vals = []
    for rho in np.asarray(rho_grid_bps, dtype=float):
        T = rate_threshold_db(float(rho), cfg, table, 1.0 if S_bar is None else S_bar)
        if T not in cache:
            cache[T] = sinr_coverage(T, cfg)
        vals.append(cache[T])
    return CcdfCurve(np.asarray(rho_grid_bps, dtype=float), np.array(vals))


def enhanced_overhead(cfg: SgmConfig, table: RateTable, sinr_curve: CcdfCurve,
                      t: FrameTimings = FrameTimings()) -> float:
    """Network-average MAC efficiency from the median SINR and ``n = 1/p_map``.

    Raises :class:`NoLinkError` when the median SINR maps to no rate.
    """
    try:
        med = sinr_curve.median()
    except ValueError:
        cc = sinr_curve.ccdf
        k = 0 if cc[0] < 0.5 else len(cc) - 1
        med = float(sinr_curve.thresholds[k])
        warnings.warn(f"SINR CCDF does not cross 0.5; using endpoint {med} dB", RuntimeWarning, stacklevel=2)
    rate = rate_of_sinr(med, table)
    if rate <= 0:
        raise NoLinkError(f"median SINR {med:.2f} dB below the lowest MCS threshold")
    n = max(1, int(round(1.0 / cfg.p_map)))
    return mac_efficiency(single_rate_timings(rate, n, t))
