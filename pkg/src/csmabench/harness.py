"""Monte Carlo orchestration: CCDF curves and timing files per (model, density, CST)."""

from __future__ import annotations

import csv
import json
import logging
import os
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .curves import CcdfCurve, empirical_ccdf
from .des import DesConfig, run_des
from .geometry import EmptyRealization, RadioConfig, area_side_for, build_deployment
from .hybrid import evaluate_hybrid_arrays
from .phy import FrameTimings, NoLinkError, RateTable
from .sgm import SgmConfig, enhanced_overhead, sinr_ccdf, throughput_ccdf

log = logging.getLogger(__name__)

MODELS = ("sgm", "sgm_enhanced", "hybrid", "des")
# an empty realization is redrawn with seed + k * RESAMPLE_STRIDE
RESAMPLE_STRIDE = 1_000_003
MAX_RESAMPLES = 20


@dataclass(frozen=True)
class ExperimentConfig:
    model: str = "hybrid"
    densities: tuple[float, ...] = (500.0, 1000.0, 5000.0, 10000.0)  # APs per km^2
    csts: tuple[float, ...] = (-82.0,)
    realizations: int = 50
    area_km2: float = 0.05
    seed: int = 0
    sinr_min_db: float = -10.0
    sinr_max_db: float = 40.0
    sinr_points: int = 60
    throughput_min_mbps: float = 0.1
    throughput_max_mbps: float = 80.0
    throughput_points: int = 60
    sgm_outer_points: int = 97
    sgm_field_radial: int = 160
    sgm_field_angular: int = 64
    sim_duration_s: float = 10.0
    workers: int = 1
    output_dir: str = "results"

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}; choose from {', '.join(MODELS)}")
        if self.realizations < 1:
            raise ValueError("realizations must be >= 1")
        if not self.densities or any(not d > 0 for d in self.densities):
            raise ValueError("densities must be positive")
        if not self.csts:
            raise ValueError("at least one CST is required")
        if self.area_km2 <= 0 or self.sim_duration_s <= 0:
            raise ValueError("area and simulation duration must be positive")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.sinr_points < 2 or self.throughput_points < 2:
            raise ValueError("grids need at least two points")
        if not 0 < self.throughput_min_mbps < self.throughput_max_mbps:
            raise ValueError("throughput grid bounds must satisfy 0 < min < max")
        if not self.sinr_min_db < self.sinr_max_db:
            raise ValueError("SINR grid bounds must satisfy min < max")
        object.__setattr__(self, "densities", tuple(float(d) for d in self.densities))
        object.__setattr__(self, "csts", tuple(float(c) for c in self.csts))

    @property
    def sinr_grid_db(self) -> np.ndarray:
        return np.linspace(self.sinr_min_db, self.sinr_max_db, self.sinr_points)

    @property
    def throughput_grid_bps(self) -> np.ndarray:
        return 1e6 * np.geomspace(self.throughput_min_mbps, self.throughput_max_mbps, self.throughput_points)

    def sgm_config(self, density_km2: float, radio: RadioConfig) -> SgmConfig:
        return SgmConfig(density_km2 * 1e-6, radio, outer_points=self.sgm_outer_points,
                         field_radial=self.sgm_field_radial, field_angular=self.sgm_field_angular)

    @classmethod
    def from_file(cls, path: str | Path, **overrides) -> "ExperimentConfig":
        """Load a flat JSON object; keyword overrides win over file values."""
        with open(path) as fh:
            raw = json.load(fh)
        if not isinstance(raw, dict):
            raise ValueError("config file must hold a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"unknown config keys: {', '.join(sorted(unknown))}")
        raw.update({k: v for k, v in overrides.items() if v is not None})
        for key in ("densities", "csts"):
            if key in raw and not isinstance(raw[key], (list, tuple)):
                raw[key] = [raw[key]]
            if key in raw:
                raw[key] = tuple(raw[key])
        return cls(**raw)


@dataclass
class TimingReport:
    model: str
    density: float
    cst: float
    per_unit_seconds: list[float]
    core_count_note: str = ""

    @property
    def total_seconds(self) -> float:
        return float(sum(self.per_unit_seconds))

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            if self.core_count_note:
                fh.write(f"# {self.core_count_note}\n")
            w = csv.writer(fh)
            w.writerow(["model", "density", "cst", "unit_index", "seconds"])
            for k, s in enumerate(self.per_unit_seconds):
                w.writerow([self.model, _num(self.density), _num(self.cst), k, repr(float(s))])

    @classmethod
    def from_csv(cls, path: str | Path) -> "TimingReport":
        with open(path, newline="") as fh:
            lines = list(fh)
        note = lines[0][1:].strip() if lines and lines[0].startswith("#") else ""
        rows = list(csv.DictReader(ln for ln in lines if not ln.startswith("#")))
        if not rows:
            raise ValueError(f"{path}: empty timing file")
        return cls(rows[0]["model"], float(rows[0]["density"]), float(rows[0]["cst"]),
                   [float(r["seconds"]) for r in rows], note)


@dataclass
class ExperimentResult:
    curves: dict[tuple[float, float], tuple[CcdfCurve, CcdfCurve]] = field(default_factory=dict)
    timings: dict[tuple[float, float], TimingReport] = field(default_factory=dict)
    files: list[Path] = field(default_factory=list)


def _num(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else repr(float(x))


def curve_filename(model: str, kind: str, density: float, cst: float) -> str:
    return f"{model}_{kind}_d{_num(density)}_cst{_num(cst)}.csv"


def realization_seed(base: int, index: int) -> int:
    return base + index


def _deployment_for(density_km2: float, side: float, seed: int, radio: RadioConfig):
    for k in range(MAX_RESAMPLES):
        s = seed + k * RESAMPLE_STRIDE
        try:
            return build_deployment(density_km2 * 1e-6, side, s, radio), s
        except EmptyRealization:
            log.info("seed %d drew no APs; resampling", s)
    raise EmptyRealization(f"no APs after {MAX_RESAMPLES} draws from seed {seed}")


def _map_ordered(fn, items, workers: int):
    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            return list(ex.map(fn, items))
    return [fn(it) for it in items]


def run_sgm(cfg: ExperimentConfig, density: float, radio: RadioConfig, enhanced: bool = False,
            table: RateTable = RateTable(), t: FrameTimings = FrameTimings()):
    """SINR and throughput CCDFs from the analytic model, timed per SINR threshold."""
    sc = cfg.sgm_config(density, radio)
    t0 = time.perf_counter()
    sc.p_map, sc.p_map_tagged
    setup = time.perf_counter() - t0
    sinr = sinr_ccdf(sc, cfg.sinr_grid_db, workers=cfg.workers)
    per_unit = list(sinr.seconds)
    # MAP set-up is shared by all thresholds; spread it evenly
    per_unit = [s + setup / len(per_unit) for s in per_unit]
    t0 = time.perf_counter()
    s_bar = None
    if enhanced:
        try:
            s_bar = enhanced_overhead(sc, table, sinr, t)
        except NoLinkError as exc:
            warnings.warn(f"{exc}; falling back to the raw throughput curve", RuntimeWarning, stacklevel=2)
    thr = throughput_ccdf(sc, cfg.throughput_grid_bps, table, S_bar=s_bar)
    extra = time.perf_counter() - t0
    per_unit = [s + extra / len(per_unit) for s in per_unit]
    return CcdfCurve(sinr.thresholds, sinr.ccdf), thr, per_unit


def run_hybrid(cfg: ExperimentConfig, density: float, radio: RadioConfig,
               table: RateTable = RateTable(), t: FrameTimings = FrameTimings()):
    side = area_side_for(cfg.area_km2)

    def one(r):
        dep, _ = _deployment_for(density, side, realization_seed(cfg.seed, r), radio)
        t0 = time.perf_counter()
        cols = evaluate_hybrid_arrays(dep, radio, table, t)
        dt = time.perf_counter() - t0
        keep = cols["inner_flag"]
        return cols["sinr_db"][keep], cols["throughput_bps"][keep], dt

    res = _map_ordered(one, range(cfg.realizations), cfg.workers)
    return _pool(cfg, res)


def run_des_model(cfg: ExperimentConfig, density: float, radio: RadioConfig,
                  table: RateTable = RateTable(), t: FrameTimings = FrameTimings()):
    side = area_side_for(cfg.area_km2)

    def one(r):
        dep, seed = _deployment_for(density, side, realization_seed(cfg.seed, r), radio)
        t0 = time.perf_counter()
        links = run_des(dep, radio, DesConfig(cfg.sim_duration_s, t, table, rng_seed=seed))
        dt = time.perf_counter() - t0
        inner = [s for s in links if s.inner_flag]
        return (np.array([s.mean_rx_sinr_db for s in inner]),
                np.array([s.throughput_bps for s in inner]), dt)

    res = _map_ordered(one, range(cfg.realizations), cfg.workers)
    return _pool(cfg, res)


def _pool(cfg, res):
    sinr = np.concatenate([r[0] for r in res]) if res else np.zeros(0)
    thr = np.concatenate([r[1] for r in res]) if res else np.zeros(0)
    if sinr.size == 0:
        log.warning("no inner links across %d realizations", cfg.realizations)
    return (empirical_ccdf(sinr, cfg.sinr_grid_db), empirical_ccdf(thr, cfg.throughput_grid_bps),
            [r[2] for r in res])


def _check_output_dir(path: Path) -> None:
    try:
        path.mkdir(parents=True, exist_ok=True)
        probe = path / ".write_probe"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise OSError(f"output directory {path} is not writable: {exc}") from exc


def run_experiment(cfg: ExperimentConfig, write: bool = True) -> ExperimentResult:
    """Run one model over every (density, CST) pair and write curve and timing CSVs.

    Realization ``i`` uses seed ``cfg.seed + i``; curves pool the inner links of
    all realizations. Curve files carry no timing data, so reruns are
    byte-identical.
    """
    out = Path(cfg.output_dir)
    if write:
        _check_output_dir(out)
    result = ExperimentResult()
    note = f"workers={cfg.workers}; cpu_count={os.cpu_count()}"
    for cst in cfg.csts:
        radio = RadioConfig().with_cst(cst)
        for density in cfg.densities:
            if cfg.model in ("sgm", "sgm_enhanced"):
                sinr, thr, per_unit = run_sgm(cfg, density, radio, enhanced=cfg.model == "sgm_enhanced")
            elif cfg.model == "hybrid":
                sinr, thr, per_unit = run_hybrid(cfg, density, radio)
            else:
                sinr, thr, per_unit = run_des_model(cfg, density, radio)
            rep = TimingReport(cfg.model, density, cst, per_unit, note)
            result.curves[(density, cst)] = (sinr, thr)
            result.timings[(density, cst)] = rep
            log.info("%s d=%g cst=%g: %.3f s", cfg.model, density, cst, rep.total_seconds)
            if write:
                meta = {"model": cfg.model, "density": _num(density), "cst": _num(cst),
                        "realizations": cfg.realizations, "seed": cfg.seed}
                if cfg.model.startswith("sgm"):
                    meta.update(outer_points=cfg.sgm_outer_points, field_radial=cfg.sgm_field_radial,
                                field_angular=cfg.sgm_field_angular)
                else:
                    meta.update(area_km2=cfg.area_km2)
                    if cfg.model == "des":
                        meta.update(sim_duration_s=cfg.sim_duration_s)
                for kind, curve in (("sinr", sinr), ("throughput", thr)):
                    p = out / curve_filename(cfg.model, kind, density, cst)
                    curve.to_csv(p, {**meta, "metric": kind})
                    result.files.append(p)
                p = out / curve_filename(cfg.model, "timing", density, cst)
                rep.to_csv(p)
                result.files.append(p)
    return result


def config_dict(cfg: ExperimentConfig) -> dict:
    d = asdict(cfg)
    d["densities"], d["csts"] = list(cfg.densities), list(cfg.csts)
    return d


def with_overrides(cfg: ExperimentConfig, **kw) -> ExperimentConfig:
    return replace(cfg, **{k: v for k, v in kw.items() if v is not None})
