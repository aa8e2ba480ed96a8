"""PPP deployments, path loss, association, carrier-sense graphs and the inner analysis region.

Node indexing convention: the path-loss matrix covers all nodes, APs first
(``0..n_aps-1``) followed by users (``n_aps..n_aps+n_users-1``).
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

log = logging.getLogger(__name__)

MIN_SEPARATION_M = 0.1


class EmptyRealization(RuntimeError):
    """A sampled deployment has no APs (or none in the analysis region)."""


def db2lin(x):
    return np.power(10.0, np.asarray(x, dtype=float) / 10.0)


def lin2db(x):
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class RadioConfig:
    """Every physical constant of the link budget."""

    tx_power_dbm: float = 23.0
    cst_dbm: float = -82.0
    noise_psd_dbmhz: float = -174.0
    noise_figure_db: float = 15.0
    bandwidth_hz: float = 20e6
    pathloss_exponent: float = 4.0
    # free-space loss at 1 m, 5.2 GHz
    pathloss_ref_db: float = 46.7

    def __post_init__(self):
        if not self.tx_power_dbm > self.cst_dbm:
            raise ValueError("transmit power must exceed the carrier sense threshold")
        if not self.bandwidth_hz > 0:
            raise ValueError("bandwidth must be positive")
        if not self.pathloss_exponent > 2:
            raise ValueError("path-loss exponent must exceed 2")

    def with_cst(self, cst_dbm: float) -> "RadioConfig":
        return replace(self, cst_dbm=cst_dbm)

    @property
    def tx_power_mw(self) -> float:
        return float(db2lin(self.tx_power_dbm))

    @property
    def cst_mw(self) -> float:
        return float(db2lin(self.cst_dbm))

    @property
    def noise_mw(self) -> float:
        return float(db2lin(noise_power(self)))

    def pathloss_lin(self, distance_m):
        """Linear path loss ``l(d)``; the inverse of the channel power gain."""
        d = np.maximum(np.asarray(distance_m, dtype=float), MIN_SEPARATION_M)
        return 10.0 ** (self.pathloss_ref_db / 10.0) * d ** self.pathloss_exponent


def pathloss(distance_m, cfg: RadioConfig = RadioConfig()):
    """Log-distance path loss in dB; distances below 0.1 m are clamped."""
    d = np.maximum(np.asarray(distance_m, dtype=float), MIN_SEPARATION_M)
    out = cfg.pathloss_ref_db + 10.0 * cfg.pathloss_exponent * np.log10(d)
    return float(out) if np.ndim(out) == 0 else out


def noise_power(cfg: RadioConfig = RadioConfig()) -> float:
    """Thermal noise over the channel bandwidth plus noise figure, in dBm."""
    return cfg.noise_psd_dbmhz + 10.0 * math.log10(cfg.bandwidth_hz) + cfg.noise_figure_db


@dataclass(frozen=True)
class Deployment:
    ap_positions: np.ndarray
    user_positions: np.ndarray
    # association[u] = AP index serving user u
    association: np.ndarray
    area_side_m: float
    pathloss_db: np.ndarray | None = None
    sensing_adj: np.ndarray | None = None
    inner_mask: np.ndarray | None = None
    cst_dbm: float | None = field(default=None, compare=False)

    @property
    def n_aps(self) -> int:
        return len(self.ap_positions)

    @property
    def n_users(self) -> int:
        return len(self.user_positions)

    def user_node(self, u: int) -> int:
        return self.n_aps + u

    @property
    def ap_user(self) -> np.ndarray:
        """Per AP, the index of its user or -1."""
        out = np.full(self.n_aps, -1, dtype=int)
        out[self.association] = np.arange(self.n_users)
        return out

    @property
    def n_sensed(self) -> np.ndarray:
        """``|A_x|`` for every AP."""
        return np.diff(self.neighbors[0])

    @cached_property
    def neighbors(self) -> tuple[np.ndarray, np.ndarray]:
        """Sensing sets in CSR form ``(indptr, indices)``."""
        return csr_neighbors(self.sensing_adj)

    @cached_property
    def ap_user_loss_lin(self) -> np.ndarray:
        return db2lin(self.ap_user_loss_db())

    def precompute(self) -> "Deployment":
        """Materialise the cached neighbour lists and linear losses."""
        self.neighbors
        self.ap_user_loss_lin
        return self

    def ap_ap_loss_db(self) -> np.ndarray:
        return self.pathloss_db[: self.n_aps, : self.n_aps]

    def ap_user_loss_db(self) -> np.ndarray:
        """Loss between every AP (rows) and every user (columns)."""
        return self.pathloss_db[: self.n_aps, self.n_aps :]


def csr_neighbors(adj) -> tuple[np.ndarray, np.ndarray]:
    adj = np.asarray(adj, dtype=bool)
    ptr = np.concatenate(([0], np.cumsum(adj.sum(axis=1)))).astype(np.int64)
    idx = np.nonzero(adj)[1].astype(np.int64)
    return ptr, idx


def inner_region_mask(points: np.ndarray, area_side_m: float) -> np.ndarray:
    """True for points in the central ninth of the square ``[0, side]^2``."""
    lo, hi = area_side_m / 3.0, 2.0 * area_side_m / 3.0
    p = np.asarray(points, dtype=float).reshape(-1, 2)
    return np.all((p >= lo) & (p <= hi), axis=1)


def _users_one_per_cell(aps: np.ndarray, side: float, rng: np.random.Generator) -> np.ndarray:
    # Uniform point inside each AP's Voronoi cell (clipped to the square), by rejection.
    n = len(aps)
    users = np.empty((n, 2))
    filled = np.zeros(n, dtype=bool)
    tree = cKDTree(aps)
    batch = max(256, 8 * n)
    while not filled.all():
        cand = rng.uniform(0.0, side, size=(batch, 2))
        _, owner = tree.query(cand)
        # first candidate landing in each still-empty cell
        owners, first = np.unique(owner, return_index=True)
        take = ~filled[owners]
        users[owners[take]] = cand[first[take]]
        filled[owners[take]] = True
    return users


def sample_ppp(density: float, area_side_m: float, rng_seed: int) -> Deployment:
    """Sample AP positions from a PPP on the square and attach one user per AP.

    Each user is uniform within its AP's cell, so it is associated to its
    nearest AP. Raises :class:`EmptyRealization` when no AP is drawn.
    """
    if not density > 0 or not area_side_m > 0:
        raise ValueError("density and area side must be positive")
    rng = np.random.default_rng(rng_seed)
    n = rng.poisson(density * area_side_m**2)
    if n == 0:
        raise EmptyRealization(f"no APs drawn (seed={rng_seed})")
    aps = rng.uniform(0.0, area_side_m, size=(n, 2))
    users = _users_one_per_cell(aps, area_side_m, rng)
    return Deployment(aps, users, np.arange(n), float(area_side_m))


def nearest_ap(dep: Deployment) -> np.ndarray:
    """Nearest AP of every user; ties go to the lowest AP index."""
    d = np.linalg.norm(dep.user_positions[:, None, :] - dep.ap_positions[None, :, :], axis=2)
    return np.argmin(d, axis=1)


def compute_pathloss(dep: Deployment, cfg: RadioConfig) -> Deployment:
    nodes = np.vstack([dep.ap_positions, dep.user_positions.reshape(-1, 2)])
    d = np.linalg.norm(nodes[:, None, :] - nodes[None, :, :], axis=2)
    pl = pathloss(d, cfg)
    np.fill_diagonal(pl, 0.0)
    return replace(dep, pathloss_db=pl)


def build_sensing_graph(dep: Deployment, cfg: RadioConfig) -> Deployment:
    """Fill the AP-AP carrier-sense adjacency from the path-loss matrix (no fading)."""
    if dep.pathloss_db is None:
        raise ValueError("path-loss matrix not populated")
    rx = cfg.tx_power_dbm - dep.ap_ap_loss_db()
    adj = rx >= cfg.cst_dbm
    adj = adj & adj.T
    np.fill_diagonal(adj, False)
    return replace(dep, sensing_adj=adj, cst_dbm=cfg.cst_dbm)


def build_deployment(density: float, area_side_m: float, rng_seed: int, cfg: RadioConfig) -> Deployment:
    """Sample, compute losses, sensing graph and inner mask in one go."""
    dep = sample_ppp(density, area_side_m, rng_seed)
    dep = compute_pathloss(dep, cfg)
    dep = build_sensing_graph(dep, cfg)
    inner = inner_region_mask(dep.ap_positions, area_side_m)
    if not inner.any():
        log.info("seed %d: no AP in the inner region", rng_seed)
    return replace(dep, inner_mask=inner).precompute()


def make_deployment(ap_positions, user_positions, cfg: RadioConfig, association=None,
                    area_side_m: float | None = None) -> Deployment:
    """Deployment from explicit coordinates; users go to their nearest AP unless ``association`` is given."""
    aps = np.asarray(ap_positions, dtype=float).reshape(-1, 2)
    users = np.asarray(user_positions, dtype=float).reshape(-1, 2)
    if len(aps) == 0:
        raise EmptyRealization("no APs")
    side = float(area_side_m) if area_side_m is not None else float(np.vstack([aps, users]).max()) * 1.0 + 1.0
    dep = Deployment(aps, users, np.zeros(len(users), dtype=int), side)
    assoc = nearest_ap(dep) if association is None else np.asarray(association, dtype=int)
    if len(set(assoc.tolist())) != len(assoc):
        raise ValueError("at most one user per AP is supported")
    dep = replace(dep, association=assoc)
    dep = build_sensing_graph(compute_pathloss(dep, cfg), cfg)
    inner = np.ones(len(aps), dtype=bool) if area_side_m is None else inner_region_mask(aps, side)
    return replace(dep, inner_mask=inner).precompute()


def area_side_for(area_km2: float) -> float:
    return math.sqrt(area_km2 * 1e6)


def export_deployment(dep: Deployment, out_dir: str | Path) -> tuple[Path, Path]:
    """Write ``nodes.csv`` and ``pathloss.csv`` (upper triangle, i < j)."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    inner = dep.inner_mask if dep.inner_mask is not None else inner_region_mask(dep.ap_positions, dep.area_side_m)
    nodes_path, pl_path = out / "nodes.csv", out / "pathloss.csv"
    with open(nodes_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["id", "kind", "x_m", "y_m", "assoc_id", "inner_flag"])
        for i, (x, y) in enumerate(dep.ap_positions):
            w.writerow([i, "ap", repr(float(x)), repr(float(y)), -1, int(inner[i])])
        for u, (x, y) in enumerate(dep.user_positions):
            a = int(dep.association[u])
            w.writerow([dep.user_node(u), "user", repr(float(x)), repr(float(y)), a, int(inner[a])])
    pl = dep.pathloss_db
    iu, ju = np.triu_indices(len(pl), k=1)
    with open(pl_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["i", "j", "loss_db"])
        for i, j, v in zip(iu, ju, pl[iu, ju]):
            w.writerow([int(i), int(j), repr(float(v))])
    return nodes_path, pl_path


def import_deployment(in_dir: str | Path, cfg: RadioConfig, area_side_m: float | None = None) -> Deployment:
    """Read a deployment written by :func:`export_deployment` (or an external tool).

    Path losses come from the file; the sensing graph is rebuilt for ``cfg``.
    """
    src = Path(in_dir)
    aps, users, assoc, inner = [], [], [], []
    ids = {}
    with open(src / "nodes.csv", newline="") as fh:
        for rec in csv.DictReader(fh):
            kind = rec["kind"].strip()
            xy = (float(rec["x_m"]), float(rec["y_m"]))
            if kind == "ap":
                ids[int(rec["id"])] = ("ap", len(aps))
                aps.append(xy)
                inner.append(bool(int(rec["inner_flag"])))
            elif kind == "user":
                ids[int(rec["id"])] = ("user", len(users))
                users.append(xy)
                assoc.append(int(rec["assoc_id"]))
            else:
                raise ValueError(f"unknown node kind {kind!r}")
    if not aps:
        raise EmptyRealization("deployment file has no APs")
    n_ap, n_u = len(aps), len(users)

    def node_index(raw: int) -> int:
        kind, k = ids[raw]
        return k if kind == "ap" else n_ap + k

    assoc_idx = np.array([ids[a][1] for a in assoc], dtype=int)
    if len(set(assoc_idx.tolist())) != len(assoc_idx):
        raise ValueError("at most one user per AP is supported")
    pl = np.zeros((n_ap + n_u, n_ap + n_u))
    with open(src / "pathloss.csv", newline="") as fh:
        for rec in csv.DictReader(fh):
            i, j = node_index(int(rec["i"])), node_index(int(rec["j"]))
            pl[i, j] = pl[j, i] = float(rec["loss_db"])
    ap_arr = np.array(aps, dtype=float)
    user_arr = np.array(users, dtype=float).reshape(-1, 2)
    side = area_side_m if area_side_m is not None else float(max(ap_arr.max(), user_arr.max(initial=0.0)))
    dep = Deployment(ap_arr, user_arr, assoc_idx, side, pathloss_db=pl, inner_mask=np.array(inner))
    return build_sensing_graph(dep, cfg).precompute()
