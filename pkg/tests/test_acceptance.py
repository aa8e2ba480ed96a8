"""End-to-end acceptance checks; each prints one PASS/FAIL line in the session summary."""

import time
from dataclasses import replace

import numpy as np
import pytest

from oracles import matern_thinning
from csmabench.bianchi import mac_efficiency, single_rate_timings, solve_tau
from csmabench.curves import CcdfCurve, compare_curves
from csmabench.des import DesConfig, run_des
from csmabench.geometry import RadioConfig, area_side_for, build_deployment, make_deployment
from csmabench.harness import ExperimentConfig, run_experiment
from csmabench.hybrid import evaluate_hybrid, link_sinr
from csmabench.sgm import SgmConfig, check_refinement, rate_coverage, sinr_ccdf, sinr_coverage

DENSITIES = (500.0, 1000.0, 5000.0, 10000.0)
REALIZATIONS = 50
SIM_SECONDS = 10.0
LO, HI = 4.0, 27.0

RESULTS: list[str] = []


def report(name, ok, detail):
    RESULTS.append(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
    assert ok, detail


def pp(a, b):
    return compare_curves(a, b, lo=LO, hi=HI)


@pytest.fixture(scope="module")
def runs(tmp_path_factory):
    out = tmp_path_factory.mktemp("acceptance")
    base = dict(realizations=REALIZATIONS, sim_duration_s=SIM_SECONDS, seed=0)
    res = {}
    for model in ("sgm", "sgm_enhanced", "hybrid", "des"):
        res[model] = {}
        for dens, csts in ((DENSITIES, (-82.0,)), ((5000.0,), (-72.0, -62.0))):
            if model == "sgm_enhanced" and csts != (-82.0,):
                continue
            r = run_experiment(ExperimentConfig(model=model, densities=dens, csts=csts,
                                                output_dir=str(out / model), **base))
            res[model].update({k: (v, r.timings[k]) for k, v in r.curves.items()})
    res["dir"] = out
    return res


def test_c1_sgm_coverage_anchor():
    cfg = SgmConfig(5e-4, RadioConfig())
    t0 = time.perf_counter()
    v = sinr_coverage(4.0, cfg)
    dt = time.perf_counter() - t0
    report("C1 SGM coverage at 4 dB, 500/km2", abs(v - 0.45) <= 0.07 and dt < 300,
           f"coverage={v:.4f} (target 0.45 +/- 0.07), {dt:.3f} s per threshold (limit 300 s)")


def test_c2_sgm_max_throughput_anchor():
    cfg = SgmConfig(5e-4, RadioConfig())
    lo, hi = 0.0, 100e6
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if rate_coverage(mid, cfg) > 0 else (lo, mid)
    top = lo / 1e6
    report("C2 SGM maximum throughput, 500/km2", abs(top - 52.0) <= 8.0,
           f"largest rho with nonzero coverage={top:.2f} Mbps (target 52 +/- 8)")


def test_c3_lower_bound(runs):
    worst = []
    for d in DENSITIES:
        sgm = runs["sgm"][(d, -82.0)][0][0]
        des = runs["des"][(d, -82.0)][0][0]
        x = sgm.thresholds[(sgm.thresholds >= LO) & (sgm.thresholds <= HI)]
        worst.append((sgm.at(x) - des.at(x)).max() * 100)
    ok = all(w <= 0 for w in worst)
    report("C3 SGM SINR CCDF <= DES on [4,27] dB", ok,
           "max(SGM-DES) pp per density " + ", ".join(f"{d:g}:{w:+.2f}" for d, w in zip(DENSITIES, worst)))


def test_c4_hybrid_accuracy(runs):
    gaps = {}
    for key in [(d, -82.0) for d in DENSITIES] + [(5000.0, -72.0), (5000.0, -62.0)]:
        gaps[key] = pp(runs["hybrid"][key][0][0], runs["des"][key][0][0])
    ok = all(gaps[(d, -82.0)] <= 10 for d in DENSITIES) and all(gaps[(5000.0, c)] <= 20 for c in (-72.0, -62.0))
    report("C4 hybrid vs DES SINR CCDF", ok,
           "pp " + ", ".join(f"{d:g}/{c:g}:{g:.2f}" for (d, c), g in gaps.items())
           + " (limits 10 at -82, 20 at -72/-62)")


def test_c5_cst_trend(runs):
    gaps = [pp(runs["sgm"][(5000.0, c)][0][0], runs["des"][(5000.0, c)][0][0]) for c in (-82.0, -72.0, -62.0)]
    ok = gaps[0] < gaps[1] < gaps[2] and gaps[2] >= 25
    report("C5 SGM-vs-DES gap grows with CST at 5000/km2", ok,
           "pp at -82/-72/-62: " + "/".join(f"{g:.2f}" for g in gaps) + " (need increasing, last >= 25)")


def test_c6_enhanced_ordering(runs):
    def gaps(d):
        des = runs["des"][(d, -82.0)][0][1]
        raw = runs["sgm"][(d, -82.0)][0][1]
        enh = runs["sgm_enhanced"][(d, -82.0)][0][1]
        return compare_curves(raw, des), compare_curves(enh, des)

    raw_hi, enh_hi = gaps(10000.0)
    raw_lo, enh_lo = gaps(500.0)
    ok = enh_hi < raw_hi and raw_lo - enh_lo < 5
    report("C6 enhanced SGM throughput ordering", ok,
           f"10000/km2 raw={raw_hi:.2f} enhanced={enh_hi:.2f} pp; 500/km2 improvement={raw_lo - enh_lo:.2f} pp (< 5)")


def test_c7_timing(runs):
    ratios = []
    for d in DENSITIES:
        h = runs["hybrid"][(d, -82.0)][1].total_seconds
        s = runs["sgm"][(d, -82.0)][1].total_seconds
        ratios.append(h / s)
    # per-threshold cost: best of three sweeps, so scheduler noise does not masquerade as a trend
    grid = np.linspace(-10, 40, 60)
    cfg = SgmConfig(1e-3, RadioConfig())
    secs = np.min([sinr_ccdf(cfg, grid).seconds for _ in range(3)], axis=0)
    spread = np.abs(secs / np.median(secs) - 1).max()
    order = all(runs["hybrid"][(d, -82.0)][1].total_seconds < runs["sgm"][(d, -82.0)][1].total_seconds
                < runs["des"][(d, -82.0)][1].total_seconds for d in (5000.0, 10000.0))
    ok = max(ratios) <= 0.1 and spread <= 0.3 and order
    report("C7 computation time", ok,
           "hybrid/SGM " + ", ".join(f"{d:g}:{r:.4f}" for d, r in zip(DENSITIES, ratios))
           + f" (<= 0.1); SGM per-threshold spread {spread * 100:.1f}% (<= 30%); hybrid<SGM<DES at >=5000: {order}")


def test_c8_property_suite(runs):
    radio = RadioConfig()
    notes, ok = [], True
    typ, _ = matern_thinning(5e-4, radio, seed=21)
    rel = abs(SgmConfig(5e-4, radio).p_map / typ - 1)
    ok &= rel < 0.02
    notes.append(f"MAP vs thinning {rel * 100:.2f}%")

    diffs = [abs(np.subtract(*check_refinement(T, SgmConfig(lam, radio)))) for lam in (5e-4, 1e-2) for T in (4.0, 20.0)]
    ok &= max(diffs) < 1e-3
    notes.append(f"refinement {max(diffs):.1e}")

    res = []
    for n in (2, 5, 10, 50):
        tau = solve_tau(n)
        p = 1 - (1 - tau) ** (n - 1)
        res.append(abs(tau - 2 * (1 - 2 * p) / ((1 - 2 * p) * 17 + p * 16 * (1 - (2 * p) ** 6))))
    ok &= max(res) < 1e-9 and solve_tau(1) == 2 / 17
    notes.append(f"tau residual {max(res):.1e}")

    def clique(n):
        aps = np.c_[np.arange(n) * 1.0, np.zeros(n)]
        return make_deployment(aps, aps + [0.0, 5.0], radio, association=np.arange(n))

    air = max(abs(sum(m.airtime for m in evaluate_hybrid(clique(n), radio)) - 1) for n in (2, 3, 5, 10))
    ok &= air <= 1e-12
    notes.append(f"airtime conservation {air:.1e}")

    eq5 = True
    for seed in range(10):
        dep = build_deployment(5e-3, area_side_for(0.05), seed, radio)
        eq5 &= all(m.throughput_bps == m.mac_eff * m.airtime * m.phy_rate_bps for m in evaluate_hybrid(dep, radio))
    ok &= eq5
    notes.append(f"throughput identity {eq5}")

    worst = 0.0
    for n in (2, 5, 10):
        stats = run_des(clique(n), radio, DesConfig(sim_duration_s=20.0, rng_seed=n, fixed_rate_bps=78e6))
        got = np.mean([s.phy_bits for s in stats]) / 20.0
        want = mac_efficiency(single_rate_timings(78e6, n)) * 78e6 / n
        worst = max(worst, abs(got / want - 1))
    ok &= worst < 0.07
    notes.append(f"DES clique vs S*rho/n {worst * 100:.1f}%")

    dep = build_deployment(3e-3, area_side_for(0.05), 2, radio)
    u = 0
    x = dep.association[u]
    mono = True
    for z in np.flatnonzero(~dep.sensing_adj[x])[:10]:
        if z == x:
            continue
        pl = dep.pathloss_db.copy()
        pl[z, dep.user_node(u)] = pl[dep.user_node(u), z] = 400.0
        mono &= link_sinr(u, replace(dep, pathloss_db=pl), radio) >= link_sinr(u, dep, radio)
    ok &= mono
    notes.append(f"interferer removal monotone {mono}")

    curves = list(runs["dir"].rglob("*_sinr_*.csv")) + list(runs["dir"].rglob("*_throughput_*.csv"))
    proper = all(np.all(np.diff(CcdfCurve.from_csv(p).ccdf) <= 0) for p in curves)
    ok &= proper
    notes.append(f"{len(curves)} emitted curves monotone {proper}")
    report("C8 property suite", bool(ok), "; ".join(notes))
