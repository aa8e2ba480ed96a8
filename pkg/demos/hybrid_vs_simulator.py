"""Per-link hybrid estimates next to the packet-level simulator on the same deployments."""

import numpy as np

from csmabench import DesConfig, RadioConfig, build_deployment, compare_curves, empirical_ccdf, run_des
from csmabench.geometry import area_side_for
from csmabench.hybrid import evaluate_hybrid_arrays

radio = RadioConfig(cst_dbm=-82.0)
side = area_side_for(0.05)
grid = np.linspace(4, 27, 47)
realizations = 10

for per_km2 in (500, 5000):
    hyb, sim = [], []
    for seed in range(realizations):
        dep = build_deployment(per_km2 * 1e-6, side, seed, radio)
        cols = evaluate_hybrid_arrays(dep, radio)
        hyb += list(cols["sinr_db"][cols["inner_flag"]])
        stats = run_des(dep, radio, DesConfig(sim_duration_s=2.0, rng_seed=seed))
        sim += [s.mean_rx_sinr_db for s in stats if s.inner_flag]
    a, b = empirical_ccdf(hyb, grid), empirical_ccdf(sim, grid)
    print(f"{per_km2:>5} APs/km2: {len(hyb)} inner links, "
          f"P(SINR>4dB) hybrid {a.ccdf[0]:.2f} simulator {b.ccdf[0]:.2f}, "
          f"max gap {compare_curves(a, b):.1f} pp")

# one small deployment in detail
dep = build_deployment(2e-3, side, 3, radio)
cols = evaluate_hybrid_arrays(dep, radio)
stats = run_des(dep, radio, DesConfig(sim_duration_s=2.0, rng_seed=3))
print("\nap  sensed  hybrid_dB  sim_dB  hybrid_Mbps  sim_Mbps")
for k in np.argsort(cols["sinr_db"])[:8]:
    s = stats[k]
    print(f"{cols['ap_id'][k]:>2}  {dep.n_sensed[cols['ap_id'][k]]:>6}  {cols['sinr_db'][k]:9.1f}  "
          f"{s.mean_rx_sinr_db:6.1f}  {cols['throughput_bps'][k] / 1e6:11.2f}  {s.throughput_bps / 1e6:8.2f}")
