"""How much channel time a saturated contention domain keeps for payload."""

from csmabench import DesConfig, RadioConfig, make_deployment, mac_efficiency, run_des, single_rate_timings, solve_tau

import numpy as np

for n in (1, 2, 5, 10, 20):
    print(f"n={n:>2}  tau={solve_tau(n):.4f}  "
          + "  ".join(f"S({r / 1e6:g})={mac_efficiency(single_rate_timings(r, n)):.3f}" for r in (6.5e6, 39e6, 78e6)))

# at high rates a single station wastes most of its time in backoff;
# a second contender fills some of that idle time
radio = RadioConfig()
for n in (2, 5, 10):
    aps = np.c_[np.arange(n), np.zeros(n)]
    dep = make_deployment(aps, aps + [0, 5], radio, association=np.arange(n))
    stats = run_des(dep, radio, DesConfig(sim_duration_s=5.0, fixed_rate_bps=78e6, rng_seed=n))
    sim = sum(s.phy_bits for s in stats) / 5.0 / 78e6
    print(f"{n:>2} APs in range: simulated channel share {sim:.3f}, "
          f"analytic {mac_efficiency(single_rate_timings(78e6, n)):.3f}")
