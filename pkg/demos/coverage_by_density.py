"""Analytic SINR coverage and medium access as the network gets denser."""

import numpy as np

from csmabench import RadioConfig, SgmConfig, map_tagged, map_typical, sinr_coverage

radio = RadioConfig(cst_dbm=-82.0)
thresholds = [0.0, 4.0, 10.0, 20.0, 27.0]

print("APs/km2   p_typ   p_tag   " + "  ".join(f"{t:>5.0f}dB" for t in thresholds))
for per_km2 in (500, 1000, 5000, 10000):
    cfg = SgmConfig(per_km2 * 1e-6, radio)
    cov = [sinr_coverage(t, cfg) for t in thresholds]
    print(f"{per_km2:>7}   {map_typical(cfg):.3f}   {map_tagged(cfg):.3f}   "
          + "  ".join(f"{c:7.3f}" for c in cov))

# denser networks: fewer APs win the channel, but the ones that do see closer users
# and a sparser set of active interferers, so coverage at 4 dB goes up
cfg = SgmConfig(5e-4, radio)
print("\nlargest supported throughput at 500/km2: %.1f Mbps" % (map_tagged(cfg) * 78))

# a less sensitive carrier sense lets more neighbours transmit at once
for cst in (-82.0, -72.0, -62.0):
    cfg = SgmConfig(5e-3, radio.with_cst(cst))
    print(f"CST {cst:5.0f} dBm: P(SINR > 4 dB) = {sinr_coverage(4.0, cfg):.3f}")

curve = np.array([sinr_coverage(t, SgmConfig(1e-3, radio)) for t in np.linspace(-10, 40, 11)])
assert np.all(np.diff(curve) <= 0)
