"""Capacity estimators for dense CSMA/CA networks.

Three estimators share one deployment and PHY description: an analytic
stochastic-geometry model, a per-link hybrid model over the actual
deployment, and a discrete-event simulator used as ground truth.
"""

from .bianchi import BianchiInputs, NumericalFailure, mac_efficiency, single_rate_timings, solve_tau
from .curves import CcdfCurve, compare_curves, empirical_ccdf
from .des import DesConfig, DesLinkStats, SimulationError, des_ccdfs, run_des, run_des_result
from .geometry import (
    Deployment,
    EmptyRealization,
    RadioConfig,
    build_deployment,
    export_deployment,
    import_deployment,
    make_deployment,
    noise_power,
    pathloss,
)
from .harness import ExperimentConfig, TimingReport, run_experiment
from .hybrid import LinkMetrics, airtime, evaluate_hybrid, link_sinr
from .phy import FrameTimings, NoLinkError, RateTable, frame_duration, inv_rate, rate_of_sinr
from .sgm import SgmConfig, map_tagged, map_typical, rate_coverage, sinr_coverage

__all__ = [
    "BianchiInputs", "CcdfCurve", "Deployment", "DesConfig", "DesLinkStats", "EmptyRealization",
    "ExperimentConfig", "FrameTimings", "LinkMetrics", "NoLinkError", "NumericalFailure",
    "RadioConfig", "RateTable", "SgmConfig", "SimulationError", "TimingReport", "airtime",
    "build_deployment", "compare_curves", "des_ccdfs", "empirical_ccdf", "evaluate_hybrid",
    "export_deployment", "frame_duration", "import_deployment", "inv_rate", "link_sinr",
    "mac_efficiency", "make_deployment", "map_tagged", "map_typical", "noise_power", "pathloss",
    "rate_coverage", "rate_of_sinr", "run_des", "run_des_result", "run_experiment",
    "single_rate_timings", "sinr_coverage", "solve_tau",
]
