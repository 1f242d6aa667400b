"""Change-point detection and localization in partially observed dynamic networks."""

from .cusum import CusumProcess, cusum_norms, mu_profile, q_weight, z_matrix
from .detect import (
    C_STAR,
    TestConfig,
    TestVerdict,
    distortion,
    dyadic_grid,
    enr,
    lower_bound_constant,
    make_grid,
    run_test,
    theoretical_boundary,
    threshold_practical_grid,
    threshold_practical_known_tau,
    threshold_theoretical,
)
from .errors import ConvergenceError, ValidationError
from .generators import SamplingModel, Scenario, sample_network, simulate
from .graph_core import (
    DynamicNetwork,
    ProbMatrix,
    SnapshotGraph,
    estimate_kappa,
    estimate_omega,
    read_csv,
    read_edge_dir,
    write_csv,
    write_edge_dir,
)
from .graphon import NodeSchedule, SmoothGraphon, StepGraphon, graphon_test, sample_graphon_network
from .harness import ExperimentSpec, run_power_sweep, run_risk_heatmap
from .ingest import IngestionSpec, ingest_edge_list
from .localize import LocalizationResult, estimate_cp, localization_bound, localization_risk
from .spectral import SpectralConfig, op_norm

__version__ = "0.1.0"
