"""Disturbance detection, localization and identification on networked
wave dynamics.

The package models a transmission network as an undirected graph whose
vertex states obey the damped second-order flow

    x'' + eta x' - L x = F(t),

with L the graph Laplacian.  From observations on a subset of vertices
it reconstructs the healthy evolution, detects the onset of an unknown
disturbance, localizes the vertices hosting it, and identifies the
forcing profile itself.
"""

from .config import ScenarioConfig, load_config
from .detection import DetectionReport, detect
from .dynamics import (
    DisturbanceProfile,
    Observations,
    StateTrajectory,
    TimeGrid,
    generate_observations,
    simulate_forward,
)
from .errors import (
    ConfigError,
    GridtraceError,
    NotAbsorbentError,
    NotStrategicError,
    NumericalError,
    PreconditionError,
)
from .graphs import (
    Graph,
    VertexPartition,
    find_absorbent_set,
    find_joints,
    is_absorbent,
    is_dominantly_absorbent,
    laplacian,
    laplacian_submatrix,
)
from .healthy import HealthyFit, compute_healthy_state, identify_initial_conditions
from .identification import IdentificationResult, LocalizationResult, identify
from .pipeline import (
    run_analyze_graph,
    run_detect,
    run_find_absorbent,
    run_identify,
    run_reproduce,
    run_simulate,
)
from .spectral import SpectralDecomposition, decompose, is_strategic

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DetectionReport",
    "DisturbanceProfile",
    "Graph",
    "GridtraceError",
    "HealthyFit",
    "IdentificationResult",
    "LocalizationResult",
    "NotAbsorbentError",
    "NotStrategicError",
    "NumericalError",
    "Observations",
    "PreconditionError",
    "ScenarioConfig",
    "SpectralDecomposition",
    "StateTrajectory",
    "TimeGrid",
    "VertexPartition",
    "compute_healthy_state",
    "decompose",
    "detect",
    "find_absorbent_set",
    "find_joints",
    "generate_observations",
    "identify",
    "identify_initial_conditions",
    "is_absorbent",
    "is_dominantly_absorbent",
    "is_strategic",
    "laplacian",
    "laplacian_submatrix",
    "load_config",
    "run_analyze_graph",
    "run_detect",
    "run_find_absorbent",
    "run_identify",
    "run_reproduce",
    "run_simulate",
    "simulate_forward",
    "__version__",
]
