"""Two-cell MIMO downlink simulator: cooperative interference alignment and baselines.

Two base stations each serve K users over N x M MIMO links while interfering
with the other cell. The package implements a receive-side alignment that
collapses the K cross-cell interference channels seen by each cell into a
single direction, transmit zero-forcing on the compressed constraint set,
three reference schemes, a message-level CSI exchange simulation with
feedback accounting, and a Monte Carlo harness for ergodic sum rate and
degrees-of-freedom estimates. See the ``twocell-ia`` CLI for the experiment
runner.
"""

from .align import (
    AlignmentSolution,
    BeamformerSet,
    FeasibilityResult,
    check_feasibility,
    design_precoders,
    run_proposed_scheme,
    solve_alignment,
)
from .baselines import (
    SCHEME_NAMES,
    czf_dof,
    run_coordinated_zf,
    run_percell_zf,
    run_subspace_ia_proxy,
    scheme_runner,
    scheme_supported,
)
from .errors import (
    DegenerateRealizationError,
    InfeasibleConfigError,
    InfeasibleRealizationError,
    InvalidInputError,
    LocalityViolationError,
    TwoCellIAError,
)
from .exchange import (
    FeedbackReport,
    KnowledgeSet,
    Message,
    feedback_count,
    format_trace,
    simulate_exchange,
    tally_feedback,
)
from .linalg import (
    DEFAULT_TOL,
    ToleranceConfig,
    collinearity_angle,
    null_space_basis,
    numeric_rank,
    project_residual,
)
from .metrics import (
    DOF_WINDOW_DB,
    MonteCarloRate,
    RateReport,
    SlopeEstimate,
    compute_rates,
    ergodic_sum_rate,
    estimate_dof,
    interference_leakage,
)
from .scenario import (
    ChannelSet,
    ScenarioConfig,
    config_at_snr,
    generate_channels,
    other_cell,
    snr_to_power,
)

__version__ = "0.1.0"

__all__ = [
    "AlignmentSolution",
    "BeamformerSet",
    "ChannelSet",
    "DEFAULT_TOL",
    "DOF_WINDOW_DB",
    "DegenerateRealizationError",
    "FeasibilityResult",
    "FeedbackReport",
    "InfeasibleConfigError",
    "InfeasibleRealizationError",
    "InvalidInputError",
    "KnowledgeSet",
    "LocalityViolationError",
    "Message",
    "MonteCarloRate",
    "RateReport",
    "SCHEME_NAMES",
    "ScenarioConfig",
    "SlopeEstimate",
    "ToleranceConfig",
    "TwoCellIAError",
    "check_feasibility",
    "collinearity_angle",
    "compute_rates",
    "config_at_snr",
    "czf_dof",
    "design_precoders",
    "ergodic_sum_rate",
    "estimate_dof",
    "feedback_count",
    "format_trace",
    "generate_channels",
    "interference_leakage",
    "null_space_basis",
    "numeric_rank",
    "other_cell",
    "project_residual",
    "run_coordinated_zf",
    "run_percell_zf",
    "run_proposed_scheme",
    "run_subspace_ia_proxy",
    "scheme_runner",
    "scheme_supported",
    "simulate_exchange",
    "snr_to_power",
    "solve_alignment",
    "tally_feedback",
]
