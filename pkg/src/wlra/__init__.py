"""Weighted and constrained low-rank matrix approximation.

Solvers for three related problems over a column-blocked matrix
(A1  A2): the constrained closed form that preserves A1 exactly, the
uniformly weighted penalized closed form, and an alternating solver for
entrywise block weights, plus EM/ALS baselines and a seeded benchmark
harness.
"""

from .baselines import EmConfig, als_solve, em_solve, rmse
from .bench import SweepResult, compare_solvers, convergence_trace, sweep_lambda
from .errors import MatrixFormatError, NumericalError, ValidationError
from .ghs import (
    BoundaryTieWarning,
    GhsSolution,
    PenalizedSolution,
    select_rank_from_tau,
    solve_ghs,
    solve_rank_penalized_limit,
    solve_uniform_penalized,
)
from .linalg import (
    QrFactors,
    SvdFactors,
    canonical_angle_sines,
    frobenius_norm,
    hadamard,
    hard_threshold,
    numerical_rank,
    project_onto_colspace,
    project_onto_complement,
    qr,
    singular_values,
    svd,
)
from .matio import read_matrix, write_csv, write_matrix
from .synth import (
    SpectrumSpec,
    SynthSpec,
    conditioned_spectrum,
    gen_conditioned,
    gen_low_rank_plus_noise,
)
from .wlr import (
    DescentDecomposition,
    RankDeficiencyWarning,
    StoppingCriteria,
    StopReason,
    WlrProblem,
    WlrReport,
    WlrState,
    assemble,
    default_init,
    descent_decomposition,
    gradients,
    objective,
    solve,
    stationarity_residuals,
    update_b,
    update_c,
    update_d,
    update_x1,
)

__version__ = "0.1.0"

__all__ = [
    "BoundaryTieWarning",
    "DescentDecomposition",
    "EmConfig",
    "GhsSolution",
    "MatrixFormatError",
    "NumericalError",
    "PenalizedSolution",
    "QrFactors",
    "RankDeficiencyWarning",
    "SpectrumSpec",
    "StopReason",
    "StoppingCriteria",
    "SvdFactors",
    "SweepResult",
    "SynthSpec",
    "ValidationError",
    "WlrProblem",
    "WlrReport",
    "WlrState",
    "als_solve",
    "assemble",
    "canonical_angle_sines",
    "compare_solvers",
    "conditioned_spectrum",
    "convergence_trace",
    "default_init",
    "descent_decomposition",
    "em_solve",
    "frobenius_norm",
    "gen_conditioned",
    "gen_low_rank_plus_noise",
    "gradients",
    "hadamard",
    "hard_threshold",
    "numerical_rank",
    "objective",
    "project_onto_colspace",
    "project_onto_complement",
    "qr",
    "read_matrix",
    "rmse",
    "select_rank_from_tau",
    "singular_values",
    "solve",
    "solve_ghs",
    "solve_rank_penalized_limit",
    "solve_uniform_penalized",
    "stationarity_residuals",
    "svd",
    "sweep_lambda",
    "update_b",
    "update_c",
    "update_d",
    "update_x1",
    "write_csv",
    "write_matrix",
]
