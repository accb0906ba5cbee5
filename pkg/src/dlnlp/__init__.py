"""Linear programming by gradient descent on a squared reparametrization.

Solve min c^T x s.t. Ax = b, x >= 0 (c > 0) by writing x = u o u and running
plain gradient descent on f(u) = 1/2 ||A(u o u) - b||^2.  The initialization
scale plays the role of an entropy regularizer: small u(0) biases the limit
toward the minimum-cost vertex.  The package ships the solver, mirror-descent
and Sinkhorn baselines, independent oracles to check limits against, and a
benchmark CLI (``dlnlp``).
"""

from ._rng import PortableRng
from .baselines import (
    MirrorState,
    SinkhornState,
    make_mirror_state,
    make_sinkhorn_state,
    matched_l_schedule,
    mirror_step,
    sinkhorn_col_scale,
    sinkhorn_row_scale,
    solve_mirror,
    solve_sinkhorn,
)
from .dln_solver import (
    ABNORMAL_TERMINATIONS,
    Adaptive,
    Constant,
    CostScaled,
    LogBoundReport,
    ScaledAdaptive,
    SolverState,
    SolverTrace,
    TerminationReason,
    UniformAlpha,
    adaptive_stepsize,
    check_log_bound,
    default_snapshot_stride,
    dln_step,
    grad_f,
    initial_u,
    integrate_flow,
    loss_g,
    make_state,
    op_norm_sq,
    solve_dln,
)
from .errors import (
    DimensionMismatch,
    DlnLpError,
    Infeasible,
    KernelUnderflow,
    MarginalMismatch,
    MissingSnapshots,
    NoConvergence,
    NonFinite,
    NonFiniteData,
    OracleUnavailable,
    ParseError,
    PositivityLost,
    ShiftTooSmall,
    SingularHessian,
    StepUnderflow,
    TooLarge,
)
from .lp_core import (
    FeasibilityCheckReport,
    InstanceSeedSpec,
    LinearProgram,
    gen_instance,
    loss_residual_norm,
    read_lp,
    relative_gap,
    validate_lp,
    write_lp,
)
from .oracles import (
    CONSTANTS_MAX_EXACT_N,
    VERTEX_MAX_N,
    VERTEX_MAX_SUBSETS,
    DualSolution,
    EntropyRegularizedLp,
    PaperConstants,
    compute_constants,
    lp_vertex_oracle,
    solve_entropy_lp,
    solve_entropy_lp_homotopy,
)
from .reductions import (
    BasisPursuitInstance,
    GeneralLp,
    OtInstance,
    read_ot,
    reduce_basis_pursuit,
    reduce_general_lp,
    reduce_ot,
    write_ot,
)

__version__ = "0.1.0"

__all__ = [
    "ABNORMAL_TERMINATIONS",
    "Adaptive",
    "BasisPursuitInstance",
    "CONSTANTS_MAX_EXACT_N",
    "Constant",
    "CostScaled",
    "DimensionMismatch",
    "DlnLpError",
    "DualSolution",
    "EntropyRegularizedLp",
    "FeasibilityCheckReport",
    "GeneralLp",
    "Infeasible",
    "InstanceSeedSpec",
    "KernelUnderflow",
    "LinearProgram",
    "LogBoundReport",
    "MarginalMismatch",
    "MirrorState",
    "MissingSnapshots",
    "NoConvergence",
    "NonFinite",
    "NonFiniteData",
    "OracleUnavailable",
    "OtInstance",
    "PaperConstants",
    "ParseError",
    "PortableRng",
    "PositivityLost",
    "ScaledAdaptive",
    "ShiftTooSmall",
    "SingularHessian",
    "SinkhornState",
    "SolverState",
    "SolverTrace",
    "StepUnderflow",
    "TerminationReason",
    "TooLarge",
    "UniformAlpha",
    "VERTEX_MAX_N",
    "VERTEX_MAX_SUBSETS",
    "adaptive_stepsize",
    "check_log_bound",
    "compute_constants",
    "default_snapshot_stride",
    "dln_step",
    "gen_instance",
    "grad_f",
    "initial_u",
    "integrate_flow",
    "loss_g",
    "loss_residual_norm",
    "lp_vertex_oracle",
    "make_mirror_state",
    "make_sinkhorn_state",
    "make_state",
    "matched_l_schedule",
    "mirror_step",
    "op_norm_sq",
    "read_lp",
    "read_ot",
    "reduce_basis_pursuit",
    "reduce_general_lp",
    "reduce_ot",
    "relative_gap",
    "sinkhorn_col_scale",
    "sinkhorn_row_scale",
    "solve_dln",
    "solve_entropy_lp",
    "solve_entropy_lp_homotopy",
    "solve_mirror",
    "solve_sinkhorn",
    "validate_lp",
    "write_lp",
    "write_ot",
]
