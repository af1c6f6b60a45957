"""fracsum: sum-of-exponentials compression of the t^(alpha-1) memory kernel
and O(N)-time / O(L)-memory solvers for Caputo fractional ODEs.

Workflow: describe the kernel window with a KernelSpec, build the trapezoidal
exponential sum, shrink it with the Prony search (reduce_with_rescaling), and
hand the reduced sum to one of the time steppers in fracsum.fode.
"""

from .errors import (
    ArityError,
    ComplexRoots,
    FracsumError,
    GridSpacingError,
    ImplicitDivergence,
    InvalidBounds,
    NonConvergence,
    PositiveRoot,
    PronyFitError,
    SearchExhausted,
    ShapeError,
    SingularHankel,
)
from .specfun import MLParams, gamma, mittag_leffler, reflection_coefficient
from .expsum import (
    ErrorReport,
    EvalGrid,
    ExpSum,
    KernelSpec,
    TruncationBounds,
    build_trapezoidal_expsum,
    eval_expsum,
    eval_expsum_checked,
    geometric_grid,
    kernel_error,
    rescale,
    truncation_bounds,
    uniform_grid,
)
from .serialize import load_expsum, save_expsum
from .prony import (
    PronyBlock,
    ReductionReport,
    moments,
    prony_error,
    prony_fit,
    reduce_with_rescaling,
    search_reduction,
)
from .fode import (
    FodeProblem,
    HistoryState,
    Solution,
    SolverOptions,
    TimeGrid,
    aux_ode_step,
    expm1_ratio,
    history_advance_ci,
    solve_ci,
    solve_ode_aux,
    transition_weight,
)
from .examples import BenchmarkProblem, PowerLawRhs, kelvin_voigt_grid, make_example
from .bench import (
    DEFAULT_SWEEP,
    EocRow,
    RunConfig,
    build_kernel,
    emit_csv,
    eoc,
    kelvin_voigt_l_sweep,
    make_grid,
    raw_kernel,
    reduction_row,
    resolve_T,
    run_example,
    solve_once,
    trajectory_rows,
)

__version__ = "0.1.0"

__all__ = [
    "ArityError", "ComplexRoots", "FracsumError", "GridSpacingError",
    "ImplicitDivergence", "InvalidBounds", "NonConvergence", "PositiveRoot",
    "PronyFitError", "SearchExhausted", "ShapeError", "SingularHankel",
    "MLParams", "gamma", "mittag_leffler", "reflection_coefficient",
    "ErrorReport", "EvalGrid", "ExpSum", "KernelSpec", "TruncationBounds",
    "build_trapezoidal_expsum", "eval_expsum", "eval_expsum_checked",
    "geometric_grid", "kernel_error", "rescale", "truncation_bounds", "uniform_grid",
    "load_expsum", "save_expsum",
    "PronyBlock", "ReductionReport", "moments", "prony_error", "prony_fit",
    "reduce_with_rescaling", "search_reduction",
    "FodeProblem", "HistoryState", "Solution", "SolverOptions", "TimeGrid",
    "aux_ode_step", "expm1_ratio", "history_advance_ci", "solve_ci",
    "solve_ode_aux", "transition_weight",
    "BenchmarkProblem", "PowerLawRhs", "kelvin_voigt_grid", "make_example",
    "DEFAULT_SWEEP", "EocRow", "RunConfig", "build_kernel", "emit_csv", "eoc",
    "kelvin_voigt_l_sweep", "make_grid", "raw_kernel", "reduction_row",
    "resolve_T", "run_example", "solve_once", "trajectory_rows",
    "__version__",
]
