"""Characteristic solver, integral-equation oracle and diagnostics for the
damped wave equation w_tt - a^2 w_xx + c w = 0 on [0, 1] with boundary
conditions that extinguish every solution in finite time when c = 0."""

from .analysis import (
    FitReport,
    SmoothingReport,
    discrete_c2_norms,
    envelope_holds,
    extinction_time,
    fit_decay_rate,
    fit_growth_bound,
    gronwall_constant,
    smoothing_report,
    stability_index,
)
from .coefficients import Constant, GaussianBump, SampledGrid, SeparableTrig, Zero
from .core import (
    GridState,
    InitialData,
    Orientation,
    ProblemSpec,
    Trajectory,
    h1_norm,
    l2_norm,
    mirror_data,
    mirror_problem,
    reduce_to_first_order,
    sup_norm,
)
from .errors import (
    ConfigError,
    CoverageError,
    DataError,
    InsufficientDataError,
    ResolutionError,
    SolverOverflowError,
    SpecificationError,
    StabilityError,
    WavestabError,
)
from .families import initial_data, make_family
from .manufactured import manufactured
from .mollify import MollifierParams, generalized_solution_check, mollify
from .oracle import HistorySegment, compare_with_solver, decoupled_exact, picard_solve, picard_u, picard_w_equation
from .solver import Forcing, Rule, StepScheme, solve, step

__version__ = "0.1.0"
