"""Grid laboratory for nonlocal fractional p-Laplacian eigenvalue problems.

The package discretizes the fractional p-Rayleigh quotient on wide lattice
boxes, minimizes it for the first eigenpair, sweeps the exponent p toward the
large-p limit 1/R^alpha, and checks candidate limiting eigenfunctions against
the extremal Hoelder-quotient eigenvalue equation, including the closed-form
sign-changing profiles on an interval.
"""

from .closedform1d import Example1D, first_1d, sample, second_1d, third_1d
from .energy import (
    EnergyBreakdown,
    FracParams,
    QuotientTables,
    apply_Lp,
    gagliardo_energy,
    rayleigh_gradient,
    rayleigh_quotient,
)
from .geometry import (
    Disk,
    GridDomain,
    GridFunction,
    Interval,
    NodeSet,
    Rectangle,
    build_disk,
    build_interval,
    build_mask2d,
    build_rectangle,
    distance_to_complement,
    distance_to_set,
    high_ridge,
    inscribed_radius,
    nearest_node,
)
from .infinity import (
    InfinityReport,
    cone,
    first_residual,
    higher_residual,
    holder_seminorm,
    lambda_infinity,
    linf_minus,
    linf_minus_analytic,
    linf_plus,
    r2_radius,
    representation,
)
from .solver import (
    EigenResult,
    PSweepResult,
    PSweepRow,
    SolverOptions,
    minimize_first,
    monotonicity_check,
    p2_oracle,
    p_sweep,
)

__version__ = "0.1.0"

__all__ = [
    "Example1D", "first_1d", "sample", "second_1d", "third_1d",
    "EnergyBreakdown", "FracParams", "QuotientTables", "apply_Lp",
    "gagliardo_energy", "rayleigh_gradient", "rayleigh_quotient",
    "Disk", "GridDomain", "GridFunction", "Interval", "NodeSet", "Rectangle",
    "build_disk", "build_interval", "build_mask2d", "build_rectangle",
    "distance_to_complement", "distance_to_set", "high_ridge",
    "inscribed_radius", "nearest_node",
    "InfinityReport", "cone", "first_residual", "higher_residual",
    "holder_seminorm", "lambda_infinity", "linf_minus", "linf_minus_analytic",
    "linf_plus", "r2_radius", "representation",
    "EigenResult", "PSweepResult", "PSweepRow", "SolverOptions",
    "minimize_first", "monotonicity_check", "p2_oracle", "p_sweep",
    "__version__",
]
