"""Integrable and solvable particle models on the unit circle.

Each model is available in angle form (theta_n) and in vector form
(r_n in the plane with |r_n| = 1); the tan-derived models also have a line
form z_n = tan theta_n. The interpolation-based models come with N constants
of motion, and the many-body one can be solved by algebraic operations and a
quadrature inversion.
"""

from .algebraic import (
    QuadratureInversion,
    build_quadrature,
    reduce_to_first_order,
    solve_time,
    trajectory_algebraic,
)
from .errors import (
    CircleBodyError,
    CollisionSingularity,
    ConfigError,
    ConstraintViolation,
    ContinuationFailure,
    DegenerateLeadingCoefficient,
    DegenerateVector,
    GridMismatch,
    PoleHit,
    RepeatedRoots,
    SingularityEncountered,
    SingularityError,
    StepLimitExceeded,
    TangentSingularity,
    WrongKind,
    ZeroMass,
)
from .geometry import (
    AngleState,
    CircleState,
    LineState,
    angle_to_circle,
    angle_to_line,
    circle_to_angle,
    line_to_angle,
    verify_identities,
)
from .integrator import IntegratorConfig, Projection, Trajectory, integrate, recurrence_error
from .interp import NodeSet, SeedBasis, diff_matrix, interp_q, interpolate, seed_eval, sigma
from .models import (
    GeneralInterp,
    InvariantVector,
    ModelKind,
    ModelSpec,
    angle_accel,
    circle_accel,
    constants_of_motion,
    line_accel,
    momentum_energy_oracle,
    rhs_angle,
    rhs_circle,
    rhs_line,
)

__version__ = "0.1.0"
