"""Pseudospectral simulation and quasineutral-limit verification suite for
the quantum Navier-Stokes-Poisson system on a periodic torus."""

from .errors import (
    BlowUpError,
    ConfigurationError,
    DependencyError,
    DomainError,
    ExtractionError,
    FitError,
    IntegrationTimeout,
    NumericsError,
    QnspError,
    SchemaError,
    SolvabilityError,
    UsageError,
)
from .fields import ScalarField, VectorField
from .grid import Grid, make_grid
from .norms import NormSpec, h3_group_norm, l2_norm, sobolev_norm, triple_norm
from .operators import (
    dealiased_divide,
    dealiased_product,
    differentiate,
    div,
    grad,
    hessian,
    inverse_laplacian,
    laplacian,
    leray_project,
)
from .params import PhysParams
from .rhs import bohm_force, qnsp_rhs
from .snapshot import read_snapshot, write_snapshot
from .state import FluidState, Trajectory, poisson_solve
from .stepping import integrate, stability_report, step

__version__ = "0.1.0"
