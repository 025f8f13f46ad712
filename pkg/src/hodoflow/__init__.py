"""Implicit (hodograph) solutions of pressureless flow with linear forcing u_t + (u.grad)u = g + Au."""

from .blowup import (
    certify_branch_absent,
    certify_no_blowup_1d,
    min_blowup_time,
    sheet_1d,
    sheets_coriolis2d,
    sheets_diag,
    sheets_diag2,
)
from .degenerate import (
    build_basis,
    coriolis3d_basis,
    degenerate_integrals,
    degenerate_solve,
    non_periodicity_witness,
)
from .errors import ConfigError, HodoflowError
from .hodograph import integrals, residual_M, solve_field, solve_u
from .model import ForceSpec, HodographProblem, coriolis2d_spec, coriolis3d_spec, make_data
from .oracle import exact_flow, first_caustic_time, rk4_flow
from .periodicity import check_periodic, make_periodic_2d, verify_solution_period

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "ForceSpec",
    "HodoflowError",
    "HodographProblem",
    "build_basis",
    "certify_branch_absent",
    "certify_no_blowup_1d",
    "check_periodic",
    "coriolis2d_spec",
    "coriolis3d_basis",
    "coriolis3d_spec",
    "degenerate_integrals",
    "degenerate_solve",
    "exact_flow",
    "first_caustic_time",
    "integrals",
    "make_data",
    "make_periodic_2d",
    "min_blowup_time",
    "non_periodicity_witness",
    "residual_M",
    "rk4_flow",
    "sheet_1d",
    "sheets_coriolis2d",
    "sheets_diag",
    "sheets_diag2",
    "solve_field",
    "solve_u",
    "verify_solution_period",
]
