"""nudirac: solver for (1+1)-D non-Hermitian Dirac Hamiltonians with a
position-dependent (local) Fermi velocity.

The package derives closed-form spectra and spinor wavefunctions for two
exactly solvable model families (a PT-symmetric linear-velocity/linear-vector
model and a non-PT shifted-oscillator model), re-derives every quantity
through a generic hypergeometric-reduction engine, and cross-checks the
results with numerical residual and matrix-pencil probes.

All public objects are immutable value types and pure functions; the library
is safe to use concurrently without locking.
"""

__version__ = "0.1.0"

from .algebra import Poly, RationalFunction, quadratic_roots, perfect_square_k
from .specfun import LaguerreSpec, assoc_laguerre, rodrigues_check
from .nu_core import (
    NUProblem,
    NUBranch,
    WeightPair,
    QuantizationResult,
    pi_candidates,
    select_branch,
    lambda_pair,
    weight_theta_rho,
    rodrigues_solution,
    quantize_energy,
)
from .dirac import (
    DiracModel,
    DecoupledODE,
    PTReport,
    SpinorGrid,
    f_function,
    decouple,
    rotate_space,
    pt_check,
    scalar_mass_split,
    reconstruct_spinor,
)
from .models import (
    PTLinearParams,
    NonPTParams,
    ClosedFormState,
    pt_linear_solve,
    nonpt_solve,
    closed_form_residual,
)
from .oracle import (
    Discretization,
    OracleSpectrum,
    solve_linear_pencil,
    solve_quadratic_pencil,
    ode_residual,
    normalize_quadrature,
)

__all__ = [
    "Poly",
    "RationalFunction",
    "quadratic_roots",
    "perfect_square_k",
    "LaguerreSpec",
    "assoc_laguerre",
    "rodrigues_check",
    "NUProblem",
    "NUBranch",
    "WeightPair",
    "QuantizationResult",
    "pi_candidates",
    "select_branch",
    "lambda_pair",
    "weight_theta_rho",
    "rodrigues_solution",
    "quantize_energy",
    "DiracModel",
    "DecoupledODE",
    "PTReport",
    "SpinorGrid",
    "f_function",
    "decouple",
    "rotate_space",
    "pt_check",
    "scalar_mass_split",
    "reconstruct_spinor",
    "PTLinearParams",
    "NonPTParams",
    "ClosedFormState",
    "pt_linear_solve",
    "nonpt_solve",
    "closed_form_residual",
    "Discretization",
    "OracleSpectrum",
    "solve_linear_pencil",
    "solve_quadratic_pencil",
    "ode_residual",
    "normalize_quadrature",
]
