"""High-precision gap probabilities for the symmetric Jacobi unitary ensemble.

The package computes the probability that no eigenvalue of the ensemble
falls in a symmetric interval (-a, a), exposes the orthogonal-polynomial
machinery behind that number (recurrence tables, ladder coefficients,
their evolution in a), and validates everything against independent
oracles: quadrature cross-checks, moment determinants, a Monte Carlo
counter, and a sine-kernel Fredholm determinant for the large-n limit.
"""

from .errors import (
    DegeneratePointError,
    JacgapError,
    NonconvergenceError,
    PrecisionLossError,
    ZeroDenominatorError,
)
from .numerics import (
    DEFAULT_PREC,
    Precision,
    QuadRule,
    fd_derivative,
    fd_step,
    gauss_jacobi_rule,
    small_det,
)
from .weight import (
    ComplementRule,
    WeightParams,
    complement_rule,
    lower_incomplete_beta,
    moment,
    weight_eval,
)
from .orthopoly import PolyEval, RecurrenceTable, build_table, eval_monic
from .ladder import (
    LadderCoeffs,
    LadderState,
    aux_residuals,
    identity_residuals,
    identity_sweep,
    ladder_coeffs,
    ladder_state,
    lowering_residual,
    states_upto,
)
from .dynamics import (
    DerivBundle,
    TableFamily,
    derivative_bundle,
    logdp_residual,
    riccati_residuals,
    second_order_residuals,
)
from .gap import (
    GapResult,
    HnOdeReport,
    gap_probability,
    hankel_gap_probability,
    hn_ode_report,
    mc_gap_probability,
    nd_transcription_residual,
)
from .fredholm import (
    DensityProfile,
    SigmaOracle,
    equilibrium_density,
    scaling_convergence,
    sigma_oracle,
    sigma_pv_residual,
    sine_kernel_det,
    sine_sigma_residual,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "JacgapError",
    "NonconvergenceError",
    "PrecisionLossError",
    "DegeneratePointError",
    "ZeroDenominatorError",
    "Precision",
    "DEFAULT_PREC",
    "QuadRule",
    "gauss_jacobi_rule",
    "small_det",
    "fd_derivative",
    "fd_step",
    "WeightParams",
    "ComplementRule",
    "weight_eval",
    "complement_rule",
    "lower_incomplete_beta",
    "moment",
    "RecurrenceTable",
    "PolyEval",
    "build_table",
    "eval_monic",
    "LadderState",
    "LadderCoeffs",
    "ladder_state",
    "states_upto",
    "ladder_coeffs",
    "identity_residuals",
    "identity_sweep",
    "aux_residuals",
    "lowering_residual",
    "DerivBundle",
    "TableFamily",
    "derivative_bundle",
    "riccati_residuals",
    "second_order_residuals",
    "logdp_residual",
    "GapResult",
    "HnOdeReport",
    "gap_probability",
    "hankel_gap_probability",
    "hn_ode_report",
    "nd_transcription_residual",
    "mc_gap_probability",
    "SigmaOracle",
    "DensityProfile",
    "sine_kernel_det",
    "sigma_oracle",
    "sigma_pv_residual",
    "sine_sigma_residual",
    "equilibrium_density",
    "scaling_convergence",
]
