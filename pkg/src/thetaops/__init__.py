"""Theta functions with matrix multipliers, their module of quasi-periodic
eigenfunctions, and synthesis of commuting matrix differential operators."""

from .bamodule import (
    F,
    BAElement,
    LevelSignature,
    ModuleFrame,
    S,
    SubvarietySample,
    assemble_basis,
    covariant_derivative,
    element_jets,
    evaluate_jet,
    make_element,
    restriction_rank,
    signature,
    subvariety_sample,
)
from .errors import ThetaOpsError
from .jets import Jet, JetSpace, jet_derive, jet_exp, jet_log, jet_mul, jet_reciprocal
from .operators import (
    MatrixDiffOp,
    commutator,
    compose,
    derivative_op,
    dump_operator,
    identity_op,
    load_operator,
    op_distance,
    op_norm,
    op_norm_levels,
)
from .multipliers import (
    MultiplierSystem,
    cocycle_residual,
    jordan_example,
    multiplier,
    trivial_system,
)
from .riemann import LatticePoint, RiemannMatrix, validate_riemann_matrix
from .theta import (
    MeromorphicFunction,
    ThetaValue,
    VectorTheta,
    basis,
    basis_values,
    gram_rank,
    log_theta_derivative,
    meromorphic_function,
    scalar_theta,
)

__version__ = "0.1.0"
