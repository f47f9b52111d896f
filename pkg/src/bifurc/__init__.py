"""Eigenvalue bifurcation of linear Hamiltonian flows on the unit circle.

Modules
-------
flow        curves ``A(t)``, the symplectic flow ``γ' = J A γ``, perturbation matrices
krein       spectra, invariant subspaces, Krein signatures, stability and convexity checks
jordan      numerical Jordan chains and the block-size bookkeeping ``φ(k)``
predict     the ``S``, ``X``, ``d`` matrices, branch roots and first-order predictions
charpoly    characteristic-coefficient vanishing orders and blow-up polynomials
trajectory  tracked eigenvalue paths, branch classification, indices, the set ``D``
reduction   Riesz projectors, symplectic frames and reduced monodromies
"""

from .errors import (BifurcError, ConsistencyError, ContourError, ContractError, DomainError, FrameError,
                     IllPosedStructureError, IntegrationError, NumericalError, ReductionIntegrityError,
                     StructureError, SymmetryViolation, ValidationError)
from .symplectic import rotation, standard_J, symplectic_inverse, symplectic_sum, symplecticity_defect
from .flow import (BUILTIN_NAMES, HamiltonianCurve, SymplecticMatrix, bernstein_approximant, builtin_curve,
                   builtin_gamma0, constant_curve, constant_flow, curve_from_dict, curve_to_dict, evaluate,
                   flow_to, function_curve, perturbation_matrices, poly_curve, propagate, sampled_curve)
from .krein import (check_convexity_assumption, eigen_decompose, invariant_subspace, krein_gram, krein_pairing,
                    krein_signature, quadruple_partners, stability_verdict)
from .jordan import block_grouping, conjugate_partition, eta_chains, jordan_chains, phi
from .predict import (analyze_bifurcation, bifurcation_matrices, branch_roots, build_d, build_S, build_X,
                      predict_branches)
from .charpoly import (Q_poly, Q_tilde_poly, blowup_polynomial, charpoly_coeffs, coefficient_limit,
                       coefficient_series, exact_order_sets, verify_coeff_orders)
from .trajectory import (classify_branches, detect_D, eigenvalue_index, nu_plus, track_spectrum,
                         verify_prediction)
from .reduction import (decomposition_residual, reduce_flow, reduced_monodromy, riesz_projector,
                        symplectic_frame)

__version__ = "0.1.0"
