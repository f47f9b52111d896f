"""Exception hierarchy.

Every error carries an ``exit_code`` so the command-line front end can map
module-level failures onto process exit statuses without a lookup table.
"""


class BifurcError(Exception):
    exit_code = 1


class ValidationError(BifurcError, ValueError):
    """Malformed input: bad shapes, unsorted sizes, inconsistent scenario."""

    exit_code = 2


class DomainError(ValidationError):
    """Evaluation point outside a curve's declared domain."""


class ContractError(ValidationError):
    """A precondition of an operation is violated by the caller."""


class NumericalError(BifurcError, ArithmeticError):
    """A computation finished but its result cannot be trusted."""

    exit_code = 3


class IntegrationError(NumericalError):
    def __init__(self, message, t=None):
        super().__init__(message if t is None else f"{message} (t={t!r})")
        self.t = t


class SymmetryViolation(NumericalError):
    """Spectrum not closed under the symplectic 4-tuple symmetry."""


class ContourError(NumericalError):
    """An eigenvalue lies too close to a Riesz contour."""


class FrameError(NumericalError):
    """Symplectic Gram-Schmidt broke down."""


class ReductionIntegrityError(NumericalError):
    """Reduced monodromy does not reproduce the selected spectrum."""


class ConsistencyError(NumericalError):
    """Two formulas that must agree do not."""


class StructureError(BifurcError):
    """Jordan or block structure cannot be decided or is violated."""

    exit_code = 4


class IllPosedStructureError(StructureError):
    """Rank decision is ambiguous at the requested tolerance."""
