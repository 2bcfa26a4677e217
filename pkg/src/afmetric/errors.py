"""Exception taxonomy shared by all afmetric modules."""


class AfmetricError(Exception):
    """Base class for all library errors."""


class RationalInput(AfmetricError):
    """A continued-fraction expansion terminated: the input is rational."""


class PrecisionExhausted(AfmetricError):
    """The requested result cannot be certified from the available digits."""


class InvalidDigit(AfmetricError):
    """A partial-quotient or multiplicity digit is < 1."""


class ShapeMismatch(AfmetricError):
    """Operands live on different block structures."""


class LevelOutOfRange(AfmetricError):
    """A tower level index is outside the constructed depth."""


class DegenerateBasis(AfmetricError):
    """Orthonormalization found a linear dependence (embedding bug)."""


class NonConvergence(AfmetricError):
    """An iterative solver exhausted its budget without converging."""

    def __init__(self, message, iterations=None, residual=None):
        super().__init__(message)
        self.iterations = iterations
        self.residual = residual


class AgreementTooShallow(AfmetricError):
    """Two digit streams diverge before the certificate's tail cutoff."""

    def __init__(self, message, n1=None, n2=None):
        super().__init__(message)
        self.n1 = n1
        self.n2 = n2


class EmptyCloud(AfmetricError):
    """A point cloud handed to a sampling routine is empty."""


class InternalInconsistency(AfmetricError):
    """A closed-form result disagreed with its built-in oracle."""
