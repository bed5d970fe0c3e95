"""Exception hierarchy for the solver."""


class RCSError(Exception):
    """Base class for all solver errors."""


class ConfigError(RCSError, ValueError):
    """Invalid run configuration; ``path`` names the offending field."""

    def __init__(self, message, path=None):
        self.path = path
        if path:
            message = f"{path}: {message}"
        super().__init__(message)


class CouplingTooStrong(RCSError, ValueError):
    """|lambda*Z/kappa| >= 1, so gamma is not real."""


class InvalidBasis(RCSError, ValueError):
    pass


class PotentialSingular(RCSError, ValueError):
    """A potential was evaluated outside its analyticity sector or near a pole."""


class IndexOverflow(RCSError, ValueError):
    pass


class NumericalError(RCSError, ArithmeticError):
    """Base for failures of the linear algebra."""


class EigFailure(NumericalError):
    pass


class OverlapSingular(NumericalError):
    pass


class MatchFailure(RCSError):
    """An eigenvalue family could not be tracked across a parameter grid."""


class NoRoot(RCSError, ValueError):
    pass
