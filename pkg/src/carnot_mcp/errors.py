"""Exception hierarchy.

Input problems derive from :class:`ValidationError` (the CLI maps them to
exit code 3). Geometric refusals such as :class:`CutLocus` are ordinary
outcomes of a well-posed question and are kept separate.
"""


class CarnotError(Exception):
    """Base class for all package errors."""


class ValidationError(CarnotError, ValueError):
    """Malformed or inconsistent input."""


class AntisymmetryViolation(ValidationError):
    pass


class JacobiViolation(ValidationError):
    pass


class GradingViolation(ValidationError):
    pass


class NotStratified(ValidationError):
    pass


class NotSkew(ValidationError):
    pass


class AllZero(ValidationError):
    """Bracket matrix vanishes: the group is abelian, not corank 1."""


class BadOmega(ValidationError):
    """Sampling region is empty or leaves the injectivity domain."""


class PositiveK(ValidationError):
    """MCP(K, N) with K > 0 cannot hold on an unbounded group."""


class ZeroDirection(ValidationError):
    pass


class ParseError(ValidationError):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {message}")


class DomainError(CarnotError, ValueError):
    """Argument outside the domain of a real function."""


class OutOfDomain(DomainError):
    """Covector outside the cotangent injectivity domain."""


class NotAmple(CarnotError):
    pass


class Inconclusive(CarnotError):
    pass


class CutLocus(CarnotError):
    """Point is not joined to the base point by a unique minimizing geodesic."""


class IdentityPoint(CarnotError):
    """The logarithm of the identity is not a well-defined initial covector."""


class ConvergenceError(CarnotError):
    pass
