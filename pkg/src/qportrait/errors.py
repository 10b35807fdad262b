"""Exception hierarchy shared by every module of the package."""


class PortraitError(Exception):
    """Base class for all errors raised by qportrait."""


class NotSquare(PortraitError, ValueError):
    pass


class NotHermitian(PortraitError, ValueError):
    pass


class TraceNotOne(PortraitError, ValueError):
    pass


class NotPositiveSemidefinite(PortraitError, ValueError):
    def __init__(self, min_eigenvalue: float):
        super().__init__(f"matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:.6g})")
        self.min_eigenvalue = min_eigenvalue


class NotUnitary(PortraitError, ValueError):
    pass


class NoConvergence(PortraitError, ArithmeticError):
    pass


class DomainError(PortraitError, ValueError):
    pass


class LengthMismatch(PortraitError, ValueError):
    pass


class DimensionTooSmall(PortraitError, ValueError):
    pass


class DimensionTooLarge(PortraitError, ValueError):
    pass


class BadSubsystemIndex(PortraitError, ValueError):
    pass


class DimMismatch(PortraitError, ValueError):
    pass


class BadDims(PortraitError, ValueError):
    pass


class BadOrder(PortraitError, ValueError):
    pass


class InvalidProbabilityVector(PortraitError, ValueError):
    pass


class InvalidMap(PortraitError, ValueError):
    pass


class InternalPositivityBreach(PortraitError, AssertionError):
    """A portrait failed certification. Positivity is a theorem for merge maps,
    so this always indicates a bug."""


class OptimizerDidNotConverge(PortraitError, ArithmeticError):
    def __init__(self, certificate: float, tol: float):
        super().__init__(f"tomographic minimum exceeds von Neumann entropy by {certificate:.3e} > {tol:.1e}")
        self.certificate = certificate
        self.tol = tol


class ConfigError(PortraitError, ValueError):
    pass


class ParseError(PortraitError, ValueError):
    pass
