"""Exception types raised across the package."""


class BlockNormError(ValueError):
    """Base class for every error raised by blocknorm."""


class NotSquare(BlockNormError):
    pass


class NotHermitian(BlockNormError):
    pass


class NoConvergence(BlockNormError, ArithmeticError):
    pass


class NotPositiveDefinite(BlockNormError):
    pass


class NotPsd(BlockNormError):
    pass


class NonPositiveInput(BlockNormError):
    pass


class WrongDimension(BlockNormError):
    pass


class DimensionMismatch(BlockNormError):
    pass


class NotUnitary(BlockNormError):
    pass


class NonFinite(BlockNormError):
    pass


class HypothesisNotMet(BlockNormError):
    """The norm-additivity hypothesis ``||a+b|| = ||a|| + ||b||`` fails."""


class NotProjection(BlockNormError):
    pass


class NotCommuting(BlockNormError):
    pass


class DpZero(BlockNormError):
    """The compressed factor ``D p`` vanishes, so there is nothing to scale."""


class NumericalDegeneracy(BlockNormError, ArithmeticError):
    """A decision fell inside the indeterminate tolerance band."""


class EigenvalueCollision(BlockNormError):
    """``D = (X X*)^(1/2)`` has eigenvalues closer than the tolerance band."""


class InvalidConfig(BlockNormError):
    pass
