"""Exception types shared across the package."""


class CrysredError(Exception):
    """Base class for all package errors."""


class NonUnit(CrysredError):
    """Inversion of an element with positive valuation (or indistinguishable from 0)."""


class ExactDivisionError(CrysredError):
    """Exact division requested but the dividend is not divisible."""


class InsufficientPrecision(CrysredError):
    """An operation needs more precision headroom than the input carries."""


class PrecisionExhausted(CrysredError):
    """An iterative construction ran out of pi-adic precision."""


class UnsupportedExtension(CrysredError):
    """Field extension outside the supported (e, f) range."""


class MismatchedParams(CrysredError):
    """Operands live over different field parameters."""


class RepeatedEigenvalue(CrysredError):
    """The characteristic polynomial has a double root."""


class RadiusViolation(CrysredError):
    """A deformation target lies outside the certified constancy radius."""


class PreconditionDefect(CrysredError):
    """A lifting routine's congruence precondition fails."""


class IndeterminateAtPrecision(CrysredError):
    """The working precision cannot distinguish the candidate answers."""


class NotEtale(CrysredError):
    """Rank-1 classification input has no admissible X-power normalization."""


class SeedNotFound(CrysredError):
    """No certified seed pair could be constructed; carries the obstruction log."""

    def __init__(self, message, log=None):
        super().__init__(message)
        self.log = log or []


class NoMatch(CrysredError):
    """Identification failed against every catalog candidate at this precision."""


class AmbiguousMatch(CrysredError):
    """Identification matched two distinct canonical labels (precision bug)."""


class ExhaustedPrecision(CrysredError):
    """The reduce loop hit n_max without a stable answer."""


class CatalogBuildFailure(CrysredError):
    """A catalog entry failed one of its validation checks."""


class Obstruction(CrysredError):
    """An order-by-order solver hit a non-invertible step.

    Attributes: order (the X-order r), valuation (p-adic valuation of the
    obstructed linear map's determinant, when known).
    """

    def __init__(self, order, valuation=None, message=None):
        super().__init__(message or f"obstruction at order {order}")
        self.order = order
        self.valuation = valuation
