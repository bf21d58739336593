"""Exception and warning classes raised by spa_kit."""


class SpaError(Exception):
    """Base class for every error raised by this package."""


class InvariantError(SpaError, ValueError):
    """A value violates a structural invariant (pole outside the disk, broken
    conjugate closure, repeated poles, inconsistent shapes, ...)."""


class SchemaError(SpaError, ValueError):
    """A JSON document is malformed: missing field, wrong type, non-finite number."""


class EvaluationAtPole(SpaError, ZeroDivisionError):
    pass


class NotReal(SpaError, ArithmeticError):
    """Impulse response carries an imaginary residue above tolerance."""


class TruncationOverflow(SpaError, RuntimeError):
    """The truncation length needed for the requested tolerance exceeds the cap."""


class DimensionMismatch(SpaError, ValueError):
    pass


class InvalidCount(SpaError, ValueError):
    pass


class RepeatedPole(SpaError, ValueError):
    pass


class UnstablePole(InvariantError):
    pass


class TooManyPoles(SpaError, ValueError):
    pass


class AssumptionViolation(SpaError):
    """A pole selection fails one of the assumptions A1-A5.

    ``assumption`` names the failed assumption (``"A4"``), ``witness`` holds
    the offending quantity when there is one.
    """

    def __init__(self, assumption, message, witness=None):
        super().__init__(f"{assumption}: {message}")
        self.assumption = assumption
        self.witness = witness


class NotEnoughPoles(AssumptionViolation):
    def __init__(self, have, need):
        super().__init__("A2", f"|P| = {have} < {need} required poles", witness=have)
        self.have = have
        self.need = need


class IllConditioned(UserWarning):
    """Approximating poles are clustered; simple-pole coefficients are large."""
