"""Exception taxonomy shared by all subsystems.

The CLI maps these onto its exit codes: input problems -> 2,
mathematical precondition failures -> 3, budget overruns -> 4.
"""


class HulltoolError(Exception):
    """Base class for all library errors."""


class RuleFormatError(HulltoolError):
    """Rule document violates the input schema."""


class UndeclaredLabel(RuleFormatError):
    """An image or patch mentions a label that is not a declared prototile."""


class RaggedImage(RuleFormatError):
    """A multidimensional image array is not a full rectangular block."""


class NonPositiveDimension(RuleFormatError):
    """A prototile side length is zero or negative."""


class NonPrimitiveRule(HulltoolError):
    """Operation requires a primitive abelianization matrix."""


class StabilizationFailure(HulltoolError):
    """An iterative census did not stabilize within its iteration cap."""


class WellDefinednessFailure(HulltoolError):
    """Collared substitution images are not determined by the collar alone."""


class FlatteningFailure(HulltoolError):
    """The self-map of the (collared) complex does not map cell stars into
    single sheets; carries a two-extension witness when available."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class BudgetExceeded(HulltoolError):
    """An expansion or census would exceed the configured cell budget."""


class AmbiguityError(HulltoolError):
    """A hull-point translation leaves the region determined by the point's
    truncation depth; the caller should deepen the point."""


class DimensionMismatch(HulltoolError):
    """Chain/cochain data has the wrong length or level for an operation."""
