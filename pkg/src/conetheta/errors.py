"""Exception types shared across the package."""


class ConeThetaError(ValueError):
    """Base class for all validation and computation errors."""


class NonSymmetric(ConeThetaError):
    pass


class Singular(ConeThetaError):
    pass


class DimensionMismatch(ConeThetaError):
    pass


class SignatureError(ConeThetaError):
    """The quadratic space does not have one negative direction."""


class NotNegativeVector(ConeThetaError):
    """A splitting vector c must satisfy Q(c) < 0."""


class NotInCone(ConeThetaError):
    """A vector fails the cone membership conditions Q < 0, B(., c0) < 0."""


class LinearlyDependent(ConeThetaError):
    pass


class FrameError(ConeThetaError):
    """Cone frame validation failed; carries the full list of violations.

    Each violation is a tuple (code, indices, message) where code is one of
    "NotInCone", "MixedComponents", "RankDeficient", "GenusTooLarge".
    """

    def __init__(self, violations):
        self.violations = list(violations)
        lines = "; ".join(msg for _, _, msg in self.violations)
        super().__init__(f"invalid cone frame: {lines}")

    def codes(self):
        return [code for code, _, _ in self.violations]


class WrongGenus(ConeThetaError):
    pass


class ChartDegenerate(ConeThetaError):
    pass


class RuleUnavailable(ConeThetaError):
    pass


class RadiusTooLarge(ConeThetaError):
    """Projected enumeration count exceeds the configured cap."""


class CubatureBudgetExceeded(ConeThetaError):
    pass


class ProblemFormatError(ConeThetaError):
    """Malformed problem-definition file; message names the offending field."""
