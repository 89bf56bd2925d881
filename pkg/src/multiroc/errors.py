"""Exception and warning types shared across the package."""


class MultirocError(Exception):
    """Base class for all multiroc errors."""


class ParseError(MultirocError):
    """Input file could not be parsed in the declared format."""


class SimplexViolation(MultirocError):
    """A probability row deviates from the simplex by more than the tolerance."""


class LabelOutOfRange(MultirocError):
    """A label is not a valid class index."""


class EmptyClass(MultirocError):
    """A class index has no observations."""


class InvalidK(MultirocError):
    """Class count below two."""


class EmptyScores(MultirocError):
    """Quantile grid requested on an empty score vector."""


class NumericalDegeneracy(MultirocError):
    """A normal-equation denominator underflowed during fitting."""


class NonPositiveWeight(MultirocError):
    """Cost weights must be finite and strictly positive."""


class InsufficientReplicates(MultirocError):
    """Too many bootstrap replicates were dropped for non-convergence."""


class MismatchedB(MultirocError):
    """Ranking requested on bootstrap results with unequal replicate counts."""


class DimensionMismatch(MultirocError):
    """Model inputs disagree in observation count or class count."""


class EmptyClassAfterSampling(MultirocError):
    """Dirichlet subsampling left a class with zero observations after retries."""


class UnknownExperiment(MultirocError):
    """Unrecognized experiment name."""


class DegenerateGridWarning(UserWarning):
    """All scores in a pair column are identical; the column degenerates to a step."""


class SeparationWarning(UserWarning):
    """Multinomial fit reached (near-)perfect separation."""
