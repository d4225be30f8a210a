"""Exception hierarchy.

Every error raised by the package derives from :class:`WarError`, which is a
``ValueError`` so callers doing generic input validation keep working.
"""


class WarError(ValueError):
    pass


class DimensionMismatch(WarError):
    pass


class NonFiniteInput(WarError):
    pass


class SingleClassDomain(WarError):
    """A labeled domain is missing one of the two classes."""


class DegenerateData(WarError):
    pass


class EmptyBlock(WarError):
    """An MMD matrix was requested with an empty source or target block."""


class MissingPseudoLabels(WarError):
    pass


class SingularSystem(WarError):
    pass


class TooFewValues(WarError):
    pass


class TooFewDomains(WarError):
    pass


class EmptyEnsemble(WarError):
    pass


class RankDeficient(WarError):
    pass


class InvalidConfig(WarError):
    pass


class ConfigError(WarError):
    pass


class MissingClass(WarError):
    pass


class EmptyCurve(WarError):
    pass
