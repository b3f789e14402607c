"""Exception types shared across the package."""


class RankAggError(Exception):
    """Base class for all errors raised by rankagg."""


class ValidationError(RankAggError, ValueError):
    """Malformed input: not a bijection, mismatched sizes, bad weights."""


class OracleCapExceeded(RankAggError):
    """An exhaustive routine was asked to work above its configured size cap."""


class UnreachableError(RankAggError):
    """No generator sequence transforms one ranking into the other."""


class DegenerateGapError(RankAggError, ValueError):
    """Tied average scores make the consensus tail bound inapplicable."""
