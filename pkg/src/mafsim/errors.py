"""Shared exception types."""


class ConfigurationError(ValueError):
    """Invalid user-supplied configuration (unsupported order, unknown scheme, bad flag)."""


class RankDeficiencyError(RuntimeError):
    """System has deficient column rank; apply MMSE-DFE preprocessing before sphere decoding."""


class SearchSpaceError(RuntimeError):
    """Exhaustive enumeration refused because the candidate count exceeds the guard."""
