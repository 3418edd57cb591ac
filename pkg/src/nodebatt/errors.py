"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of the model."""


class InsufficientSamplesError(ValueError):
    """Fewer samples than polynomial coefficients."""


class RankDeficientError(ValueError):
    """The least-squares design matrix does not have full column rank."""


class DataFormatError(ValueError):
    """Malformed input data (CSV rows, config documents)."""
