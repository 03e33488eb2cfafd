"""Exception and warning types shared across the package."""


class SemifitError(Exception):
    """Base class for all errors raised by this package."""


class NonFinite(SemifitError):
    """A NaN or infinite entry was found where finite data is required."""

    def __init__(self, location: str):
        self.location = location
        super().__init__(f"non-finite value in {location}")


class ConstantColumn(SemifitError):
    """A feature column has zero sample variance."""

    def __init__(self, name: str):
        self.name = name
        super().__init__(f"constant feature column: {name}")


class DegenerateColumn(SemifitError):
    """A projection column has zero sample standard deviation."""


class NumericalUnderflow(SemifitError):
    """Kernel mass at a query point underflowed to (near) zero."""


class ShapeMismatch(SemifitError):
    """Array arguments disagree on their shared dimension."""


class RankDeficient(SemifitError):
    """A matrix that must have full column rank does not."""


class SingularCovariance(SemifitError):
    """A sample covariance matrix is numerically singular."""


class SingularVariance(SemifitError):
    """A sample variance matrix is numerically singular."""


class DependentColumns(SemifitError):
    """Columns are numerically dependent and cannot be orthonormalized."""


class DimSelFailed(SemifitError):
    """Too many bootstrap fits failed during dimension selection."""


class OptimizerStalled(UserWarning):
    """The evaluation budget ran out before the tolerances were met.

    Issued as a warning: the best parameters found so far are still
    returned, flagged via ``FittedModel.converged``.
    """
