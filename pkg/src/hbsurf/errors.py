"""Exception types shared across the package."""


class OutOfChart(ValueError):
    """A local-coordinate point lies outside the chart's domain."""


class SingularMetric(ArithmeticError):
    """Metric tensor is numerically singular (det g below tolerance)."""


class DegeneratePath(ValueError):
    """A path needs at least two points."""


class NotOnSphere(ValueError):
    """Input vector is not on the unit sphere within tolerance."""


class OutOfRange(ValueError):
    """Scalar argument outside its admissible interval."""


class UnsupportedSurface(ValueError):
    """The operation has no closed form for this surface kind."""


class NotUnitSpeed(ValueError):
    """Initial velocity is not unit speed in the surface metric."""


class NoConvergence(RuntimeError):
    """Iterative geodesic solve did not meet its tolerance."""

    def __init__(self, message, iterations, residual):
        super().__init__(
            f"{message} (iterations={iterations}, residual={residual:.3e})"
        )
        self.iterations = iterations
        self.residual = residual


class SegmentLeavesChart(ValueError):
    """The straight initial segment exits the chart domain."""


class EmptyStencil(RuntimeError):
    """No node lies within the localization radius of the query point."""


class DegenerateSet(ValueError):
    """Point set contains duplicate points."""


class UnknownFunction(KeyError):
    """Unknown test-function identifier."""


class InsufficientRows(ValueError):
    """Not enough table rows for a least-squares rate fit."""
