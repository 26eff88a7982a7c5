"""Exception hierarchy.

Every error raised on purpose by this package derives from
:class:`FluxKnotError`. Errors caused by a numerical domain violation
(degenerate frames, invalid tube regions, unphysical radii) derive from
:class:`DomainError`; the CLI maps those to exit status 3.
"""


class FluxKnotError(Exception):
    pass


class ConfigError(FluxKnotError, ValueError):
    """Bad configuration: unknown keys, missing flags, wrong types."""


class DomainError(FluxKnotError, ValueError):
    """A numerical precondition failed at some point of the domain."""


class DegenerateFrameError(DomainError):
    """Curvature below threshold: the normal and binormal are undefined."""

    def __init__(self, kappa, s=None):
        self.kappa = kappa
        self.s = s
        where = "" if s is None else f" at s={s:.6g}"
        super().__init__(
            f"inflection/straight segment{where}: kappa={kappa:.3e} below 1e-12"
        )


class ZeroSpeedError(DomainError):
    """The curve is not regular (vanishing speed)."""


class InvalidMetricError(DomainError):
    """The tube metric is degenerate (1 - R kappa cos(theta) <= 0)."""

    def __init__(self, message, points=()):
        self.points = list(points)
        super().__init__(message)


class NoDynamoError(DomainError):
    """Vanishing effective torsion makes the unstretched ratio undefined."""


class UnphysicalRadiusError(DomainError):
    """The radius profile crosses zero on the requested grid."""

    def __init__(self, s_critical):
        self.s_critical = s_critical
        super().__init__(f"unphysical shrink-through-zero: R(s) <= 0 at s={s_critical:.6g}")


class ValidityBoundaryError(DomainError):
    """The growth-rate constraint is evaluated on 1 - R kappa0 cos(theta) = 0."""


class SolenoidalError(DomainError):
    """A field passed to the curl identity check has non-zero divergence."""
