"""Exception types shared across the package."""


class SlungloadError(Exception):
    """Base class for all package errors."""


class ConfigError(SlungloadError):
    """Invalid or inconsistent scenario configuration.

    The message names the offending field path (e.g. ``load.mass``).
    """


class DegenerateGeometryError(SlungloadError):
    """A vehicle is (numerically) coincident with the load; cable direction undefined."""


class TensionSolveError(SlungloadError):
    """The cable-tension linear system is singular or ill-conditioned."""


class IntegrationDivergenceError(SlungloadError):
    """Cable-constraint residual exceeded the divergence threshold during a step."""


class ThrustSingularityError(SlungloadError):
    """Commanded thrust direction too close to straight down (or zero thrust)."""


class CertificateError(SlungloadError):
    """Certificate search failed (nominal dynamics not Hurwitz, or no feasible point)."""
