"""Exception types shared across the package."""


class SsfkitError(Exception):
    """Base class for all package-specific errors."""


class DomainError(SsfkitError, ValueError):
    """An argument lies outside the validity region of a formula."""


class IntegrationError(SsfkitError):
    """The adaptive integrator failed to meet its tolerance."""


class DirichletEigenvalueHit(SsfkitError):
    """The spectral parameter sits on the Dirichlet spectrum.

    Raised when the Dirichlet characteristic function (the (1,2) entry of
    the transfer matrix, equivalently the Wronskian of the two one-sided
    Dirichlet solutions) vanishes within tolerance.
    """


class KreinSingular(SsfkitError):
    """det K is numerically zero: z sits on the coupled spectrum."""


class ScanResolutionError(SsfkitError):
    """Two characteristic-function sign changes inside one minimal scan step."""


class HorizonExceeded(SsfkitError, ValueError):
    """A query beyond the certified completeness horizon of a spectrum."""


class BranchAmbiguity(SsfkitError):
    """Adjacent scattering-phase samples differ by more than pi/2."""


class UnboundedPairing(SsfkitError, ValueError):
    """Unweighted pairing requested against a non-compactly-supported weight."""


class ConfigError(SsfkitError, ValueError):
    """Experiment configuration is malformed or violates a model constraint."""
