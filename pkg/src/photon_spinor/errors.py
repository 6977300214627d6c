"""Exception hierarchy shared across the package."""


class PhotonSpinorError(Exception):
    """Base class for all errors raised by this package."""


class IdentityViolation(PhotonSpinorError):
    """An exact operator identity failed; indicates an implementation bug."""

    def __init__(self, name, report=None):
        super().__init__(f"identity check failed: {name}")
        self.name = name
        self.report = report


class NotUnitVector(PhotonSpinorError):
    """Direction vector deviates from unit length beyond tolerance."""


class ZeroWavevector(PhotonSpinorError):
    """Vanishing momentum is forbidden; a photon cannot have zero energy."""


class OffGridMode(PhotonSpinorError):
    """A plane-wave mode falls outside the representable band of a grid."""

    def __init__(self, k):
        super().__init__(f"mode wavevector {tuple(k)} not representable on grid")
        self.k = tuple(k)


class NotTransverse(PhotonSpinorError):
    """Classical field pair has longitudinal spectral content."""


class ConstraintViolated(PhotonSpinorError):
    """Field does not satisfy the transversality/coupling constraint."""


class GridTooCoarse(PhotonSpinorError):
    """Upper/lower derivative quadratures disagree beyond the allowed factor."""


class QuadratureFailure(PhotonSpinorError):
    """Oscillatory radial quadrature did not converge under acceleration."""


class OffLightCone(PhotonSpinorError):
    """Frequency and wavevector violate omega = c|k| beyond tolerance."""


class ConfigError(PhotonSpinorError):
    """Malformed or inconsistent scenario configuration."""


class ResourceError(PhotonSpinorError):
    """Requested resources exceed the declared budget."""
