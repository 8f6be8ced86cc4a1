"""Exception types shared across the toolkit."""


class InvalidArgumentError(ValueError):
    """An argument is outside its documented domain."""


class GeometryMismatchError(InvalidArgumentError):
    """Two inputs that must share geometry (size, channels, fov) do not."""


class InvalidDepthError(InvalidArgumentError):
    """A depth value violates the positivity contract."""


class ScaffoldFormatError(ValueError):
    """A scaffold stream violates the native file format."""


class ScaffoldMagicError(ScaffoldFormatError):
    """The stream does not start with the scaffold magic bytes."""


class ScaffoldVersionError(ScaffoldFormatError):
    """The stream declares an unsupported format version."""


class ScaffoldTruncationError(ScaffoldFormatError):
    """The stream ends before the declared payload does."""

    def __init__(self, expected_bytes: int, actual_bytes: int, where: str):
        self.expected_bytes = expected_bytes
        self.actual_bytes = actual_bytes
        super().__init__(
            f"truncated {where}: expected {expected_bytes} bytes, got {actual_bytes}"
        )


class ScaffoldInvariantError(ScaffoldFormatError):
    """Decoded values violate a Gaussian invariant (opacity range, scale sign, ...)."""


class PlyParseError(ValueError):
    """A PLY stream cannot be parsed as a splat export."""


class PfmParseError(ValueError):
    """A PFM stream violates the format."""


class UncoveredDirectionError(ValueError):
    """A cubemap-to-equirect resample hit directions no face covers.

    Only possible for face sets with fov below 90 degrees; carries the
    uncovered pixel count and an estimate of the uncovered solid angle.
    """

    def __init__(self, uncovered_pixels: int, solid_angle_sr: float):
        self.uncovered_pixels = uncovered_pixels
        self.solid_angle_sr = solid_angle_sr
        super().__init__(
            f"{uncovered_pixels} output pixels (~{solid_angle_sr:.6f} sr) are covered "
            f"by no face; face fov is below 90 degrees"
        )
