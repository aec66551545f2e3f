"""Exception hierarchy shared across the package.

Every loader / stage failure maps to a distinct type so callers (and the
CLI) can tell configuration mistakes from corrupt inputs.
"""


class SplatPruneError(Exception):
    """Base class for all errors raised by this package."""


# --- PLY model store ---------------------------------------------------------

class PlyError(SplatPruneError):
    pass


class MalformedHeaderError(PlyError):
    """Header is missing a required element/property or declares a bad schema."""


class UnsupportedEncodingError(PlyError):
    """PLY is ASCII, big-endian, or an unknown format version."""


class TruncatedBodyError(PlyError):
    """Binary body holds fewer bytes than the header-declared vertex count needs."""


class NonFiniteValueError(PlyError):
    """NaN or Inf encountered in the binary body."""


class IoFailureError(PlyError):
    """Underlying OS write failure while saving."""


class LengthMismatchError(SplatPruneError):
    """A per-Gaussian vector does not match the cloud length."""


# --- camera rig --------------------------------------------------------------

class CameraError(SplatPruneError):
    pass


class RigParseError(CameraError):
    pass


class UnsupportedCameraModelError(CameraError):
    """Camera model has distortion; the pipeline needs undistorted pinholes."""


class MissingCameraError(CameraError):
    """images.txt references a camera id absent from cameras.txt."""


class NonOrthonormalRotationError(CameraError):
    pass


# --- masks -------------------------------------------------------------------

class MaskError(SplatPruneError):
    pass


class NoMasksFoundError(MaskError):
    pass


class UnpairedMaskError(MaskError):
    """Mask file base name matches no camera image name."""


class DuplicateMaskError(MaskError):
    """Two mask files resolve to the same camera."""


class AllBlackMaskError(MaskError):
    """Mask contains no object pixel; almost certainly a pairing error."""


# --- outlier pruning ---------------------------------------------------------

class DegenerateSelectionError(SplatPruneError):
    """Fewer than two kept Gaussians; spatial statistics are undefined."""


class TooFewPointsError(SplatPruneError):
    """Kept count must exceed k for neighbor statistics."""


class EmptyInputError(SplatPruneError):
    pass


# --- synthetic benchmark -----------------------------------------------------

class InvalidCountsError(SplatPruneError):
    pass


# --- pipeline ----------------------------------------------------------------

class PipelineError(SplatPruneError):
    """Configuration error or stage guard abort, with stage context."""
