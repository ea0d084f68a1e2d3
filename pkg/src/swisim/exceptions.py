"""Exception types raised by the simulator and reconstruction pipeline."""


class EqualWavelengths(ValueError):
    """The two laser wavelengths coincide; no synthetic wavelength exists."""


class TooFewShifts(ValueError):
    """A shift schedule needs at least three synthetic and three carrier steps."""


class DimensionMismatch(ValueError):
    """Arrays that must share a shape do not."""


class MissingGuide(ValueError):
    """A guide image is required for joint bilateral filtering but absent."""


class EmptyMask(ValueError):
    """No valid pixels remain under the combined mask."""


class EmptyPattern(ValueError):
    """A scan pattern contains no points."""


class ZeroPoints(ValueError):
    """The scan budget allows zero measurement points."""


class InsufficientSpan(ValueError):
    """Calibration samples do not span one modulation period."""


class FitDiverged(RuntimeError):
    """The sinusoid fit failed to explain the calibration samples."""


class InconsistentStack(ValueError):
    """A stored frame stack disagrees with its manifest."""
