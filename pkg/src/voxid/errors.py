"""Exception hierarchy for the toolkit."""


class VoxidError(Exception):
    """Base class for all errors raised by this package."""


class EmptyInput(VoxidError):
    """An operation received an empty signal or feature set."""


class AllSilence(VoxidError):
    """No block of the utterance carries usable energy."""


class TooShort(VoxidError):
    """Signal shorter than a single analysis frame."""


class LagTooLarge(VoxidError):
    """Requested autocorrelation lag is not covered by the signal."""


class DegenerateFrame(VoxidError):
    """Frame energy too low for linear-prediction analysis."""


class NumericalFailure(VoxidError):
    """A recursion or iteration produced non-finite or unstable values."""


class UnstableFilter(VoxidError):
    """Predictor polynomial is not minimum phase."""


class DegenerateResidual(VoxidError):
    """Residual is constant after mean removal; it cannot be peak-normalized."""


class NoFeatures(VoxidError):
    """No frame survived feature extraction."""


class FilterbankTooDense(VoxidError):
    """A triangular filter covers fewer than two FFT bins."""


class InsufficientData(VoxidError):
    """Fewer training vectors than mixture components."""


class DimError(VoxidError):
    """Vector dimension does not match the model or matrix."""


class FeatureKindMismatch(VoxidError):
    """Operands carry different feature kinds."""


class BadFileFormat(VoxidError):
    """A serialized artifact has a corrupt or unknown layout."""


class AudioFormatError(VoxidError):
    """Unsupported or malformed WAV input."""
