"""Exception types raised across the package.

All inherit from FatprogError so callers (notably the CLI) can map whole
families onto exit codes: configuration problems, malformed data, and
numerical failures are kept distinct.
"""


class FatprogError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(FatprogError):
    """Invalid configuration value or combination."""


# --- data shape / content errors ---


class EmptyRecipe(FatprogError):
    """Signal recipe carries zero Fourier components."""


class NyquistViolation(FatprogError):
    """Sample rate does not exceed twice the largest component frequency."""


class NonAlternatingSequence(FatprogError):
    """A peak-valley sequence whose successive differences do not alternate in sign."""


class TooShort(FatprogError):
    """Input too short for the requested operation."""


class EmptyExtrema(FatprogError):
    """No local extrema accumulated yet."""


class EmptyBatch(FatprogError):
    """Empty training batch."""


class EmptySet(FatprogError):
    """Empty training/validation/conditioning set."""


class DegenerateSplit(FatprogError):
    """A dataset split that leaves some partition empty."""


class WindowUncovered(FatprogError):
    """No prediction instants fall inside the evaluation window."""


class EmptyResults(FatprogError):
    """No per-sample results to aggregate."""


class DimensionMismatch(FatprogError):
    """Input vector dimension does not match the model."""


class RhoOutOfRange(FatprogError):
    """Percentile fraction outside its valid range."""


# --- numerical failures ---


class MeanExceedsUts(FatprogError):
    """Mean stress at or above ultimate tensile strength: Goodman factor non-positive."""


class NoDamage(FatprogError):
    """Signal accumulates zero fatigue damage; failure time undefined."""


class DegenerateSpectrum(FatprogError):
    """Spectral moments vanish; irregularity factor undefined."""


class SingularKernel(FatprogError):
    """Kernel matrix not positive definite even after jitter escalation."""


class VanishingMass(FatprogError):
    """Truncation removed essentially all posterior probability mass."""


class GenerationFailed(FatprogError):
    """Dataset sample could not be drawn within the redraw budget."""
