"""Exception types raised by spectral_ht."""


class SpectralHTError(Exception):
    """Base class for all library errors."""


class DimensionMismatch(SpectralHTError, ValueError):
    pass


class DuplicateFrequency(SpectralHTError, ValueError):
    pass


class ZeroCoefficient(SpectralHTError, ValueError):
    pass


class SeparationInfeasible(SpectralHTError, ValueError):
    pass


class BadIndex(SpectralHTError, IndexError):
    pass


class ZeroReference(SpectralHTError, ValueError):
    pass


class RankDeficient(SpectralHTError, ValueError):
    """A factor matrix lost full column rank."""


class BaseMismatch(SpectralHTError, ValueError):
    """A tangent vector was used at a point other than its base."""


class NotOrthogonal(SpectralHTError, ValueError):
    pass


class NotSymmetric(SpectralHTError, ValueError):
    pass


class SparsityTooLarge(SpectralHTError, ValueError):
    """Requested rank K does not satisfy K < p."""


class LineSearchStalled(SpectralHTError, RuntimeError):
    """Backtracking exhausted without satisfying the Armijo condition."""


class ConfigError(SpectralHTError, ValueError):
    """Invalid experiment configuration."""


class InputError(SpectralHTError, ValueError):
    """Malformed observed-signal input file."""


class OutputExists(SpectralHTError, FileExistsError):
    """Refusing to overwrite an existing output file."""
