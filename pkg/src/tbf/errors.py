"""Exception hierarchy shared across the engine."""


class EngineError(Exception):
    """Base class for all engine errors."""


class ParameterError(EngineError, ValueError):
    """A physical or configuration parameter violates its contract."""


class CyclicPrefixError(ParameterError):
    """Path delay reaches or exceeds the cyclic-prefix duration."""


class DopplerRangeError(ParameterError):
    """Doppler frequency falls outside the admissible frame range."""


class ShapeError(EngineError, ValueError):
    """Tensor/matrix dimensions are inconsistent."""


class DegenerateInputError(EngineError, ValueError):
    """An input with zero energy where a normalization is required."""


class SftfSizeError(EngineError, ValueError):
    """Materializing the covariance tensor would exceed the size cap."""


class SceneError(EngineError, ValueError):
    """Scene construction or path generation failed."""


class StoreError(EngineError):
    """Base class for persistence errors."""


class BadMagicError(StoreError):
    """File does not start with the tensor-container magic bytes."""


class UnsupportedVersionError(StoreError):
    """Container version byte is unknown."""


class UnsupportedDtypeError(StoreError):
    """Container dtype code is unknown."""


class TruncatedPayloadError(StoreError):
    """Payload shorter than the header-declared size."""


class ManifestError(StoreError, ValueError):
    """Dataset manifest violates its schema; message names the field path."""
