"""Exception types shared across the spacefield package."""


class SpacefieldError(Exception):
    """Base class for all spacefield errors."""


class ConfigurationError(SpacefieldError):
    """Invalid or unknown configuration (sport, provider, parameter tree)."""


class SchemaError(SpacefieldError):
    """A required column or field is missing from an input file."""


class ParseError(SpacefieldError):
    """A cell or record could not be parsed; message carries the row index."""


class ValidationError(SpacefieldError):
    """Parsed data violates a documented invariant."""


class AlignmentError(SpacefieldError):
    """Tracking streams cannot be merged onto a common timeline."""


class InputError(SpacefieldError):
    """A model operation received a frame missing required entities."""


class ParameterError(SpacefieldError):
    """A model parameter is outside its valid range."""


class FrameRangeError(SpacefieldError):
    """A frame index or offset falls outside the available range."""


class DegenerateFrameError(SpacefieldError):
    """A frame produced an all-zero or otherwise unusable surface."""
