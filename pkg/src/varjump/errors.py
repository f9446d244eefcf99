"""Exception types shared across the package."""


class VarjumpError(Exception):
    """Base class for package-specific errors."""


class ParameterError(VarjumpError, ValueError):
    """A scalar argument lies outside its admissible range."""


class KernelError(VarjumpError, ValueError):
    """A directional kernel violates a construction invariant."""


class GridMismatchError(VarjumpError, ValueError):
    """Two grid quantities do not share dimension, box, and resolution."""


class ResolutionError(VarjumpError, ValueError):
    """A requested scale cannot be resolved on the given grid."""
