"""Exception types shared across the package."""


class InputError(ValueError):
    """Malformed input: wrong dimension, degenerate data, bad JSON."""


class CapabilityError(RuntimeError):
    """No implemented path for this body/operation combination."""


class PreconditionError(ValueError):
    """A mathematical hypothesis of a check does not hold for the input."""
