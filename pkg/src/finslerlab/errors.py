"""Exception taxonomy shared by all modules."""


class FinslerError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(FinslerError):
    """Evaluation outside a field's domain (chart boundary, zero section, ...)."""


class OrderError(FinslerError):
    """A jet ran out of retained derivative orders, or a multi-index is out of range."""


class ConfigError(FinslerError):
    """Bad run configuration, unknown config keys, or engine limits exceeded."""


class NumericError(FinslerError):
    """Singular linear algebra, step underflow, non-finite intermediate values."""


class StructureInvalidError(FinslerError):
    """A Finsler axiom failed at a concrete point (e.g. indefinite fundamental tensor)."""


class DegenerateFlagError(FinslerError):
    """The transverse edge of a flag is (numerically) parallel to the pole."""
