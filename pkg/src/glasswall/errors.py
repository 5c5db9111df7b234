"""Exception types raised across the package.

Everything derives from GlasswallError so callers can catch one base
class; most subclasses also derive from ValueError or KeyError so the
package plays nicely with generic exception handling.
"""


class GlasswallError(Exception):
    """Base class for all errors raised by this package."""


class SchemaError(GlasswallError, ValueError):
    """Dataset or file does not match the declared schema."""


class ParseError(GlasswallError, ValueError):
    """A cell could not be parsed; carries row/column context."""

    def __init__(self, message, row=None, column=None):
        super().__init__(message)
        self.row = row
        self.column = column


class DomainError(GlasswallError, ValueError):
    """A value is outside its permitted domain (bad code, zero height...)."""


class SizeError(GlasswallError, ValueError):
    """An input collection has an unusable size (empty, too few rows...)."""


class SingularSystemError(GlasswallError, ValueError):
    """A linear system is singular; usually fixed by regularizing."""


class ModelFormatError(GlasswallError, ValueError):
    """A model file is malformed or fails its integrity checksum."""


class ModelVersionError(ModelFormatError):
    """A model file declares a format version this code cannot read."""


class ChecksumError(ModelFormatError):
    """A model file's payload does not match its recorded checksum."""


class UnknownTermError(GlasswallError, KeyError):
    """A term label does not exist in the model."""
