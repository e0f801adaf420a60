"""Exception hierarchy shared across the toolkit.

Everything raised on bad user input derives from :class:`LldetError`, so
callers (the CLI in particular) can catch one base class and map subtypes
to exit codes.
"""


class LldetError(Exception):
    """Base class for all toolkit errors."""


class InvalidInputError(LldetError):
    """An argument violates a documented precondition."""


class InvalidShapeError(LldetError):
    """Tensor or image shapes do not compose."""


class InvalidConfigError(LldetError):
    """A configuration value is out of range or inconsistent."""


class ValidationError(LldetError):
    """Structurally parseable data violates a semantic constraint."""


class ParseError(LldetError):
    """Malformed text or JSON input.

    Carries optional source context so the CLI can point at the offending
    line.
    """

    def __init__(self, message, *, line=None, source=None):
        self.line = line
        self.source = source
        prefix = ""
        if source is not None:
            prefix += str(source)
        if line is not None:
            prefix += f":{line}"
        super().__init__(f"{prefix}: {message}" if prefix else message)


class UnknownClassError(LldetError):
    """A class name has no mapping in the class table."""


class FormatError(LldetError):
    """A binary payload does not follow its documented layout."""


class UnsupportedFormatError(FormatError):
    """Recognizable but unsupported file format (wrong magic, maxval...)."""


class TruncationError(FormatError):
    """A binary payload ends before its declared length."""


class IncompatibleWeightsError(LldetError):
    """A weight store does not match the network it is loaded into."""
