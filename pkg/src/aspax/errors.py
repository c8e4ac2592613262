"""Exception hierarchy shared by every module."""


class AspaxError(Exception):
    """Base class for all errors raised by aspax."""


class ParseError(AspaxError):
    def __init__(self, message, origin="<memory>", line=0, column=0):
        self.origin = origin
        self.line = line
        self.column = column
        super().__init__(f"{origin}:{line}:{column}: {message}")


class SafetyError(ParseError):
    """A rule has a variable that no positive body atom or domain literal binds."""


class SortError(AspaxError):
    """Sort declarations are missing, inconsistent, or violated by a constant."""


class MappingError(AspaxError):
    """An abstraction mapping is malformed or does not fit the program."""


class TransformError(AspaxError):
    """A rule cannot be abstracted with the supported constructions."""


class ResourceError(AspaxError):
    """A configured grounding or search limit was exceeded."""
