"""Exception types raised across the package."""


class OHCError(Exception):
    """Base class for all errors raised by ohc."""


class EmptyInput(OHCError, ValueError):
    pass


class Undefined(OHCError, ValueError):
    """A quantity has no value for the given input (e.g. a score over nothing)."""


class NormalsUndefined(OHCError, ValueError):
    pass


class DegenerateTetrahedron(OHCError, ValueError):
    pass


class ZeroSpacing(OHCError, ValueError):
    """Both clusters have zero spacing but are separated by a positive gap."""


class ForbiddenEdge(OHCError, ValueError):
    pass


class ParseError(OHCError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class FormatError(OHCError, ValueError):
    pass
