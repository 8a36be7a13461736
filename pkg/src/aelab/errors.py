"""Exception types shared across the package.

Plain arithmetic errors reuse the builtins (``ZeroDivisionError`` for a
field inversion of zero, ``IndexError`` for an out-of-range permutation
rank); everything protocol- or attack-specific gets its own class here.
"""


class SingularMatrix(ValueError):
    """Matrix inversion was attempted on a singular matrix."""


class BadGenerator(ValueError):
    """A braid letter references a generator index outside [1, N-1]."""


class GenerationFailure(RuntimeError):
    """A bounded resampling loop exhausted its attempts."""


class ParseError(ValueError):
    """A parameter or keypair file is malformed.

    Carries the 1-based line number when known.
    """

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class NeedMoreBytes(Exception):
    """A frame decode ran off the end of the available bytes."""


class ProtocolError(Exception):
    """A well-framed but invalid message (unknown type, bad payload)."""


class BadChallenge(ValueError):
    """Token window (s, l) does not fit inside the serialized secret."""


class SigmaMismatch(Exception):
    """Span-table impersonation saw a permutation it has no table for."""


class NotInSubgroup(ValueError):
    """Factorization was requested for a permutation outside the table."""


class SearchExhausted(RuntimeError):
    """Meet-in-the-middle enumeration finished without a collision."""
