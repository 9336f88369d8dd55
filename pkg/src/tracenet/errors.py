"""Exception hierarchy shared across the library.

Every error type carries the process exit code the CLI maps it to, so the
command layer never has to maintain a parallel table.
"""


class TracenetError(Exception):
    exit_code = 1


class NetFormatError(TracenetError):
    """The net document is syntactically or structurally invalid."""

    exit_code = 2


class NotOneSafeError(TracenetError):
    """Exploration found a firing that puts a second token on a place."""

    exit_code = 3

    def __init__(self, message: str, witness: tuple[str, ...]):
        super().__init__(message)
        self.witness = tuple(witness)


class NotIrreducibleError(TracenetError):
    exit_code = 4


class NumericError(TracenetError):
    """A numerical gate failed: degenerate kernel, non-positive weights,
    normalization out of tolerance, or a characteristic root at 1."""

    exit_code = 5


class KernelDegeneracyError(NumericError):
    """The null space at the characteristic root is not one-dimensional.

    Carries all candidate basis vectors so callers can report them instead
    of silently picking one.
    """

    def __init__(self, message: str, basis):
        super().__init__(message)
        self.basis = [tuple(float(v) for v in row) for row in basis]


class CapExceededError(TracenetError):
    """A configured resource cap was hit before the computation finished."""

    exit_code = 6
