from __future__ import annotations


class PhantypesError(Exception):
    """Base class for every domain error raised by this package."""


class ParseError(PhantypesError):
    def __init__(self, line: int, col: int, expected: str, found: str = ""):
        self.line = line
        self.col = col
        self.expected = expected
        self.found = found
        msg = f"{line}:{col}: expected {expected}"
        if found:
            msg += f", found {found!r}"
        super().__init__(msg)
