"""Exception classes shared across the toolchain.

The CLI maps these onto distinct exit codes; see cli.py.
"""


class ParseError(ValueError):
    """Formula text is not well-formed. Carries a character position."""

    def __init__(self, message: str, position: int | None = None):
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)
        self.position = position


class IntervalError(ParseError):
    """Temporal interval is malformed (t1 > t2, or bounds not numeric)."""


class TraceError(ValueError):
    """Trace file or trace data is malformed (bad header, width mismatch, ...)."""


class AllocationError(ValueError):
    """Formula does not fit the fabric configuration (PE/Q exhaustion,
    AP index out of range, queue head beyond capacity)."""


class BitstreamError(ValueError):
    """Bitstream bytes do not match the configuration (length, padding,
    field overflow)."""


class QueOverflowError(RuntimeError):
    """A que add would exceed capacity; indicates a compiler bug, since
    allocation must bound every head below the que size."""


class HardFault(RuntimeError):
    """An impossible-by-construction condition occurred at runtime: a stable
    verdict cell still held Maybe, or coalesced write intervals were not
    contiguous. Signals a misprogrammed monitor, never user error."""


class ProtocolError(RuntimeError):
    """Programming-port misuse: configuration byte received while the fabric
    is running, or mode confusion."""
