"""Finite AP traces and their CSV file format.

File format: a header line ``time,ap0,ap1,...,ap<W-1>`` followed by one row
per step ``<t>,<0|1>,...`` with times consecutive from 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import TraceError


@dataclass(frozen=True)
class Trace:
    """A fixed-width sequence of AP valuations; events[t][k] is ap<k> at t."""

    events: tuple[tuple[bool, ...], ...]

    def __post_init__(self):
        widths = {len(e) for e in self.events}
        if len(widths) > 1:
            raise TraceError(f"ragged trace: row widths {sorted(widths)}")
        if self.events and self.width == 0:
            raise TraceError("zero-width trace")

    @property
    def width(self) -> int:
        return len(self.events[0]) if self.events else 0

    def __len__(self) -> int:
        return len(self.events)

    def column(self, ap: int) -> int:
        """The ap-th column packed as an int bitmask, bit t = value at time t."""
        bits = 0
        for t, row in enumerate(self.events):
            if row[ap]:
                bits |= 1 << t
        return bits


def make_trace(rows: Iterable[Sequence[int | bool]]) -> Trace:
    return Trace(tuple(tuple(bool(v) for v in row) for row in rows))


def read_trace(path: str) -> Trace:
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines:
        raise TraceError(f"{path}: empty trace file")
    header = lines[0].split(",")
    if header[0] != "time" or any(
        col != f"ap{i}" for i, col in enumerate(header[1:])
    ) or len(header) < 2:
        raise TraceError(f"{path}: bad header {lines[0]!r}")
    width = len(header) - 1
    rows = []
    for expected_t, line in enumerate(lines[1:]):
        cells = line.split(",")
        if len(cells) != width + 1:
            raise TraceError(f"{path}: row {expected_t} has {len(cells) - 1} values, want {width}")
        try:
            t = int(cells[0])
            values = [int(c) for c in cells[1:]]
        except ValueError as exc:
            raise TraceError(f"{path}: non-numeric cell in row {expected_t}") from exc
        if t != expected_t:
            raise TraceError(f"{path}: times must be consecutive from 0, got {t}")
        if any(v not in (0, 1) for v in values):
            raise TraceError(f"{path}: AP values must be 0 or 1 in row {t}")
        rows.append(values)
    return make_trace(rows)


def write_trace(path: str, trace: Trace) -> None:
    if trace.width == 0:
        raise TraceError("cannot write a trace without AP columns")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("time," + ",".join(f"ap{i}" for i in range(trace.width)) + "\n")
        for t, row in enumerate(trace.events):
            fh.write(f"{t}," + ",".join("1" if v else "0" for v in row) + "\n")
