"""Golden model of the programmable evaluator machines.

A que is a bounded buffer over {True, False, Maybe}; cell 0 is the tail
(most recently added). Each step an abstract machine computes a five-opcode
boolean result and conditionally overwrites Maybe cells inside a programmed
interval. An evaluator machine (EM) is 1-3 such machines sharing one que;
it realizes exactly one MTL operator, and the values deleted at the que head
form its verdict stream.

Shared-que stepping: one add, then each machine's conditional modify in
listed order, then one del at the head. The firing modifies of one step
never touch a common cell (asserted), so the listed order is cosmetic.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import HardFault, QueOverflowError


class _MaybeType:
    __slots__ = ()

    def __repr__(self):
        return "Maybe"


MAYBE = _MaybeType()

Interval = tuple[int, int]

OPCODES = ("wire", "not", "or", "and", "implies")


def am_result(opcode: str, op0: bool, op1: Optional[bool] = None) -> bool:
    """The boolean result an abstract machine computes from its operands."""
    if opcode == "not":
        _require_arity(opcode, op1, binary=False)
        return not op0
    if opcode == "wire":
        _require_arity(opcode, op1, binary=False)
        return op0
    _require_arity(opcode, op1, binary=True)
    if opcode == "and":
        return op0 and op1
    if opcode == "or":
        return op0 or op1
    if opcode == "implies":
        return (not op0) or op1
    raise ValueError(f"unknown opcode {opcode!r}")


def _require_arity(opcode: str, op1, binary: bool) -> None:
    if binary and op1 is None:
        raise ValueError(f"opcode {opcode!r} needs a second operand")
    if not binary and op1 is not None:
        raise ValueError(f"opcode {opcode!r} takes a single operand")


# ---------------------------------------------------------------------------
# Que
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QueState:
    """cells[0] is the tail; occupancy == len(cells) <= capacity."""

    cells: tuple
    capacity: int

    @property
    def occupancy(self) -> int:
        return len(self.cells)


def empty_que(capacity: int) -> QueState:
    return QueState((), capacity)


def que_add(q: QueState) -> QueState:
    """Shift every cell up one index and insert Maybe at cell 0."""
    if q.occupancy >= q.capacity:
        raise QueOverflowError(
            f"que of capacity {q.capacity} is full; the formula needs a deeper que"
        )
    return QueState((MAYBE,) + q.cells, q.capacity)


def que_del(q: QueState, head: int) -> tuple[QueState, Optional[bool]]:
    """Remove the cell at index head, returning its value as a verdict.

    A del at an empty position is a no-op (warm-up). Deleting Maybe is a
    hard fault: cells at or beyond the operator latency hold settled
    verdicts, so Maybe there means a misprogrammed head.
    """
    if q.occupancy <= head:
        return q, None
    value = q.cells[head]
    if value is MAYBE:
        raise HardFault(f"deleted unresolved cell at head {head}")
    return QueState(q.cells[:head] + q.cells[head + 1:], q.capacity), value


def que_modify(q: QueState, interval: Interval, value: bool) -> QueState:
    """Overwrite Maybe cells with indexes in [lo, hi] by value.

    Settled cells are untouched; positions beyond the occupancy (warm-up)
    are skipped; an empty interval (lo > hi) changes nothing.
    """
    lo, hi = interval
    if lo > hi or lo >= q.occupancy:
        return q
    cells = list(q.cells)
    for k in range(lo, min(hi, q.occupancy - 1) + 1):
        if cells[k] is MAYBE:
            cells[k] = value
    return QueState(tuple(cells), q.capacity)


# ---------------------------------------------------------------------------
# Abstract and evaluator machines
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AmProgram:
    """One abstract machine of an EM.

    op0/op1 select which of the EM's operand streams feed the machine
    (e.g. the until realization has a wire machine reading stream 1).
    Intervals may be empty (lo > hi), in which case the polarity never
    modifies even when its mod flag is set.
    """

    opcode: str
    op0: int
    op1: Optional[int]
    top_interval: Interval
    bot_interval: Interval
    mod_top: bool
    mod_bot: bool


@dataclass(frozen=True)
class EvaluatorMachine:
    """1-3 abstract machines sharing one que, realizing one MTL operator."""

    kind: str
    ams: tuple[AmProgram, ...]
    head: int
    min_head: int
    arity: int


def em_build(kind: str, head: int, interval: Optional[Interval] = None) -> EvaluatorMachine:
    """Instantiate the machine programming for a single MTL operator.

    kind is one of not/and/or/implies/next/box/diamond/until, plus the
    synthetic pass-through 'wire'. Interval operators require interval=(t1,t2);
    until with t1 >= 1 takes three machines, with t1 = 0 two.
    """
    temporal = kind in ("box", "diamond", "until")
    if temporal:
        if interval is None:
            raise ValueError(f"{kind} needs an interval")
        t1, t2 = interval
        if not 0 <= t1 <= t2:
            raise ValueError(f"bad interval [{t1},{t2}]")
    elif interval is not None:
        raise ValueError(f"{kind} takes no interval")

    if kind in ("not", "and", "or", "implies", "wire"):
        lo_head = 1
        opcode = "wire" if kind == "wire" else kind
        arity = 2 if kind in ("and", "or", "implies") else 1
        ams = (AmProgram(opcode, 0, 1 if arity == 2 else None, (0, 0), (0, 0), True, True),)
    elif kind == "next":
        lo_head = 2
        arity = 1
        ams = (AmProgram("wire", 0, None, (1, 1), (1, 1), True, True),)
    elif kind == "box":
        lo_head = t2 + 1
        arity = 1
        ams = (AmProgram("wire", 0, None, (t2, t2), (t1, t2), True, True),)
    elif kind == "diamond":
        lo_head = t2 + 1
        arity = 1
        ams = (AmProgram("wire", 0, None, (t1, t2), (t2, t2), True, True),)
    elif kind == "until":
        lo_head = t2 + 1
        arity = 2
        if t1 >= 1:
            ams = (
                AmProgram("wire", 0, None, (0, 0), (0, t1 - 1), False, True),
                AmProgram("wire", 1, None, (t1, t2), (t2, t2), True, True),
                AmProgram("or", 0, 1, (0, 0), (t1, t2 - 1), False, True),
            )
        else:
            ams = (
                AmProgram("or", 0, 1, (0, 0), (0, t2 - 1), False, True),
                AmProgram("wire", 1, None, (0, t2), (t2, t2), True, True),
            )
    else:
        raise ValueError(f"unknown operator kind {kind!r}")

    if head < lo_head:
        raise ValueError(f"head {head} below the minimum {lo_head} for {kind}")
    return EvaluatorMachine(kind, ams, head, lo_head, arity)


@dataclass(frozen=True)
class StepTrace:
    """Everything one shared-que step did, for golden-table checks."""

    results: tuple[bool, ...]
    after_add: tuple
    fired: tuple[tuple[bool, Interval], ...]  # (value, interval) per firing machine
    after_modify: tuple
    after_del: tuple
    verdict: Optional[bool]


def em_step_trace(
    em: EvaluatorMachine, q: QueState, op0: bool, op1: Optional[bool] = None
) -> tuple[QueState, StepTrace]:
    if em.arity == 2 and op1 is None:
        raise ValueError(f"{em.kind} needs two operand values")
    if em.arity == 1 and op1 is not None:
        raise ValueError(f"{em.kind} takes one operand value")
    operands = (op0, op1)

    q = que_add(q)
    after_add = q.cells
    results = []
    fired = []
    touched: list[set[int]] = []
    for am in em.ams:
        res = am_result(
            am.opcode, operands[am.op0], None if am.op1 is None else operands[am.op1]
        )
        results.append(res)
        mod = am.mod_top if res else am.mod_bot
        interval = am.top_interval if res else am.bot_interval
        if mod:
            # Cells this machine modifies, judged against the post-add
            # snapshot so an earlier modify cannot mask an overlap.
            lo, hi = interval
            touched.append(
                {
                    k
                    for k in range(lo, min(hi + 1, len(after_add)))
                    if after_add[k] is MAYBE
                }
            )
            q = que_modify(q, interval, res)
            fired.append((res, interval))
    # The firing machines of one step must write disjoint cells; overlap
    # would make the shared-que result order-dependent.
    for a in range(len(touched)):
        for b in range(a + 1, len(touched)):
            if touched[a] & touched[b]:
                raise HardFault(
                    f"machines of {em.kind} modified common cells {touched[a] & touched[b]}"
                )
    after_modify = q.cells
    q, verdict = que_del(q, em.head)
    assert q.occupancy <= em.head + 1, "occupancy exceeded head+1"
    return q, StepTrace(tuple(results), after_add, tuple(fired), after_modify, q.cells, verdict)


def em_step(
    em: EvaluatorMachine, q: QueState, op0: bool, op1: Optional[bool] = None
) -> tuple[QueState, Optional[bool]]:
    q, tr = em_step_trace(em, q, op0, op1)
    return q, tr.verdict


def em_run(
    em: EvaluatorMachine,
    stream0: Sequence[bool],
    stream1: Optional[Sequence[bool]] = None,
) -> list[bool]:
    """Fold the EM over operand streams; the verdict emitted at step i is
    for time i - head, so the returned list is indexed by time."""
    if em.arity == 2:
        if stream1 is None or len(stream1) != len(stream0):
            raise ValueError("need two operand streams of equal length")
    elif stream1 is not None:
        raise ValueError(f"{em.kind} takes one operand stream")
    q = empty_que(em.head + 1)
    verdicts = []
    for i, a in enumerate(stream0):
        q, verdict = em_step(em, q, a, stream1[i] if em.arity == 2 else None)
        if verdict is not None:
            verdicts.append(verdict)
    return verdicts
