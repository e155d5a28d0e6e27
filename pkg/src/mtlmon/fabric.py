"""Cycle-accurate model of the programmable monitor hardware.

The fabric holds N_PE processing elements, N_Q ques, the AP input bus and
an 8-bit-per-cycle programming port. One running cycle works through four
interconnect phases:

1. que -> PE: the values each que deleted at the end of the previous cycle
   are on the que->PE crossbar; a PE operand port programmed with source
   "que" reads the value of its routed que.
2. PE: every active PE whose operand values are all present computes its
   boolean result and offers the selected interval (top on true, bottom on
   false) to its result que; empty-sentinel intervals offer nothing. A que
   none of whose writers computed (pipeline warm-up) idles this cycle.
3. PE -> que: offers targeting one que are coalesced per polarity into a
   single contiguous interval each.
4. que: every driven que adds, applies the coalesced true-modify then the
   false-modify, then deletes at its head; the deleted value is latched
   onto the que->PE crossbar for the next cycle, except the verdict que's
   value, which leaves through the output port immediately.

The verdict leaving at running cycle c (0-based since the program latched)
is the formula verdict for time c - latency + 1; warm-up cycles produce no
verdict because the deleted cell does not exist yet.

Reprogramming: begin_reprogram opens the programming port at any moment;
after the final byte the new configuration latches, every que clears, and
cycle accounting for verdict timing restarts, so behavior is identical to
a freshly programmed fabric.
"""

from __future__ import annotations

from collections import deque
from typing import Optional, Sequence

from .bitstream import decode_program
from .errors import AllocationError, HardFault, ProtocolError, TraceError
from .machine import MAYBE
from .program import (
    FabricConfig,
    MonitorProgram,
    OPCODE_ARITY,
    derive_latency,
    is_empty,
    resolve_operands,
)

Interval = tuple[int, int]

_OP_WIRE, _OP_NOT, _OP_OR, _OP_AND, _OP_IMPLIES = range(5)
_OP_CODE = {"wire": _OP_WIRE, "not": _OP_NOT, "or": _OP_OR, "and": _OP_AND,
            "implies": _OP_IMPLIES}


def coalesce(postings: list[tuple[Interval, bool]]) -> tuple[Optional[Interval], Optional[Interval]]:
    """Merge one cycle's interval offers to a que into (top, bottom) spans.

    Per polarity the result is [min lo, max hi]; the offers must cover that
    span without gaps, which the operator realizations guarantee. A gap
    means a machine that should have fired did not: hard fault.
    """
    top = _merge([iv for iv, pol in postings if pol])
    bot = _merge([iv for iv, pol in postings if not pol])
    return top, bot


def _merge(intervals: list[Interval]) -> Optional[Interval]:
    if not intervals:
        return None
    if len(intervals) == 1:
        return intervals[0]
    intervals = sorted(intervals)
    reach = intervals[0][1]
    for lo, hi in intervals[1:]:
        if lo > reach + 1:
            raise HardFault(f"non-contiguous coalesced interval: {intervals}")
        reach = max(reach, hi)
    return intervals[0][0], reach


class Fabric:
    """One monitor instance; strictly sequential load/step transitions."""

    def __init__(self, config: FabricConfig):
        self.config = config
        self.mode = "programming"
        self.total_cycles = 0
        self.run_cycle = 0
        self.latency = 0
        self.program: Optional[MonitorProgram] = None
        self._buffer = bytearray()
        self._ques: list[deque] = [deque() for _ in range(config.n_q)]
        self._delivered: list = [None] * config.n_q
        self._plan: list = []
        self._heads: list[int] = [0] * config.n_q
        self._driven_qids: list[int] = []
        self._verdict_qid: Optional[int] = None

    # -- programming port ---------------------------------------------------

    def begin_reprogram(self) -> None:
        """Open the programming port; idempotent, keeps the cycle counter."""
        self.mode = "programming"
        self._buffer.clear()

    def load_program_byte(self, byte: int) -> None:
        """Shift one configuration byte in; latches after the final byte."""
        if self.mode != "programming":
            raise ProtocolError("configuration byte while running; begin_reprogram first")
        if not 0 <= byte <= 0xFF:
            raise ValueError(f"not a byte: {byte}")
        self._buffer.append(byte)
        self.total_cycles += 1
        if len(self._buffer) == self.config.body_bytes:
            body = bytes(self._buffer)
            self._buffer.clear()
            self._latch(decode_program(body, self.config))

    def load(self, body: bytes) -> None:
        for byte in body:
            self.load_program_byte(byte)

    @property
    def programming_cycles(self) -> int:
        return self.config.body_bytes

    def _latch(self, program: MonitorProgram) -> None:
        sources = self._validate(program)
        self.program = program
        self.latency = derive_latency(program.pes, program.qs, sources)
        cfg = self.config
        self._plan = []
        for pid, pe in enumerate(program.pes):
            if not pe.is_active:
                continue
            arity = OPCODE_ARITY[pe.opcode]
            idx = [0, 0]
            for slot in range(arity):
                if (pid, slot) in sources:
                    idx[slot] = sources[(pid, slot)]
                else:
                    idx[slot] = program.routes[pid][slot]
            self._plan.append((
                _OP_CODE[pe.opcode],
                arity,
                pe.op0_from_que,
                idx[0],
                pe.op1_from_que,
                idx[1],
                None if is_empty(pe.top_interval) else pe.top_interval,
                None if is_empty(pe.bot_interval) else pe.bot_interval,
                pe.r_qid,
            ))
        self._heads = [q.head for q in program.qs]
        self._driven_qids = sorted({rec[8] for rec in self._plan})
        self._verdict_qid = program.verdict_qid
        self._ques = [deque() for _ in range(cfg.n_q)]
        self._delivered = [None] * cfg.n_q
        self.run_cycle = 0
        self.mode = "running"

    def _validate(self, program: MonitorProgram) -> dict[tuple[int, int], int]:
        cfg = self.config
        sources = resolve_operands(program.pes, program.qs)
        for pid, pe in enumerate(program.pes):
            if not pe.is_active:
                continue
            if not program.qs[pe.r_qid].is_active:
                raise AllocationError(f"PE{pid} writes inactive que {pe.r_qid}")
            for name, iv in (("top", pe.top_interval), ("bot", pe.bot_interval)):
                if not is_empty(iv) and not (0 <= iv[0] <= iv[1] < cfg.q_sz):
                    raise AllocationError(f"PE{pid} {name} interval {iv} exceeds que size")
            for slot in range(OPCODE_ARITY[pe.opcode]):
                from_que = pe.op0_from_que if slot == 0 else pe.op1_from_que
                if from_que:
                    src = sources[(pid, slot)]
                    if not program.qs[src].is_active:
                        raise AllocationError(
                            f"PE{pid} operand {slot} reads inactive que {src}"
                        )
                else:
                    src = program.routes[pid][slot]
                    if src >= cfg.n_ap:
                        raise AllocationError(
                            f"PE{pid} operand {slot} reads ap{src}, n_ap={cfg.n_ap}"
                        )
        for qid, q in enumerate(program.qs):
            if not q.is_active:
                continue
            if q.head >= cfg.q_sz:
                raise AllocationError(f"Q{qid} head {q.head} exceeds que size {cfg.q_sz}")
            if q.is_verdict:
                continue
            pid, slot = q.reader_pe, q.inp_no
            pe = program.pes[pid] if pid < cfg.n_pe else None
            if (
                pe is None
                or not pe.is_active
                or slot >= OPCODE_ARITY[pe.opcode]
                or not (pe.op0_from_que if slot == 0 else pe.op1_from_que)
            ):
                raise AllocationError(
                    f"Q{qid} names reader PE{pid}.{slot}, which does not take que input"
                )
        derive_latency(program.pes, program.qs, sources)  # rejects cycles
        return sources

    # -- datapath ------------------------------------------------------------

    def step(self, ap_values: Sequence[bool]) -> Optional[tuple[int, bool]]:
        """Run one monitor cycle on one event; returns (time, verdict) once
        the pipeline is warm, None during warm-up."""
        if self.mode != "running":
            raise ProtocolError("fabric is in programming mode")
        cfg = self.config
        if len(ap_values) != cfg.n_ap:
            raise TraceError(f"event width {len(ap_values)} != n_ap {cfg.n_ap}")

        delivered = self._delivered
        postings: dict[int, list] = {}
        driven: set[int] = set()
        for op, arity, q0, r0, q1, r1, top, bot, rqid in self._plan:
            v0 = delivered[r0] if q0 else ap_values[r0]
            if v0 is None:
                continue
            if arity == 2:
                v1 = delivered[r1] if q1 else ap_values[r1]
                if v1 is None:
                    continue
                if op == _OP_OR:
                    res = bool(v0 or v1)
                elif op == _OP_AND:
                    res = bool(v0 and v1)
                else:  # implies
                    res = bool((not v0) or v1)
            else:
                res = bool(not v0) if op == _OP_NOT else bool(v0)
            driven.add(rqid)
            interval = top if res else bot
            if interval is not None:
                postings.setdefault(rqid, []).append((interval, res))

        new_delivered: list = [None] * cfg.n_q
        out: Optional[bool] = None
        for qid in self._driven_qids:
            if qid not in driven:
                continue
            que = self._ques[qid]
            if len(que) >= cfg.q_sz:
                raise HardFault(f"Q{qid} overflow at capacity {cfg.q_sz}")
            que.append(MAYBE)  # cell 0 is the right end
            occ = len(que)
            top, bot = coalesce(postings.get(qid, []))
            for interval, value in ((top, True), (bot, False)):
                if interval is None:
                    continue
                lo, hi = interval
                for k in range(lo, min(hi, occ - 1) + 1):
                    if que[occ - 1 - k] is MAYBE:
                        que[occ - 1 - k] = value
            head = self._heads[qid]
            if occ > head:
                assert occ == head + 1, "occupancy ran past head+1"
                value = que.popleft()
                if value is MAYBE:
                    raise HardFault(
                        f"Q{qid} deleted unresolved cell at head {head}: misprogrammed head"
                    )
                if qid == self._verdict_qid:
                    out = value
                else:
                    new_delivered[qid] = value

        self._delivered = new_delivered
        cycle = self.run_cycle
        self.run_cycle += 1
        self.total_cycles += 1
        if out is None:
            return None
        # Compiled programs first emit at cycle latency-1, i.e. time 0;
        # hand-forced heads may emit off-schedule and the check harness
        # reports that as a mismatch rather than faulting here.
        return cycle - self.latency + 1, out
