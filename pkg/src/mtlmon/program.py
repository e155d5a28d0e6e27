"""Hardware-level monitor configuration records.

These mirror the fabric's programming registers field for field. A PE record
has no mod-enable flags: a polarity that must never modify carries the empty
interval sentinel (1, 0) instead, which the que skips.

Routing: the per-PE route fields are AP indices, meaningful only for
operand slots whose source flag selects the AP bus (0 otherwise). Que-to-PE
routing is carried by each que's reader fields. The multi-machine until
realization needs its operand streams at more ports than one reader field
can name; the extra taps are implied by the realization's fixed shape (two
wire machines and an or machine on one result que) and reconstructed by
``resolve_operands``, so the register widths stay untouched.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import AllocationError

OPCODE_BITS = {"wire": 0, "not": 1, "or": 2, "and": 3, "implies": 4}
OPCODE_NAMES = {v: k for k, v in OPCODE_BITS.items()}
OPCODE_ARITY = {"wire": 1, "not": 1, "or": 2, "and": 2, "implies": 2}

# lo > hi means "this polarity never modifies"; canonical encoding (1, 0).
EMPTY_INTERVAL = (1, 0)


def is_empty(interval: tuple[int, int]) -> bool:
    return interval[0] > interval[1]


def ceil_log2(n: int) -> int:
    """Bits needed to address n distinct values (0 for n == 1)."""
    if n < 1:
        raise ValueError("need n >= 1")
    return (n - 1).bit_length()


@dataclass(frozen=True)
class FabricConfig:
    n_pe: int
    n_q: int
    n_ap: int
    q_sz: int

    def __post_init__(self):
        for name in ("n_pe", "n_q", "n_ap", "q_sz"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")

    # Per-record widths of the programming registers.
    @property
    def pe_bits(self) -> int:
        return 6 + ceil_log2(self.n_q) + 4 * ceil_log2(self.q_sz)

    @property
    def q_bits(self) -> int:
        return 3 + ceil_log2(self.n_pe) + ceil_log2(self.q_sz)

    @property
    def route_bits(self) -> int:
        return 2 * ceil_log2(self.n_ap)

    @property
    def body_bits(self) -> int:
        return self.n_pe * self.pe_bits + self.n_q * self.q_bits + self.n_pe * self.route_bits

    @property
    def body_bytes(self) -> int:
        return (self.body_bits + 7) // 8


@dataclass(frozen=True)
class PeConfig:
    is_active: bool
    op0_from_que: bool
    op1_from_que: bool
    opcode: str
    r_qid: int
    top_interval: tuple[int, int]
    bot_interval: tuple[int, int]


@dataclass(frozen=True)
class QConfig:
    is_active: bool
    is_verdict: bool
    reader_pe: int
    inp_no: int
    head: int


INACTIVE_PE = PeConfig(False, False, False, "wire", 0, (0, 0), (0, 0))
INACTIVE_Q = QConfig(False, False, 0, 0, 0)


@dataclass(frozen=True)
class MonitorProgram:
    """A complete fabric configuration plus the latency it reports.

    routes[pe] = (op0 route, op1 route); each entry is an AP index or a que
    id depending on the PE's source flags. latency is the height of the
    root: the verdict emitted at running cycle c (0-based) is for time
    c - latency + 1.
    """

    config: FabricConfig
    pes: tuple[PeConfig, ...]
    qs: tuple[QConfig, ...]
    routes: tuple[tuple[int, int], ...]
    latency: int

    def __post_init__(self):
        if len(self.pes) != self.config.n_pe or len(self.qs) != self.config.n_q:
            raise ValueError("record counts do not match the configuration")
        if len(self.routes) != self.config.n_pe:
            raise ValueError("need one route pair per PE")
        if sum(1 for q in self.qs if q.is_active and q.is_verdict) > 1:
            raise ValueError("at most one verdict que")

    @property
    def verdict_qid(self) -> int | None:
        for qid, q in enumerate(self.qs):
            if q.is_active and q.is_verdict:
                return qid
        return None


def _slot_from_que(pe: PeConfig, slot: int) -> bool:
    return pe.op0_from_que if slot == 0 else pe.op1_from_que


def resolve_operands(
    pes: tuple[PeConfig, ...], qs: tuple[QConfig, ...]
) -> dict[tuple[int, int], int]:
    """Map every que-sourced (pe, slot) port to the que that feeds it.

    Primary routes come from the reader fields of the ques. An or machine
    inside a multi-machine until shares the streams of its wire machines:
    in a (wire, wire, or) result-que group the or taps the wires' first
    operands, in an (or, wire) group it taps the wire for its second
    operand. Anything else left unresolved is a misprogrammed monitor.
    """
    sources: dict[tuple[int, int], int] = {}
    for qid, q in enumerate(qs):
        if not q.is_active or q.is_verdict:
            continue
        port = (q.reader_pe, q.inp_no)
        if port in sources:
            raise AllocationError(
                f"two ques name reader port PE{port[0]}.{port[1]}"
            )
        sources[port] = qid

    groups: dict[int, list[int]] = {}
    for pid, pe in enumerate(pes):
        if pe.is_active:
            groups.setdefault(pe.r_qid, []).append(pid)

    def unresolved(pid: int) -> list[int]:
        pe = pes[pid]
        return [
            slot
            for slot in range(OPCODE_ARITY[pe.opcode])
            if _slot_from_que(pe, slot) and (pid, slot) not in sources
        ]

    for members in groups.values():
        for pid in members:
            missing = unresolved(pid)
            if not missing:
                continue
            opcodes = [pes[m].opcode for m in members]
            if opcodes == ["wire", "wire", "or"] and pid == members[2]:
                taps = {0: (members[0], 0), 1: (members[1], 0)}
            elif opcodes == ["or", "wire"] and pid == members[0]:
                taps = {1: (members[1], 0)}
            else:
                raise AllocationError(
                    f"PE{pid} operand {missing[0]} has no que routed to it"
                )
            for slot in missing:
                if slot not in taps or taps[slot] not in sources:
                    raise AllocationError(
                        f"PE{pid} operand {slot} has no que routed to it"
                    )
                sources[(pid, slot)] = sources[taps[slot]]
    return sources


def derive_latency(
    pes: tuple[PeConfig, ...],
    qs: tuple[QConfig, ...],
    sources: dict[tuple[int, int], int] | None = None,
) -> int:
    """Height of the verdict que, recomputed from the records alone.

    height(q) = head + 1 + the tallest que feeding any PE that writes q
    (0 when all writers read APs). This is what a freshly decoded program
    reports, and the fabric's own warm-up realizes it exactly.
    """
    if sources is None:
        sources = resolve_operands(pes, qs)
    writers: dict[int, list[int]] = {}
    for pid, pe in enumerate(pes):
        if pe.is_active:
            writers.setdefault(pe.r_qid, []).append(pid)

    heights: dict[int, int] = {}
    in_progress: set[int] = set()

    def height(qid: int) -> int:
        if qid in heights:
            return heights[qid]
        if qid in in_progress:
            raise AllocationError("cyclic que routing")
        in_progress.add(qid)
        depth = 0
        for pid in writers.get(qid, ()):
            for slot in range(OPCODE_ARITY[pes[pid].opcode]):
                if _slot_from_que(pes[pid], slot) and (pid, slot) in sources:
                    depth = max(depth, height(sources[(pid, slot)]))
        in_progress.discard(qid)
        heights[qid] = qs[qid].head + 1 + depth
        return heights[qid]

    for qid, q in enumerate(qs):
        if q.is_active and q.is_verdict:
            return height(qid)
    return 0
