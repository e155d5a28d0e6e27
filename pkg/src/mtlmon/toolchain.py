"""End-to-end pipeline helpers: compile a formula, drive the fabric over a
trace, diff the emitted verdicts against the brute-force evaluation, and the
deterministic random harness built on top of that.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from . import formula as F
from .bitstream import encode_program
from .compiler import compile_formula
from .errors import AllocationError
from .fabric import Fabric
from .oracle import oracle_verdicts
from .program import FabricConfig, MonitorProgram
from .trace import Trace, make_trace

DEFAULT_CONFIG = FabricConfig(n_pe=16, n_q=16, n_ap=16, q_sz=256)

# (time, fabric verdict or None if missing, reference verdict or None if
# the reference is undefined there)
Mismatch = tuple[int, bool | None, bool | None]


@dataclass
class RunReport:
    formula_text: str
    config: FabricConfig
    latency: int
    verdicts: list[tuple[int, bool]]
    mismatches: list[Mismatch]
    programming_cycles: int
    run_cycles: int
    constant: bool | None = None

    @property
    def ok(self) -> bool:
        return not self.mismatches


def run_program(program: MonitorProgram, trace: Trace) -> tuple[list[tuple[int, bool]], Fabric]:
    """Program a fresh fabric byte by byte and step it over the trace."""
    fabric = Fabric(program.config)
    fabric.load(encode_program(program))
    return stream_trace(fabric, trace), fabric


def stream_trace(fabric: Fabric, trace: Trace) -> list[tuple[int, bool]]:
    verdicts = []
    for row in trace.events:
        emitted = fabric.step(row)
        if emitted is not None:
            verdicts.append(emitted)
    return verdicts


def diff_verdicts(
    emitted: list[tuple[int, bool]], reference: list[bool], expected_times: range
) -> list[Mismatch]:
    """Mismatches between the fabric stream and the reference.

    Flags wrong values, verdicts at unexpected times (including duplicates
    or times the reference leaves undefined), and expected times that never
    arrived. Empty result == exact agreement with one verdict per step
    after warm-up.
    """
    mismatches: list[Mismatch] = []
    seen: dict[int, bool] = {}
    for t, v in emitted:
        ref = reference[t] if 0 <= t < len(reference) else None
        if t not in expected_times or t in seen:
            mismatches.append((t, v, ref))
        elif ref is None or v != ref:
            mismatches.append((t, v, ref))
        seen.setdefault(t, v)
    for t in expected_times:
        if t not in seen:
            mismatches.append((t, None, reference[t] if t < len(reference) else None))
    return sorted(mismatches)


def expected_emission(n_events: int, latency: int) -> range:
    """Times a warmed-up monitor emits over n events: 0 .. n - latency."""
    return range(0, max(0, n_events - latency + 1))


def check_formula(
    f: F.Formula | str,
    config: FabricConfig,
    trace: Trace,
    forced_heads: dict[int, int] | None = None,
) -> RunReport:
    """Compile, run, and diff against the brute-force evaluation."""
    parsed = F.parse(f) if isinstance(f, str) else f
    text = F.pretty(parsed)
    reference = oracle_verdicts(parsed, trace)
    compiled = compile_formula(parsed, config, forced_heads)
    if isinstance(compiled, bool):
        times = range(len(reference))
        verdicts = [(t, compiled) for t in times]
        mism = diff_verdicts(verdicts, reference, times)
        return RunReport(text, config, 0, verdicts, mism, 0, len(trace), constant=compiled)
    verdicts, fabric = run_program(compiled, trace)
    mism = diff_verdicts(verdicts, reference, expected_emission(len(trace), compiled.latency))
    return RunReport(
        text, config, compiled.latency, verdicts, mism,
        fabric.programming_cycles, len(trace),
    )


# ---------------------------------------------------------------------------
# Deterministic random harness
# ---------------------------------------------------------------------------

# Operator draw weights: Boolean connectives 40% (split evenly), next 15%,
# box 15%, diamond 15%, until 15% (t1 = 0 for half the untils, exercising
# both of its machine realizations).
_OPERATORS = (
    ("not",) * 10 + ("and",) * 10 + ("or",) * 10 + ("implies",) * 10
    + ("next",) * 15 + ("box",) * 15 + ("diamond",) * 15 + ("until",) * 15
)


def random_formula(rng: random.Random, max_depth: int, max_t2: int, ap_pool: int = 4) -> F.Formula:
    """One random formula with operator nesting depth exactly bounded by
    max_depth and a root that is always an operator."""

    def leaf() -> F.Formula:
        return F.AP(rng.randrange(ap_pool))

    def interval() -> tuple[int, int]:
        hi = rng.randint(0, max_t2)
        lo = rng.randint(0, hi)
        return lo, hi

    def gen(depth: int) -> F.Formula:
        if depth == 0:
            return leaf()
        kind = rng.choice(_OPERATORS)
        # Subtrees may stop early so sizes vary, but never at the root.
        def child() -> F.Formula:
            if depth - 1 > 0 and rng.random() < 0.25:
                return leaf()
            return gen(depth - 1)

        if kind == "not":
            return F.Not(child())
        if kind == "and":
            return F.And(child(), child())
        if kind == "or":
            return F.Or(child(), child())
        if kind == "implies":
            return F.Implies(child(), child())
        if kind == "next":
            return F.Next(child())
        if kind == "box":
            lo, hi = interval()
            return F.Box(child(), lo, hi)
        if kind == "diamond":
            lo, hi = interval()
            return F.Diamond(child(), lo, hi)
        hi = rng.randint(0, max_t2)
        if hi >= 1 and rng.random() < 0.5:
            lo = rng.randint(1, hi)
        else:
            lo = 0
        return F.Until(child(), child(), lo, hi)

    return gen(max_depth)


def random_fitting_formula(
    rng: random.Random, max_depth: int, max_t2: int, config: FabricConfig, ap_pool: int = 4
) -> tuple[F.Formula, MonitorProgram]:
    """Draw formulas until one fits the fabric (PE/Q/que-size limits).

    Redraws consume the generator stream, so a fixed seed still yields a
    fixed sequence of accepted formulas.
    """
    for _ in range(1000):
        f = random_formula(rng, max_depth, max_t2, ap_pool)
        try:
            compiled = compile_formula(f, config)
        except AllocationError:
            continue
        if isinstance(compiled, bool):  # cannot happen with AP leaves
            continue
        return f, compiled
    raise AllocationError(
        f"no formula of depth {max_depth} fits the fabric after 1000 draws"
    )


def random_trace(rng: random.Random, length: int, width: int) -> Trace:
    return make_trace(
        [[rng.random() < 0.5 for _ in range(width)] for _ in range(length)]
    )


@dataclass
class FuzzSummary:
    iterations: int
    passes: int
    failures: list[str] = field(default_factory=list)
    throughput_violations: int = 0
    reprogram_divergences: int = 0

    @property
    def ok(self) -> bool:
        return self.passes == self.iterations

    def render(self) -> str:
        lines = [
            f"iterations: {self.iterations}",
            f"passes: {self.passes}",
            f"failures: {self.iterations - self.passes}",
            f"throughput violations: {self.throughput_violations}",
            f"reprogram divergences: {self.reprogram_divergences}",
        ]
        lines.extend(self.failures[:20])
        return "\n".join(lines)


def _throughput_ok(verdicts: list[tuple[int, bool]], n_events: int, latency: int) -> bool:
    return [t for t, _ in verdicts] == list(expected_emission(n_events, latency))


def run_fuzz(
    seed: int,
    count: int,
    max_depth: int,
    max_t2: int,
    config: FabricConfig = DEFAULT_CONFIG,
    trace_len: int = 64,
    ap_pool: int = 4,
) -> FuzzSummary:
    """Random formulas and traces against the brute-force evaluation.

    Every iteration also reprograms the fabric mid-run with a second
    formula and requires the post-reprogram behavior to be byte-identical
    to a freshly programmed fabric.
    """
    rng = random.Random(seed)
    summary = FuzzSummary(iterations=count, passes=0)
    for it in range(count):
        problems: list[str] = []

        first, first_prog = random_fitting_formula(rng, max_depth, max_t2, config, ap_pool)
        first_trace = random_trace(rng, trace_len, config.n_ap)
        reference = oracle_verdicts(first, first_trace)
        fabric = Fabric(config)
        fabric.load(encode_program(first_prog))
        verdicts = stream_trace(fabric, first_trace)
        mism = diff_verdicts(verdicts, reference, expected_emission(trace_len, first_prog.latency))
        if mism:
            problems.append(f"iter {it}: {F.pretty(first)}: first mismatch {mism[0]}")
        if not _throughput_ok(verdicts, trace_len, first_prog.latency):
            summary.throughput_violations += 1
            problems.append(f"iter {it}: {F.pretty(first)}: broken emission schedule")

        second, second_prog = random_fitting_formula(rng, max_depth, max_t2, config, ap_pool)
        second_trace = random_trace(rng, trace_len, config.n_ap)
        fabric.begin_reprogram()
        fabric.load(encode_program(second_prog))
        after = stream_trace(fabric, second_trace)
        fresh, _ = run_program(second_prog, second_trace)
        if after != fresh:
            summary.reprogram_divergences += 1
            problems.append(f"iter {it}: {F.pretty(second)}: reprogram differs from fresh fabric")
        mism2 = diff_verdicts(
            after, oracle_verdicts(second, second_trace),
            expected_emission(trace_len, second_prog.latency),
        )
        if mism2:
            problems.append(f"iter {it}: {F.pretty(second)}: first mismatch {mism2[0]}")
        if not _throughput_ok(after, trace_len, second_prog.latency):
            summary.throughput_violations += 1
            problems.append(f"iter {it}: {F.pretty(second)}: broken emission schedule")

        if problems:
            summary.failures.extend(problems)
        else:
            summary.passes += 1
    return summary
