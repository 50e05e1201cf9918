"""Synthetic trace generators for exercising the analyzer.

Two workloads are provided. ``gen_pageramp`` is a sawtooth: the set of
claimed data pages grows from 0 to a maximum and shrinks back, several
times over, touching every stride-th claimed page after each step. Its
data working set ramps up and down accordingly. ``gen_step`` produces a
flat working set with a single short bump, which is the canonical input
for peak detector tests.

Both are fully deterministic: the same config yields the same record
sequence, byte for byte once serialized.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

from .trace import AccessKind, CallStackDecl, TraceEvent

# All generated instruction fetches walk a small fixed code region so the
# instruction working set stays a few pages, like a tight loop would.
CODE_BASE = 0x0040_0000
CODE_PAGES = 4
INSN_BYTES = 4

# Synthetic provenance attached to pageramp stores: the touch loop frame,
# then the ramp driver frame. Purely decorative, but it exercises the
# stack declaration / peak annotation path end to end.
_PAGERAMP_STACK_ID = 0
_PAGERAMP_FRAMES = ("pageramp.c:21", "pageramp.c:48")


def _check_positive(name: str, value: int, minimum: int = 1) -> None:
    if value < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {value}")


def _check_page_size(page_size: int) -> None:
    if page_size < 256 or page_size & (page_size - 1):
        raise ValueError(f"page_size must be a power of two >= 256, got {page_size}")


class _CodeRegion:
    """Doles out instruction fetches cycling through the code pages."""

    def __init__(self, page_size: int):
        self._wrap = CODE_PAGES * page_size
        self._offset = 0

    def fetch(self, stack_ref: int | None = None) -> TraceEvent:
        ev = TraceEvent(
            AccessKind.INSN_FETCH, CODE_BASE + self._offset, INSN_BYTES, 0, stack_ref
        )
        self._offset = (self._offset + INSN_BYTES) % self._wrap
        return ev


@dataclass
class PagerampConfig:
    """Sawtooth workload parameters.

    ``insns_per_touch`` sets compute density (fetches preceding each
    store); ``insns_per_step`` is the dwell spent in each claim/release
    step itself, modeling the map/unmap bookkeeping a real program does
    between touch passes. ``pages_per_step`` is the claim granularity.
    """

    max_pages: int = 1024
    stride: int = 2
    cycles: int = 10
    insns_per_touch: int = 1
    insns_per_step: int = 16
    pages_per_step: int = 1
    base_address: int = 0x1000_0000
    page_size: int = 4096

    def __post_init__(self) -> None:
        _check_positive("max_pages", self.max_pages)
        _check_positive("stride", self.stride)
        _check_positive("cycles", self.cycles)
        _check_positive("insns_per_touch", self.insns_per_touch)
        _check_positive("insns_per_step", self.insns_per_step, minimum=0)
        _check_positive("pages_per_step", self.pages_per_step)
        _check_positive("base_address", self.base_address, minimum=0)
        _check_page_size(self.page_size)

    @property
    def touch_pass_insns(self) -> int:
        """Instruction cost of one claim/release step at full claim."""
        full_touches = -(-self.max_pages // self.stride)  # ceil
        return self.insns_per_step + self.insns_per_touch * full_touches


def gen_pageramp(config: PagerampConfig | None = None) -> Iterator[TraceEvent | CallStackDecl]:
    """Yield the sawtooth workload as a lazy record stream.

    Per cycle the claimed page count rises from 0 to max_pages and
    falls back to 0 in pages_per_step increments. After every step the
    workload touches page 0, stride, 2*stride, ... of the claimed
    prefix with one single-byte store each, preceded by
    insns_per_touch instruction fetches. Stores never leave
    [base_address, base_address + max_pages * page_size).
    """
    cfg = config if config is not None else PagerampConfig()
    code = _CodeRegion(cfg.page_size)
    ref = _PAGERAMP_STACK_ID
    yield CallStackDecl(ref, _PAGERAMP_FRAMES)

    def pass_records(claimed: int) -> Iterator[TraceEvent]:
        for _ in range(cfg.insns_per_step):
            yield code.fetch(ref)
        for page in range(0, claimed, cfg.stride):
            for _ in range(cfg.insns_per_touch):
                yield code.fetch(ref)
            yield TraceEvent(
                AccessKind.DATA_STORE,
                cfg.base_address + page * cfg.page_size,
                1,
                0,
                ref,
            )

    for _ in range(cfg.cycles):
        claimed = 0
        while claimed < cfg.max_pages:
            claimed = min(claimed + cfg.pages_per_step, cfg.max_pages)
            yield from pass_records(claimed)
        while claimed > 0:
            claimed = max(claimed - cfg.pages_per_step, 0)
            yield from pass_records(claimed)


@dataclass
class StepConfig:
    """Step workload parameters.

    Every emitted interval is exactly ``interval_insns`` instructions
    long, so analyzing with tau = every = interval_insns yields one
    sample per interval whose data WSS equals the page count touched
    in it. ``repeats`` repeats the flat-then-bump pattern.
    """

    interval_insns: int = 1000
    repeats: int = 1
    base_address: int = 0x2000_0000
    page_size: int = 4096

    def __post_init__(self) -> None:
        _check_positive("interval_insns", self.interval_insns)
        _check_positive("repeats", self.repeats)
        _check_positive("base_address", self.base_address, minimum=0)
        _check_page_size(self.page_size)


def gen_step(
    flat_pages: int,
    step_pages: int,
    flat_samples: int,
    config: StepConfig | None = None,
) -> Iterator[TraceEvent]:
    """Yield a flat workload with one short working set bump per repeat.

    The pattern is flat_samples intervals touching flat_pages distinct
    pages, one interval touching flat_pages + step_pages, repeated
    ``config.repeats`` times, then a flat tail of flat_samples
    intervals. step_pages = 0 degenerates to a constant series.
    """
    cfg = config if config is not None else StepConfig()
    _check_positive("flat_pages", flat_pages)
    _check_positive("step_pages", step_pages, minimum=0)
    _check_positive("flat_samples", flat_samples)
    if cfg.interval_insns < flat_pages + step_pages:
        raise ValueError(
            f"interval_insns ({cfg.interval_insns}) must cover "
            f"flat_pages + step_pages ({flat_pages + step_pages})"
        )
    return _step_events(flat_pages, step_pages, flat_samples, cfg)


def _step_events(
    flat_pages: int,
    step_pages: int,
    flat_samples: int,
    cfg: StepConfig,
) -> Iterator[TraceEvent]:
    code = _CodeRegion(cfg.page_size)

    def interval(npages: int) -> Iterator[TraceEvent]:
        for page in range(npages):
            yield code.fetch()
            yield TraceEvent(
                AccessKind.DATA_STORE,
                cfg.base_address + page * cfg.page_size,
                1,
                0,
            )
        for _ in range(cfg.interval_insns - npages):
            yield code.fetch()

    for _ in range(cfg.repeats):
        for _ in range(flat_samples):
            yield from interval(flat_pages)
        yield from interval(flat_pages + step_pages)
    for _ in range(flat_samples):
        yield from interval(flat_pages)
