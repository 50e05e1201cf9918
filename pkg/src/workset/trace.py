"""Memory access trace format: record types, parsing, serialization.

A trace is a line-oriented text stream. Each line is one of:

    I  <hexaddr>,<size>[ t<tid>]     instruction fetch
     L <hexaddr>,<size>[ t<tid>]     data load
     S <hexaddr>,<size>[ t<tid>]     data store
     M <hexaddr>,<size>[ t<tid>]     data modify (read+write, counted once)
    C <id>: <frame>|<frame>|...      call stack declaration
    U <tid> <id>                     thread <tid> now executes under stack <id>
    # ...                            comment (ignored), as are blank lines

Addresses are hex (optional ``0x`` prefix), sizes are decimal bytes,
``t<tid>`` is optional and defaults to thread 0. Leading whitespace in
front of the record tag is not significant. The event layout is a
superset of the memory trace text produced by common binary
instrumentation front ends, so their output can be piped in directly.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator, TextIO

log = logging.getLogger(__name__)


class Stream(Enum):
    """The two access streams tracked separately by the analyzer."""

    INSN = "insn"
    DATA = "data"


class AccessKind(Enum):
    """Event kinds; the enum value doubles as the record tag character."""

    INSN_FETCH = "I"
    DATA_LOAD = "L"
    DATA_STORE = "S"
    DATA_MODIFY = "M"

    @property
    def stream(self) -> Stream:
        return Stream.INSN if self is AccessKind.INSN_FETCH else Stream.DATA


@dataclass(slots=True)
class TraceEvent:
    """One memory access.

    ``stack_ref`` is the id of the call stack the owning thread was
    executing under when the access happened, or None if unknown.
    Instances are treated as immutable once handed out.
    """

    kind: AccessKind
    address: int
    size: int
    thread: int = 0
    stack_ref: int | None = None


@dataclass(slots=True)
class CallStackDecl:
    """Declares call stack ``id`` as a chain of frames, innermost first."""

    id: int
    frames: tuple[str, ...]


@dataclass(slots=True)
class StackActivation:
    """Marks that ``thread`` executes under stack ``stack`` from here on."""

    thread: int
    stack: int


class TraceParseError(ValueError):
    """A malformed trace line; carries the 1-based line number if known."""

    def __init__(self, message: str, lineno: int | None = None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


_KIND_BY_TAG = {k.value: k for k in AccessKind}


def parse_line(
    line: str, lineno: int | None = None
) -> TraceEvent | CallStackDecl | StackActivation | None:
    """Decode a single trace line.

    Returns None for blank lines and comments. Raises TraceParseError
    on anything that is not part of the grammar.
    """
    # split() also swallows the newline and leading indentation, so the
    # common case never allocates a stripped copy of the line
    parts = line.split()
    if not parts:
        return None
    tag = parts[0]
    if tag[0] == "#":
        return None
    kind = _KIND_BY_TAG.get(tag)
    if kind is not None:
        nparts = len(parts)
        if nparts < 2 or nparts > 3:
            raise TraceParseError(f"malformed event record {line.strip()!r}", lineno)
        body = parts[1]
        comma = body.find(",")
        if comma < 0 or body.find(",", comma + 1) >= 0:
            raise TraceParseError(f"expected '<addr>,<size>', got {body!r}", lineno)
        try:
            address = int(body[:comma], 16)
            size = int(body[comma + 1 :], 10)
        except ValueError:
            raise TraceParseError(
                f"malformed address/size field {body!r}", lineno
            ) from None
        if address < 0:
            raise TraceParseError(f"negative address {body[:comma]!r}", lineno)
        if size < 1:
            raise TraceParseError(f"size must be >= 1, got {size}", lineno)
        thread = 0
        if nparts == 3:
            tfield = parts[2]
            if len(tfield) < 2 or tfield[0] != "t" or not tfield[1:].isdigit():
                raise TraceParseError(f"malformed thread field {tfield!r}", lineno)
            thread = int(tfield[1:])
        return TraceEvent(kind, address, size, thread)
    if tag == "C":
        head, sep, rest = line.strip().partition(":")
        ident = head[1:].strip()
        if not sep or not ident.isdigit():
            raise TraceParseError(
                f"malformed call stack declaration {line.strip()!r}", lineno
            )
        frames = tuple(f.strip() for f in rest.split("|"))
        if not all(frames):
            raise TraceParseError("call stack declaration with empty frame", lineno)
        return CallStackDecl(int(ident), frames)
    if tag == "U":
        if len(parts) != 3 or not parts[1].isdigit() or not parts[2].isdigit():
            raise TraceParseError(
                f"malformed stack activation {line.strip()!r}", lineno
            )
        return StackActivation(int(parts[1]), int(parts[2]))
    raise TraceParseError(f"unknown record tag {tag!r}", lineno)


def read_trace(
    lines: Iterable[str], strict: bool = True
) -> Iterator[TraceEvent | CallStackDecl]:
    """Stream records out of a line iterable (an open file works).

    Yields events and call stack declarations in order. Activation
    records are consumed internally: each event is stamped with the
    stack id its thread was last switched to, if any. Memory use is
    bounded by the number of distinct declared stacks, not trace
    length, so arbitrarily long traces can be piped through.

    In strict mode (default) malformed lines raise TraceParseError; in
    lenient mode they are skipped with a logged warning.

    Traces of looping programs repeat event lines heavily, so parsed
    event fields are memoized per distinct line text (bounded; the memo
    resets when full). Event parsing is context-free, which makes the
    cache invisible apart from the speedup.
    """
    declared: dict[int, CallStackDecl] = {}
    current: dict[int, int] = {}
    memo: dict[str, tuple[AccessKind, int, int, int]] = {}
    for lineno, raw in enumerate(lines, 1):
        fields = memo.get(raw)
        if fields is not None:
            rec = TraceEvent(fields[0], fields[1], fields[2], fields[3])
            ref = current.get(rec.thread)
            if ref is not None:
                rec.stack_ref = ref
            yield rec
            continue
        try:
            rec = parse_line(raw, lineno)
            if rec is None:
                continue
            cls = rec.__class__
            if cls is TraceEvent:
                if len(memo) >= 65536:
                    memo.clear()
                memo[raw] = (rec.kind, rec.address, rec.size, rec.thread)
                ref = current.get(rec.thread)
                if ref is not None:
                    rec.stack_ref = ref
                yield rec
            elif cls is CallStackDecl:
                if rec.id in declared:
                    raise TraceParseError(f"duplicate call stack id {rec.id}", lineno)
                declared[rec.id] = rec
                yield rec
            else:
                if rec.stack not in declared:
                    raise TraceParseError(
                        f"activation of undeclared stack id {rec.stack}", lineno
                    )
                current[rec.thread] = rec.stack
        except TraceParseError as exc:
            if strict:
                raise
            log.warning("skipping malformed trace line: %s", exc)


def write_trace(
    records: Iterable[TraceEvent | CallStackDecl | StackActivation], out: TextIO
) -> None:
    """Serialize records to ``out`` in the trace text format.

    Stack attribution is re-encoded as activation lines: a ``U`` line
    is emitted whenever an event's stack_ref differs from what the
    reader would currently assume for that thread, so a read/write
    round trip reproduces the record sequence exactly.
    """
    declared: set[int] = set()
    current: dict[int, int] = {}
    write = out.write
    for rec in records:
        cls = rec.__class__
        if cls is TraceEvent:
            if rec.size < 1:
                raise ValueError(f"event size must be >= 1, got {rec.size}")
            ref = rec.stack_ref
            if ref is not None:
                if ref != current.get(rec.thread):
                    if ref not in declared:
                        raise ValueError(f"event references undeclared stack id {ref}")
                    write(f"U {rec.thread} {ref}\n")
                    current[rec.thread] = ref
            elif rec.thread in current:
                raise ValueError(
                    "cannot serialize an event that clears its thread's stack context"
                )
            suffix = f" t{rec.thread}\n" if rec.thread else "\n"
            kind = rec.kind
            if kind is AccessKind.INSN_FETCH:
                write(f"I  {rec.address:08x},{rec.size}{suffix}")
            else:
                write(f" {kind.value} {rec.address:08x},{rec.size}{suffix}")
        elif cls is CallStackDecl:
            if not rec.frames:
                raise ValueError("call stack declaration needs at least one frame")
            for frame in rec.frames:
                if "|" in frame or "\n" in frame or frame != frame.strip() or not frame:
                    raise ValueError(f"unserializable stack frame {frame!r}")
            if rec.id in declared:
                raise ValueError(f"duplicate call stack id {rec.id}")
            declared.add(rec.id)
            write(f"C {rec.id}: {'|'.join(rec.frames)}\n")
        elif cls is StackActivation:
            if rec.stack not in declared:
                raise ValueError(f"activation of undeclared stack id {rec.stack}")
            write(f"U {rec.thread} {rec.stack}\n")
            current[rec.thread] = rec.stack
        else:
            raise TypeError(f"cannot serialize record of type {cls.__name__}")
