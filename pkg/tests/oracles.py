"""Independent reference implementations the real modules are checked
against. Everything here recomputes results from first principles with
none of the package's data structures: the working set oracle rescans a
flat (timestamp, page) list per sample instead of keeping a page table,
and the peak oracle is a direct transliteration of the detector's
recurrences. Keep this file boring."""

from __future__ import annotations

import math
import random

from workset.trace import AccessKind, TraceEvent


def expand_accesses(events, page_size, thread=None):
    """Walk raw events once, assigning timestamps by counting fetches,
    and expand every access into (timestamp, page) pairs per stream.
    ``thread`` filters the recorded accesses but never the clock."""
    shift = page_size.bit_length() - 1
    insn, data = [], []
    now = 0
    for ev in events:
        if not isinstance(ev, TraceEvent):
            continue
        is_fetch = ev.kind is AccessKind.INSN_FETCH
        if is_fetch:
            now += 1
        if thread is not None and ev.thread != thread:
            continue
        first = ev.address >> shift
        last = (ev.address + ev.size - 1) >> shift
        target = insn if is_fetch else data
        for page in range(first, last + 1):
            target.append((now, page))
    return insn, data, now


def slow_wss_series(events, tau, every, page_size, thread=None):
    """Brute force: for every sampling instant, rescan the access lists
    and count distinct pages inside the half-open window (t - tau, t]."""
    insn, data, final = expand_accesses(events, page_size, thread)
    out = []
    for t in range(every, final + 1, every):
        lo = t - tau
        wi = len({p for ts, p in insn if lo < ts <= t})
        wd = len({p for ts, p in data if lo < ts <= t})
        out.append((t, wi, wd))
    return out


def fast_wss_series(events, tau, every, page_size, thread=None):
    """Same recount per sample, vectorized so big randomized traces stay
    affordable: timestamps are nondecreasing, so each window is a slice
    located by bisection and counted with numpy's unique."""
    import numpy as np

    insn, data, final = expand_accesses(events, page_size, thread)
    out = []
    arrays = []
    for pairs in (insn, data):
        if pairs:
            ts = np.array([x[0] for x in pairs], dtype=np.int64)
            pg = np.array([x[1] for x in pairs], dtype=np.int64)
        else:
            ts = np.empty(0, dtype=np.int64)
            pg = np.empty(0, dtype=np.int64)
        arrays.append((ts, pg))
    for t in range(every, final + 1, every):
        counts = []
        for ts, pg in arrays:
            lo = np.searchsorted(ts, t - tau, side="right")
            hi = np.searchsorted(ts, t, side="right")
            counts.append(len(np.unique(pg[lo:hi])))
        out.append((t, counts[0], counts[1]))
    return out


def reference_peak_series(values, alpha=0.3, phi=0.2, g=1.0, eps=1e-9):
    """Scalar reference for the peak recurrences. Returns a list of
    (is_peak, distance, threshold, dispersion, mean, var) tuples, the
    statistics being the post-update state."""
    out = []
    mean = var = None
    for x in values:
        if mean is None:
            mean, var = float(x), 0.0
            out.append((False, 0.0, 0.0, 0.0, mean, var))
            continue
        distance = abs(x - mean)
        dispersion = var / mean if mean > eps else 0.0
        c = 1.0 - math.exp(-dispersion / 2.0)
        threshold = c * g * var + (1.0 - c) * g * mean
        is_peak = distance > threshold
        value = phi * x + (1.0 - phi) * mean if is_peak else float(x)
        prev_mean = mean
        mean = alpha * value + (1.0 - alpha) * prev_mean
        var = alpha * (value - prev_mean) ** 2 + (1.0 - alpha) * var
        out.append((is_peak, distance, threshold, dispersion, mean, var))
    return out


def make_random_events(
    rng: random.Random,
    n: int,
    insn_pages: int = 16,
    data_pages: int = 64,
    page_size: int = 4096,
    threads: tuple[int, ...] = (0,),
    straddle: bool = False,
):
    """Random but well-formed event list over small page pools."""
    insn_base = 0x0040_0000
    data_base = 0x1000_0000
    events = []
    for _ in range(n):
        roll = rng.random()
        thread = rng.choice(threads)
        if roll < 0.5:
            page = rng.randrange(insn_pages)
            # fetches stay aligned so one fetch touches one page
            offset = rng.randrange(page_size // 4) * 4
            events.append(
                TraceEvent(AccessKind.INSN_FETCH, insn_base + page * page_size + offset, 4, thread)
            )
        else:
            kind = rng.choice(
                (AccessKind.DATA_LOAD, AccessKind.DATA_STORE, AccessKind.DATA_MODIFY)
            )
            page = rng.randrange(data_pages)
            if straddle and rng.random() < 0.05:
                offset = page_size - rng.choice((1, 2, 3))
                size = rng.choice((4, 8, 16))
            else:
                offset = rng.randrange(page_size - 16)
                size = rng.choice((1, 2, 4, 8))
            events.append(
                TraceEvent(kind, data_base + page * page_size + offset, size, thread)
            )
    return events
