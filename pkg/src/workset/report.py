"""Summaries, hot page rankings, and result emitters.

The text format is meant for eyeballs: per-stream one-line summaries,
hot page tables, and one line per detected peak. CSV and JSON are
stable machine formats (the CSV column set and JSON field names are
part of the tool's contract, see docs/result-schema.md). SVG is a
small dependency-free step plot of both WSS series with peak markers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import TYPE_CHECKING, Any, Iterable, Mapping, Sequence, TextIO

from .trace import Stream

if TYPE_CHECKING:  # avoid a runtime import cycle; engine imports us
    from .engine import AnalysisResult, PageTable, WssSample

CSV_HEADER = "t,WSS_insn,WSS_data,peak_insn,peak_data,annotation"

FORMATS = ("text", "csv", "json", "svg")


@dataclass
class Summary:
    """Per-stream totals: mean and max of the WSS samples plus the
    number of distinct pages ever seen in the stream's table."""

    stream: Stream
    avg_pages: float
    peak_pages: int
    total_pages: int
    page_size: int

    @property
    def avg_kb(self) -> float:
        return self.avg_pages * self.page_size / 1024

    @property
    def peak_kb(self) -> float:
        return self.peak_pages * self.page_size / 1024

    @property
    def total_kb(self) -> float:
        return self.total_pages * self.page_size / 1024

    def to_dict(self) -> dict[str, Any]:
        return {
            "stream": self.stream.value,
            "avg_pages": self.avg_pages,
            "peak_pages": self.peak_pages,
            "total_pages": self.total_pages,
            "page_size": self.page_size,
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "Summary":
        return cls(
            Stream(d["stream"]),
            d["avg_pages"],
            d["peak_pages"],
            d["total_pages"],
            d["page_size"],
        )


@dataclass
class HotPageEntry:
    count: int
    page: int
    info: str = ""

    def to_dict(self) -> dict[str, Any]:
        return {"count": self.count, "page": self.page, "info": self.info}

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "HotPageEntry":
        return cls(d["count"], d["page"], d["info"])


def summarize(
    samples: Sequence["WssSample"], page_table: "PageTable", stream: Stream
) -> Summary:
    """Fold one stream's sample series and page table into a Summary."""
    if stream is Stream.INSN:
        values = [s.wss_insn for s in samples]
    else:
        values = [s.wss_data for s in samples]
    avg = sum(values) / len(values) if values else 0.0
    return Summary(stream, avg, max(values, default=0), len(page_table), page_table.page_size)


def hot_pages(
    page_table: "PageTable",
    n: int | None = None,
    label_map: Mapping[int, str] | None = None,
) -> list[HotPageEntry]:
    """Rank pages by access count (descending), page number breaking ties.

    n limits the list length; None means all pages. A page's info text
    comes from label_map when it has an entry, else from the innermost
    stack frame recorded at the page's first touch, else stays blank.
    """
    if n is not None and n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    entries = []
    for rec in page_table.records():
        info = ""
        if label_map is not None and rec.page in label_map:
            info = label_map[rec.page]
        elif rec.first_info[1] is not None:
            info = rec.first_info[1]
        entries.append(HotPageEntry(rec.access_count, rec.page, info))
    entries.sort(key=lambda e: (-e.count, e.page))
    return entries if n is None else entries[:n]


def load_label_map(lines: Iterable[str]) -> dict[int, str]:
    """Parse a page label sidecar: '<hexpage> <label>' per line.

    Blank lines and '#' comments are skipped; the label is everything
    after the first whitespace.
    """
    out: dict[int, str] = {}
    for lineno, raw in enumerate(lines, 1):
        s = raw.strip()
        if not s or s[0] == "#":
            continue
        page_s, _, label = s.partition(" ")
        label = label.strip()
        try:
            page = int(page_s, 16)
        except ValueError:
            raise ValueError(f"label map line {lineno}: bad page {page_s!r}") from None
        if not label:
            raise ValueError(f"label map line {lineno}: missing label")
        out[page] = label
    return out


# --------------------------------------------------------------------------
# emitters


def emit(result: "AnalysisResult", format: str, sink: TextIO) -> None:
    """Render a result to ``sink`` in one of FORMATS."""
    if format == "text":
        emit_text(result, sink)
    elif format == "csv":
        emit_csv(result, sink)
    elif format == "json":
        emit_json(result, sink)
    elif format == "svg":
        emit_svg(result, sink)
    else:
        raise ValueError(f"unknown format {format!r} (expected one of {FORMATS})")


def _kb_text(value: float) -> str:
    # keep integer kB figures exact; only fractional ones get a decimal point
    return str(int(value)) if value == int(value) else f"{value:g}"


def format_summary(summary: Summary) -> str:
    label = "Insn" if summary.stream is Stream.INSN else "Data"
    return (
        f"{label} avg/peak/total: "
        f"{summary.avg_pages:.1f}/{summary.peak_pages}/{summary.total_pages} pages "
        f"({summary.avg_kb:.0f}/{_kb_text(summary.peak_kb)}/{_kb_text(summary.total_kb)} kB)"
    )


def _annotation_loc(frames: Sequence[str]) -> str:
    return "|".join(frames) if frames else "?"


def _emit_text_body(result: "AnalysisResult", write) -> None:
    write(format_summary(result.insn.summary) + "\n")
    write(format_summary(result.data.summary) + "\n")
    for stream_result, name in ((result.insn, "Insn"), (result.data, "Data")):
        entries = stream_result.hot_pages
        write(f"\n{name} pages ({stream_result.summary.total_pages} entries")
        if len(entries) < stream_result.summary.total_pages:
            write(f", top {len(entries)}")
        write("):\n")
        if entries:
            write(f"{'count':>12}  {'page':<12}info\n")
            for e in entries:
                write(f"{e.count:>12}  {'0x%04x' % e.page:<12}{e.info}\n")
    if result.annotations:
        write(f"\nPeaks ({len(result.annotations)}):\n")
        for ann in result.annotations:
            write(f"[{ann.index}] refs={ann.refs}, loc={_annotation_loc(ann.frames)}\n")


def emit_text(result: "AnalysisResult", sink: TextIO) -> None:
    _emit_text_body(result, sink.write)
    if result.threads:
        for tid in sorted(result.threads):
            sink.write(f"\n== Thread {tid} ==\n")
            _emit_text_body(result.threads[tid], sink.write)


def emit_csv(result: "AnalysisResult", sink: TextIO) -> None:
    """One row per sample; peak flags as 0/1, annotation index or empty."""
    write = sink.write
    write(CSV_HEADER + "\n")
    for s in result.samples:
        ann = "" if s.annotation is None else s.annotation
        write(
            f"{s.t},{s.wss_insn},{s.wss_data},{int(s.peak_insn)},{int(s.peak_data)},{ann}\n"
        )


def samples_from_csv(lines: Iterable[str]) -> list["WssSample"]:
    """Parse emit_csv output back into sample records."""
    from .engine import WssSample

    it = iter(lines)
    header = next(it, "").strip()
    if header != CSV_HEADER:
        raise ValueError(f"unexpected CSV header {header!r}")
    out = []
    for row in it:
        row = row.strip()
        if not row:
            continue
        t, wi, wd, pi, pd, ann = row.split(",")
        out.append(
            WssSample(
                int(t),
                int(wi),
                int(wd),
                bool(int(pi)),
                bool(int(pd)),
                int(ann) if ann else None,
            )
        )
    return out


def emit_json(result: "AnalysisResult", sink: TextIO) -> None:
    json.dump(result.to_dict(), sink, indent=2)
    sink.write("\n")


def result_from_json(source: str | TextIO) -> "AnalysisResult":
    """Parse emit_json output back into an equal AnalysisResult."""
    from .engine import AnalysisResult

    data = json.loads(source) if isinstance(source, str) else json.load(source)
    return AnalysisResult.from_dict(data)


# --------------------------------------------------------------------------
# SVG step plot

_SVG_W, _SVG_H = 960, 380
_ML, _MR, _MT, _MB = 64, 18, 18, 44
_COLORS = {Stream.INSN: "#4878a8", Stream.DATA: "#c44e52"}


def _ticks(limit: float, want: int = 5) -> list[int]:
    if limit <= 0:
        return [0]
    import math

    raw = limit / want
    mag = 10 ** math.floor(math.log10(raw)) if raw >= 1 else 1
    for mult in (1, 2, 5, 10):
        if mag * mult >= raw:
            step = mag * mult
            break
    return list(range(0, int(limit) + 1, int(step))) or [0]


def _step_path(points: list[tuple[float, float]]) -> str:
    if not points:
        return ""
    x0, y0 = points[0]
    parts = [f"M{x0:.1f},{y0:.1f}"]
    for x, y in points[1:]:
        parts.append(f"H{x:.1f}V{y:.1f}")
    return "".join(parts)


def emit_svg(result: "AnalysisResult", sink: TextIO) -> None:
    """Plot both WSS series over instruction time, marking peaks."""
    samples = result.samples
    t_max = max((s.t for s in samples), default=1)
    y_max = max(
        (max(s.wss_insn, s.wss_data) for s in samples), default=1
    )
    y_max = max(y_max, 1)
    plot_w = _SVG_W - _ML - _MR
    plot_h = _SVG_H - _MT - _MB

    def sx(t: float) -> float:
        return _ML + plot_w * t / t_max

    def sy(v: float) -> float:
        return _MT + plot_h * (1.0 - v / (y_max * 1.05))

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {_SVG_W} {_SVG_H}" '
        f'font-family="sans-serif" font-size="12">',
        f'<rect width="{_SVG_W}" height="{_SVG_H}" fill="white"/>',
        f'<line x1="{_ML}" y1="{_MT + plot_h}" x2="{_ML + plot_w}" y2="{_MT + plot_h}" stroke="#333"/>',
        f'<line x1="{_ML}" y1="{_MT}" x2="{_ML}" y2="{_MT + plot_h}" stroke="#333"/>',
    ]
    for tv in _ticks(t_max):
        x = sx(tv)
        out.append(f'<line x1="{x:.1f}" y1="{_MT + plot_h}" x2="{x:.1f}" y2="{_MT + plot_h + 4}" stroke="#333"/>')
        out.append(
            f'<text x="{x:.1f}" y="{_MT + plot_h + 18}" text-anchor="middle">{tv}</text>'
        )
    for yv in _ticks(y_max):
        y = sy(yv)
        out.append(f'<line x1="{_ML - 4}" y1="{y:.1f}" x2="{_ML}" y2="{y:.1f}" stroke="#333"/>')
        out.append(
            f'<text x="{_ML - 8}" y="{y + 4:.1f}" text-anchor="end">{yv}</text>'
        )
    out.append(
        f'<text x="{_ML + plot_w / 2:.0f}" y="{_SVG_H - 8}" text-anchor="middle">instructions</text>'
    )
    out.append(
        f'<text x="14" y="{_MT + plot_h / 2:.0f}" text-anchor="middle" '
        f'transform="rotate(-90 14 {_MT + plot_h / 2:.0f})">pages</text>'
    )
    series = {
        Stream.INSN: [(sx(s.t), sy(s.wss_insn)) for s in samples],
        Stream.DATA: [(sx(s.t), sy(s.wss_data)) for s in samples],
    }
    for stream, pts in series.items():
        path = _step_path(pts)
        if path:
            out.append(
                f'<path d="{path}" fill="none" stroke="{_COLORS[stream]}" stroke-width="1.5"/>'
            )
    # legend
    for i, (stream, label) in enumerate(((Stream.INSN, "insn"), (Stream.DATA, "data"))):
        lx = _ML + plot_w - 120 + i * 64
        out.append(
            f'<line x1="{lx}" y1="{_MT + 10}" x2="{lx + 18}" y2="{_MT + 10}" '
            f'stroke="{_COLORS[stream]}" stroke-width="2"/>'
        )
        out.append(f'<text x="{lx + 22}" y="{_MT + 14}">{label}</text>')
    # peak markers, labeled with the annotation index
    by_t = {s.t: s for s in samples}
    for ann in result.annotations:
        s = by_t.get(ann.t)
        if s is None:
            continue
        value = s.wss_insn if ann.stream is Stream.INSN else s.wss_data
        x, y = sx(ann.t), sy(value)
        color = _COLORS[ann.stream]
        out.append(
            f'<circle cx="{x:.1f}" cy="{y:.1f}" r="3.5" fill="none" stroke="{color}"/>'
        )
        out.append(
            f'<text x="{x:.1f}" y="{y - 8:.1f}" text-anchor="middle" fill="{color}">'
            f"[{ann.index}]</text>"
        )
    out.append("</svg>")
    sink.write("\n".join(out) + "\n")
