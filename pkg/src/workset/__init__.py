"""workset: trace-driven working set analyzer.

Replays a memory access trace against a logical clock that ticks once
per instruction, tracks the distinct pages touched per access stream
(instruction vs data), and samples the working set size over a sliding
window. On top of the sampled series it offers streaming peak
detection with call stack annotations, hot page rankings, and
text/CSV/JSON/SVG reports. Synthetic workload generators and a CLI
round out the toolkit.
"""

from .engine import (
    AccessTracker,
    AnalysisConfig,
    AnalysisResult,
    PageRecord,
    PageTable,
    PeakAnnotation,
    StreamResult,
    WssSample,
    run_analysis,
)
from .peak import PeakDetector, PeakParams, PeakVerdict, detect_series
from .report import (
    CSV_HEADER,
    HotPageEntry,
    Summary,
    emit,
    format_summary,
    hot_pages,
    load_label_map,
    result_from_json,
    samples_from_csv,
    summarize,
)
from .trace import (
    AccessKind,
    CallStackDecl,
    StackActivation,
    Stream,
    TraceEvent,
    TraceParseError,
    parse_line,
    read_trace,
    write_trace,
)
from .workloads import PagerampConfig, StepConfig, gen_pageramp, gen_step

__version__ = "0.1.0"

__all__ = [
    "AccessKind",
    "AccessTracker",
    "AnalysisConfig",
    "AnalysisResult",
    "CSV_HEADER",
    "CallStackDecl",
    "HotPageEntry",
    "PageRecord",
    "PageTable",
    "PagerampConfig",
    "PeakAnnotation",
    "PeakDetector",
    "PeakParams",
    "PeakVerdict",
    "StackActivation",
    "StepConfig",
    "Stream",
    "StreamResult",
    "Summary",
    "TraceEvent",
    "TraceParseError",
    "WssSample",
    "detect_series",
    "emit",
    "format_summary",
    "gen_pageramp",
    "gen_step",
    "hot_pages",
    "load_label_map",
    "parse_line",
    "read_trace",
    "result_from_json",
    "run_analysis",
    "samples_from_csv",
    "summarize",
    "write_trace",
]
