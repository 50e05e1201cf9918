"""Command line front end: generate synthetic traces, analyze traces.

Exit codes: 0 on success, 1 on usage errors (bad flags or parameter
values), 2 on input errors (unreadable files, malformed trace lines in
strict mode).
"""

from __future__ import annotations

import argparse
import sys
from contextlib import contextmanager

from .engine import AnalysisConfig, run_analysis
from .report import FORMATS, emit, load_label_map
from .trace import TraceParseError, read_trace, write_trace
from .workloads import PagerampConfig, StepConfig, gen_pageramp, gen_step

USAGE_ERROR = 1
INPUT_ERROR = 2


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage problems by default; this tool reserves 2
    # for input errors, so downgrade to 1
    def error(self, message: str):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(USAGE_ERROR)


def _positive_int(text: str) -> int:
    value = int(text, 0)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _nonneg_int(text: str) -> int:
    value = int(text, 0)
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {value}")
    return value


@contextmanager
def _open_input(path: str):
    if path == "-":
        yield sys.stdin
    else:
        f = open(path, "r", encoding="utf-8")
        try:
            yield f
        finally:
            f.close()


@contextmanager
def _open_output(path: str):
    if path == "-":
        yield sys.stdout
    else:
        f = open(path, "w", encoding="utf-8")
        try:
            yield f
        finally:
            f.close()


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="workset", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    gen = sub.add_parser("gen", help="generate a synthetic trace")
    gen_sub = gen.add_subparsers(dest="workload", required=True, parser_class=_Parser)

    ramp = gen_sub.add_parser("pageramp", help="sawtooth working set workload")
    ramp.add_argument("--max-pages", type=_positive_int, default=1024)
    ramp.add_argument("--stride", type=_positive_int, default=2,
                      help="touch every stride-th claimed page")
    ramp.add_argument("--cycles", type=_positive_int, default=10)
    ramp.add_argument("--insns-per-touch", type=_positive_int, default=1)
    ramp.add_argument("--insns-per-step", type=_nonneg_int, default=16,
                      help="dwell instructions per claim/release step")
    ramp.add_argument("--pages-per-step", type=_positive_int, default=1)
    ramp.add_argument("--base-address", type=_nonneg_int, default=0x1000_0000)
    ramp.add_argument("--page-size", type=_positive_int, default=4096)
    ramp.add_argument("-o", "--output", default="-", help="output file, '-' for stdout")
    ramp.set_defaults(func=_cmd_gen_pageramp)

    step = gen_sub.add_parser("step", help="flat working set with one bump")
    step.add_argument("--flat-pages", type=_positive_int, default=10)
    step.add_argument("--step-pages", type=_nonneg_int, default=50)
    step.add_argument("--flat-samples", type=_positive_int, default=20)
    step.add_argument("--interval-insns", type=_positive_int, default=1000)
    step.add_argument("--repeats", type=_positive_int, default=1)
    step.add_argument("--base-address", type=_nonneg_int, default=0x2000_0000)
    step.add_argument("--page-size", type=_positive_int, default=4096)
    step.add_argument("-o", "--output", default="-", help="output file, '-' for stdout")
    step.set_defaults(func=_cmd_gen_step)

    analyze = sub.add_parser("analyze", help="compute working set sizes from a trace")
    analyze.add_argument("input", nargs="?", default="-",
                         help="trace file, '-' or omitted for stdin")
    analyze.add_argument("--tau", type=_positive_int, default=100_000,
                         help="window length in instructions (default 100000)")
    analyze.add_argument("--every", type=_positive_int, default=None,
                         help="sampling interval in instructions (default: --tau)")
    analyze.add_argument("--page-size", type=_positive_int, default=4096)
    analyze.add_argument("--per-thread", action="store_true",
                         help="also produce per-thread series and summaries")
    analyze.add_argument("--peak-detect", action="store_true",
                         help="flag peaks in the sampled series (off by default)")
    analyze.add_argument("--peak-sensitivity", type=float, default=1.0, metavar="G")
    analyze.add_argument("--peak-alpha", type=float, default=0.3,
                         help="moving average decay")
    analyze.add_argument("--peak-phi", type=float, default=0.2,
                         help="damping while a peak is active")
    analyze.add_argument("--top-n", type=_nonneg_int, default=10,
                         help="hot pages listed per stream")
    analyze.add_argument("--format", choices=FORMATS, default="text")
    analyze.add_argument("--labels", metavar="FILE",
                         help="page label sidecar ('<hexpage> <label>' lines)")
    analyze.add_argument("--strict", dest="strict", action="store_true", default=True,
                         help="fail on malformed trace lines (default)")
    analyze.add_argument("--lenient", dest="strict", action="store_false",
                         help="skip malformed trace lines with a warning")
    analyze.add_argument("-o", "--output", default="-", help="output file, '-' for stdout")
    analyze.set_defaults(func=_cmd_analyze)

    return parser


def _cmd_gen_pageramp(args: argparse.Namespace) -> int:
    try:
        cfg = PagerampConfig(
            max_pages=args.max_pages,
            stride=args.stride,
            cycles=args.cycles,
            insns_per_touch=args.insns_per_touch,
            insns_per_step=args.insns_per_step,
            pages_per_step=args.pages_per_step,
            base_address=args.base_address,
            page_size=args.page_size,
        )
    except ValueError as exc:
        sys.stderr.write(f"workset gen pageramp: {exc}\n")
        return USAGE_ERROR
    return _write_records(gen_pageramp(cfg), args.output)


def _cmd_gen_step(args: argparse.Namespace) -> int:
    try:
        cfg = StepConfig(
            interval_insns=args.interval_insns,
            repeats=args.repeats,
            base_address=args.base_address,
            page_size=args.page_size,
        )
        records = gen_step(args.flat_pages, args.step_pages, args.flat_samples, cfg)
    except ValueError as exc:
        sys.stderr.write(f"workset gen step: {exc}\n")
        return USAGE_ERROR
    return _write_records(records, args.output)


def _write_records(records, output: str) -> int:
    try:
        with _open_output(output) as out:
            write_trace(records, out)
    except OSError as exc:
        sys.stderr.write(f"workset gen: {exc}\n")
        return INPUT_ERROR
    return 0


def _cmd_analyze(args: argparse.Namespace) -> int:
    try:
        cfg = AnalysisConfig(
            tau=args.tau,
            every=args.every,
            page_size=args.page_size,
            per_thread=args.per_thread,
            peak_detect=args.peak_detect,
            peak_g=args.peak_sensitivity,
            peak_phi=args.peak_phi,
            peak_alpha=args.peak_alpha,
            top_n=args.top_n,
        )
    except ValueError as exc:
        sys.stderr.write(f"workset analyze: {exc}\n")
        return USAGE_ERROR

    label_map = None
    if args.labels:
        try:
            with open(args.labels, "r", encoding="utf-8") as f:
                label_map = load_label_map(f)
        except (OSError, ValueError) as exc:
            sys.stderr.write(f"workset analyze: {exc}\n")
            return INPUT_ERROR

    try:
        with _open_input(args.input) as stream:
            records = read_trace(stream, strict=args.strict)
            result = run_analysis(records, cfg, label_map)
    except TraceParseError as exc:
        sys.stderr.write(f"workset analyze: {exc}\n")
        return INPUT_ERROR
    except OSError as exc:
        sys.stderr.write(f"workset analyze: {exc}\n")
        return INPUT_ERROR

    try:
        with _open_output(args.output) as out:
            emit(result, args.format, out)
    except OSError as exc:
        sys.stderr.write(f"workset analyze: {exc}\n")
        return INPUT_ERROR
    return 0


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # argparse raises for --help (0) and, via _Parser.error, usage (1)
        return int(exc.code) if exc.code is not None else 0
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
