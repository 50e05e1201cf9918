#!/usr/bin/env python3
"""Sweep the window length over a trace and tabulate how the sampled
working set responds. Wider windows can only grow each sample, so the
avg/peak columns are monotone down the table; the interesting part is
where they stop growing (the trace's natural locality scale).

Reads a trace file, or analyzes a built-in step workload when no input
is given.
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from workset.engine import AnalysisConfig, run_analysis
from workset.trace import read_trace
from workset.workloads import StepConfig, gen_step


def sweep_taus(lo: int, hi: int, points: int) -> list[int]:
    if points == 1:
        return [lo]
    ratio = (hi / lo) ** (1 / (points - 1))
    taus = sorted({max(1, round(lo * ratio**i)) for i in range(points)})
    return taus


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("input", nargs="?", help="trace file (default: synthetic step workload)")
    ap.add_argument("--tau-min", type=int, default=100)
    ap.add_argument("--tau-max", type=int, default=1_000_000)
    ap.add_argument("--points", type=int, default=9)
    ap.add_argument("--every", type=int, default=None,
                    help="fixed sampling interval (default: tau, i.e. tiling windows)")
    ap.add_argument("--csv", type=Path, help="also write the table as CSV")
    args = ap.parse_args()

    def records():
        if args.input:
            return read_trace(open(args.input))
        return gen_step(10, 50, 20, StepConfig(interval_insns=10_000))

    rows = []
    for tau in sweep_taus(args.tau_min, args.tau_max, args.points):
        cfg = AnalysisConfig(tau=tau, every=args.every or tau)
        res = run_analysis(records(), cfg)
        i, d = res.insn.summary, res.data.summary
        rows.append((tau, len(res.samples), i.avg_pages, i.peak_pages, d.avg_pages, d.peak_pages))

    head = f"{'tau':>9} {'samples':>8} {'insn avg':>9} {'insn pk':>8} {'data avg':>9} {'data pk':>8}"
    print(head)
    print("-" * len(head))
    for tau, n, ia, ip, da, dp in rows:
        print(f"{tau:>9} {n:>8} {ia:>9.1f} {ip:>8} {da:>9.1f} {dp:>8}")

    if args.csv:
        with open(args.csv, "w") as f:
            f.write("tau,samples,insn_avg,insn_peak,data_avg,data_peak\n")
            for row in rows:
                f.write(",".join(str(v) for v in row) + "\n")
        print(f"\nwrote {args.csv}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
