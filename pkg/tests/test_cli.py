"""CLI wiring: flag parsing, exit codes, stdin/stdout plumbing. Most
tests drive main(argv) in-process; one subprocess test covers the real
gen | analyze pipe."""

import io
import shutil
import subprocess
import sys

import pytest

from workset.cli import INPUT_ERROR, USAGE_ERROR, main
from workset.report import CSV_HEADER
from workset.trace import write_trace
from workset.workloads import PagerampConfig, StepConfig, gen_pageramp, gen_step

TINY_FLAGS = ["--max-pages", "4", "--stride", "2", "--cycles", "1", "--insns-per-step", "2"]
TINY_CFG = PagerampConfig(max_pages=4, stride=2, cycles=1, insns_per_step=2)


def rendered(records):
    buf = io.StringIO()
    write_trace(records, buf)
    return buf.getvalue()


def step_trace_text(flat=10, step=50, samples=20, interval=1000):
    return rendered(gen_step(flat, step, samples, StepConfig(interval_insns=interval)))


# --------------------------------------------------------------------------
# gen


def test_gen_pageramp_to_stdout(capsys):
    assert main(["gen", "pageramp", *TINY_FLAGS]) == 0
    assert capsys.readouterr().out == rendered(gen_pageramp(TINY_CFG))


def test_gen_step_to_file(tmp_path):
    out = tmp_path / "trace.txt"
    argv = [
        "gen", "step", "--flat-pages", "3", "--step-pages", "7",
        "--flat-samples", "4", "--interval-insns", "64", "-o", str(out),
    ]
    assert main(argv) == 0
    expected = rendered(gen_step(3, 7, 4, StepConfig(interval_insns=64)))
    assert out.read_text() == expected


def test_gen_accepts_hex_flag_values(capsys):
    argv = ["gen", "step", "--flat-samples", "1", "--interval-insns", "16",
            "--flat-pages", "2", "--step-pages", "0", "--base-address", "0x30000000"]
    assert main(argv) == 0
    assert " S 30000000,1" in capsys.readouterr().out


def test_gen_is_deterministic(capsys):
    main(["gen", "pageramp", *TINY_FLAGS])
    first = capsys.readouterr().out
    main(["gen", "pageramp", *TINY_FLAGS])
    assert capsys.readouterr().out == first


def test_gen_rejects_bad_workload_config(capsys):
    assert main(["gen", "pageramp", "--page-size", "1000"]) == USAGE_ERROR
    assert "page" in capsys.readouterr().err


def test_gen_step_rejects_tight_interval(capsys):
    argv = ["gen", "step", "--flat-pages", "40", "--step-pages", "30",
            "--interval-insns", "50"]
    assert main(argv) == USAGE_ERROR


# --------------------------------------------------------------------------
# analyze: happy paths


def test_analyze_file_to_csv(tmp_path):
    trace = tmp_path / "t.txt"
    trace.write_text(step_trace_text())
    out = tmp_path / "r.csv"
    argv = ["analyze", str(trace), "--tau", "1000", "--format", "csv", "-o", str(out)]
    assert main(argv) == 0
    rows = out.read_text().splitlines()
    assert rows[0] == CSV_HEADER
    series = [int(r.split(",")[2]) for r in rows[1:]]
    assert series == [10] * 20 + [60] + [10] * 20


def test_analyze_stdin_stdout(monkeypatch, capsys):
    monkeypatch.setattr(sys, "stdin", io.StringIO(step_trace_text(samples=5, interval=200)))
    assert main(["analyze", "--tau", "200", "--format", "csv"]) == 0
    rows = capsys.readouterr().out.splitlines()
    assert len(rows) == 1 + 11


def test_analyze_empty_stdin_is_fine(monkeypatch, capsys):
    monkeypatch.setattr(sys, "stdin", io.StringIO(""))
    assert main(["analyze", "--format", "csv"]) == 0
    assert capsys.readouterr().out == CSV_HEADER + "\n"


def test_analyze_default_every_is_tau(monkeypatch, capsys):
    text = step_trace_text(samples=2, interval=200)  # 1000 instructions
    monkeypatch.setattr(sys, "stdin", io.StringIO(text))
    main(["analyze", "--tau", "500", "--format", "csv"])
    assert len(capsys.readouterr().out.splitlines()) == 1 + 2
    monkeypatch.setattr(sys, "stdin", io.StringIO(text))
    main(["analyze", "--tau", "500", "--every", "250", "--format", "csv"])
    assert len(capsys.readouterr().out.splitlines()) == 1 + 4


@pytest.mark.parametrize("format", ["text", "csv", "json", "svg"])
def test_analyze_all_formats(format, monkeypatch, capsys):
    monkeypatch.setattr(sys, "stdin", io.StringIO(step_trace_text(samples=2, interval=100)))
    assert main(["analyze", "--tau", "100", "--format", format]) == 0
    assert capsys.readouterr().out


def test_analyze_peak_detect_marks_the_bump(monkeypatch, capsys):
    monkeypatch.setattr(sys, "stdin", io.StringIO(step_trace_text()))
    assert main(["analyze", "--tau", "1000", "--peak-detect", "--format", "csv"]) == 0
    rows = [r.split(",") for r in capsys.readouterr().out.splitlines()[1:]]
    flagged = [r for r in rows if r[4] == "1"]
    assert len(flagged) == 1
    assert flagged[0][0] == str(21 * 1000)
    assert flagged[0][5] != ""  # carries an annotation index


def test_analyze_labels_show_up_in_text(tmp_path, monkeypatch, capsys):
    labels = tmp_path / "labels.txt"
    labels.write_text("20000 heap arena\n")
    monkeypatch.setattr(sys, "stdin", io.StringIO(step_trace_text(samples=2, interval=100)))
    assert main(["analyze", "--tau", "100", "--labels", str(labels)]) == 0
    assert "heap arena" in capsys.readouterr().out


def test_analyze_per_thread_text(monkeypatch, capsys):
    monkeypatch.setattr(sys, "stdin", io.StringIO(step_trace_text(samples=2, interval=100)))
    assert main(["analyze", "--tau", "100", "--per-thread"]) == 0
    assert "== Thread 0 ==" in capsys.readouterr().out


# --------------------------------------------------------------------------
# analyze: failure paths

BROKEN_TRACE = "I  00400000,4\nI  00400004,4\nX nope\nI  00400008,4\n"


def test_analyze_missing_file(capsys):
    assert main(["analyze", "/nonexistent/trace.txt"]) == INPUT_ERROR
    assert capsys.readouterr().err


def test_analyze_malformed_trace_strict(monkeypatch, capsys):
    monkeypatch.setattr(sys, "stdin", io.StringIO(BROKEN_TRACE))
    assert main(["analyze"]) == INPUT_ERROR
    assert "line 3" in capsys.readouterr().err


def test_analyze_malformed_trace_lenient(monkeypatch, capsys):
    monkeypatch.setattr(sys, "stdin", io.StringIO(BROKEN_TRACE))
    argv = ["analyze", "--lenient", "--tau", "1", "--every", "1", "--format", "csv"]
    assert main(argv) == 0
    assert len(capsys.readouterr().out.splitlines()) == 1 + 3


def test_analyze_bad_labels_file(tmp_path, monkeypatch, capsys):
    labels = tmp_path / "labels.txt"
    labels.write_text("zz not-a-page\n")
    monkeypatch.setattr(sys, "stdin", io.StringIO(""))
    assert main(["analyze", "--labels", str(labels)]) == INPUT_ERROR
    assert main(["analyze", "--labels", str(tmp_path / "missing.txt")]) == INPUT_ERROR


@pytest.mark.parametrize(
    "argv",
    [
        ["analyze", "--tau", "0"],
        ["analyze", "--tau", "-3"],
        ["analyze", "--every", "0"],
        ["analyze", "--format", "yaml"],
        ["analyze", "--top-n", "-1"],
        ["frobnicate"],
        ["gen"],
        [],
    ],
)
def test_usage_errors_exit_1(argv, capsys):
    assert main(argv) == USAGE_ERROR
    capsys.readouterr()  # swallow usage text


def test_analyze_bad_peak_params_exit_1(monkeypatch, capsys):
    monkeypatch.setattr(sys, "stdin", io.StringIO(""))
    assert main(["analyze", "--peak-alpha", "0"]) == USAGE_ERROR
    assert "alpha" in capsys.readouterr().err


def test_help_exits_zero(capsys):
    assert main(["--help"]) == 0
    assert "workset" in capsys.readouterr().out


# --------------------------------------------------------------------------
# the real pipe


def test_gen_analyze_subprocess_pipe():
    gen = subprocess.run(
        [sys.executable, "-m", "workset.cli", "gen", "step",
         "--flat-samples", "5", "--interval-insns", "200"],
        capture_output=True, text=True,
    )
    assert gen.returncode == 0
    ana = subprocess.run(
        [sys.executable, "-m", "workset.cli", "analyze", "--tau", "200",
         "--format", "csv"],
        input=gen.stdout, capture_output=True, text=True,
    )
    assert ana.returncode == 0
    rows = ana.stdout.splitlines()
    assert rows[0] == CSV_HEADER
    assert [int(r.split(",")[2]) for r in rows[1:]] == [10] * 5 + [60] + [10] * 5


@pytest.mark.skipif(shutil.which("workset") is None, reason="entry point not installed")
def test_console_script_entry_point():
    proc = subprocess.run(["workset", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "analyze" in proc.stdout
