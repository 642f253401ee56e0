import runpy
import sys
from pathlib import Path

BENCH = Path(__file__).parents[1] / "benchmarks" / "bench_levenshtein.py"


def test_benchmark_runs(monkeypatch, capsys):
    monkeypatch.setattr(sys, "argv", [str(BENCH), "--pairs", "200", "--repeat", "1"])
    runpy.run_path(str(BENCH), run_name="__main__")
    out = capsys.readouterr().out
    assert "python:" in out
