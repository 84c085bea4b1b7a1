import runpy
import sys
from pathlib import Path

import pytest

SCRIPTS = Path(__file__).resolve().parents[1] / "scripts"


def run_script(name, argv, monkeypatch):
    monkeypatch.setattr(sys, "argv", [name, *argv])
    with pytest.raises(SystemExit) as info:
        runpy.run_path(str(SCRIPTS / name), run_name="__main__")
    return info.value.code


def test_threshold_scan_script(tmp_path, monkeypatch, capsys):
    out = tmp_path / "scan.csv"
    assert run_script("threshold_scan.py", ["--target", "0.01", "--csv", str(out), "--points", "5"], monkeypatch) == 0
    text = capsys.readouterr().out
    assert "sigma/lambda_c >= 4.9" in text
    assert len(out.read_text().splitlines()) == 6


def test_make_figure_data_script(tmp_path, monkeypatch, capsys):
    assert run_script("make_figure_data.py", ["--out-dir", str(tmp_path), "--workers", "2"], monkeypatch) == 0
    assert sorted(p.name for p in tmp_path.iterdir()) == [f"figure{n}.csv" for n in range(1, 7)]
