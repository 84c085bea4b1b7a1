import csv
import io
import json
import math

import pytest
from hypothesis import given, settings, strategies as st

from relcoh import cli, poincare


def run(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_explain_units(capsys):
    code, out, _ = run(["--explain-units"], capsys)
    assert code == 0
    assert "sigma / lambda_c" in out and "canonical value 0.25" in out


def test_no_command_is_usage_error(capsys):
    assert run([], capsys)[0] == 2


def test_compute_canonical_r5(capsys):
    code, out, _ = run(["compute", "--family", "canonical", "--r", "5", "--pbar", "0"], capsys)
    assert code == 0
    rec = json.loads(out)
    assert rec["quantities"]["energy"] == pytest.approx(1.01, abs=5e-4)
    assert rec["methods"]["energy"] == "series"
    assert rec["inputs"]["regime"] == "massive"


def test_compute_poincare_energy_only(capsys):
    code, out, _ = run(["compute", "--family", "poincare", "--r", "8", "--pbar", "0", "--quantities", "energy"], capsys)
    rec = json.loads(out)
    assert code == 0
    assert list(rec["quantities"]) == ["energy"]
    assert rec["quantities"]["energy"] == pytest.approx(1 / poincare.rho(8.0), rel=1e-14)


def test_compute_superluminal_beta(capsys):
    code, out, err = run(["compute", "--family", "lorentzian", "--r", "8", "--beta", "1.0"], capsys)
    assert code == 2 and out == ""
    assert "|beta| < 1" in err and len(err.strip().splitlines()) == 1


def test_compute_verify_deltas(capsys):
    code, out, _ = run(["compute", "--family", "lorentzian", "--r", "2", "--beta", "0.3", "--verify"], capsys)
    rec = json.loads(out)
    assert code == 0
    assert max(rec["oracle_deltas"].values()) < 1e-6


def test_compute_massless(capsys):
    code, out, _ = run(["compute", "--massless", "--sbar", "1.3"], capsys)
    rec = json.loads(out)
    assert rec["inputs"]["r"] is None
    assert rec["quantities"]["velocity"] == pytest.approx(math.erf(1.3))


def test_compute_si(capsys):
    code, out, _ = run(["compute", "--family", "poincare", "--r", "2", "--pbar", "1", "--si", "--mass-mev", "938.27"], capsys)
    rec = json.loads(out)
    assert code == 0
    assert rec["si"]["energy [MeV]"] == pytest.approx(938.27 * rec["quantities"]["energy"])
    assert rec["si"]["compton_wavelength_fm"] == pytest.approx(197.3269804 / 938.27)


@pytest.mark.parametrize("argv", [
    ["compute", "--family", "canonical"],                       # missing --r
    ["compute", "--family", "canonical", "--r", "-1"],
    ["compute", "--family", "lorentzian", "--r", "2"],          # missing --beta
    ["compute", "--family", "poincare", "--massless", "--sbar", "1"],
    ["compute", "--family", "canonical", "--r", "2", "--quantities", "spin"],
    ["compute", "--family", "canonical", "--r", "2", "--si"],
    ["compute", "--family", "nope"],
    ["compute", "--r", "abc"],
    ["sweep"],
    ["sweep", "--figure", "9"],
    ["sweep", "--family", "lorentzian", "--axis", "beta", "--range", "-1", "0.5"],
    ["sweep", "--family", "poincare", "--axis", "beta", "--range", "0", "0.5"],
    ["sweep", "--family", "canonical", "--axis", "pbar", "--range", "1", "0"],
    ["sweep", "--family", "canonical", "--axis", "pbar", "--range", "0", "1", "--points", "1"],
    ["verify", "--tol", "rel"],
    ["verify", "--tol", "rel=-1"],
    ["verify", "--suite", "nonsense"],
])
def test_invalid_inputs_exit_2(argv, capsys):
    assert run(argv, capsys)[0] == 2


@settings(max_examples=25)
@given(st.floats(allow_nan=True, allow_infinity=True).filter(lambda b: not abs(b) < 1))
def test_any_superluminal_beta_exits_2(beta):
    assert cli.main(["compute", "--family", "lorentzian", "--r", "2", "--beta", repr(beta)]) == 2


@settings(max_examples=25)
@given(st.text(alphabet="relabs=0123456789.,-e", max_size=12))
def test_tol_parser_never_crashes(text):
    try:
        tol = cli.parse_tol([text])
    except cli.UsageError:
        return
    assert all(v > 0 for v in tol.values())


def test_sweep_custom_two_points(capsys):
    code, out, _ = run(["sweep", "--family", "canonical", "--axis", "pbar", "--range", "0", "1",
                        "--points", "2", "--quantities", "energy", "--r", "5", "--workers", "1"], capsys)
    rows = list(csv.reader(io.StringIO(out)))
    assert code == 0
    assert rows[0] == ["pbar", "energy", "canonical_variance", "canonical_product"]
    assert len(rows) == 3


def test_sweep_figure1_shape(tmp_path):
    target = tmp_path / "f1.csv"
    assert cli.main(["sweep", "--figure", "1", "--out", str(target), "--workers", "1"]) == 0
    rows = list(csv.reader(target.open(newline="")))
    assert rows[0][:2] == ["beta", "var_x"]
    assert len(rows) == 400
    betas = [float(r[0]) for r in rows[1:]]
    assert betas[0] == pytest.approx(-0.995) and betas[-1] == pytest.approx(0.995)
    assert all(float(r[1]) < 0.5 for r in rows[1:])


def test_sweep_deterministic_and_parallel_order(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert cli.main(["sweep", "--figure", "6", "--out", str(a), "--workers", "1"]) == 0
    assert cli.main(["sweep", "--figure", "6", "--out", str(b), "--workers", "3"]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_csv_round_trip(tmp_path):
    target = tmp_path / "s.csv"
    spec = cli.SweepSpec("poincare", "pbar", 2.0, -1.0, 1.0, 5, ("energy", "var_p"))
    rows = cli.run_sweep(spec)
    target.write_text(cli.sweep_csv(spec, rows))
    parsed = list(csv.DictReader(target.open(newline="")))
    for row, got in zip(rows, parsed):
        assert float(got["pbar"]) == pytest.approx(row[0], rel=1e-12)
        assert float(got["energy"]) == pytest.approx(row[1], rel=1e-11)
        assert float(f"{float(got['var_p']):.12g}") == float(got["var_p"])
        assert got["canonical_variance"] == "0.5" and got["canonical_product"] == "0.25"


def test_sweep_json_lines(capsys):
    code, out, _ = run(["sweep", "--family", "lorentzian", "--axis", "beta", "--range", "-0.5", "0.5",
                        "--points", "3", "--quantities", "energy", "--format", "json", "--workers", "1"], capsys)
    recs = [json.loads(line) for line in out.splitlines()]
    assert code == 0 and len(recs) == 3
    assert recs[0]["energy"] == recs[2]["energy"]


def test_output_dir_env(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("RELCOH_OUTPUT_DIR", str(tmp_path))
    assert run(["sweep", "--figure", "4", "--workers", "1"], capsys)[0] == 0
    assert (tmp_path / "figure4.csv").exists()


def test_explicit_out_beats_env(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("RELCOH_OUTPUT_DIR", str(tmp_path / "env"))
    target = tmp_path / "mine.csv"
    run(["sweep", "--figure", "5", "--out", str(target), "--workers", "1"], capsys)
    assert target.exists() and not (tmp_path / "env").exists()


def test_sweep_point_failure_names_point(capsys, monkeypatch):
    real = cli.evaluate

    def flaky(family, r, xbar, label, quantities, **kw):
        if label > 0.6:
            raise cli.DomainError("synthetic failure")
        return real(family, r, xbar, label, quantities, **kw)

    monkeypatch.setattr(cli, "evaluate", flaky)
    code, _, err = run(["sweep", "--family", "poincare", "--axis", "pbar", "--range", "0", "1",
                        "--points", "3", "--workers", "1"], capsys)
    assert code == 2
    assert "point 2 (pbar = 1)" in err


def test_config_precedence(tmp_path, capsys):
    cfg = tmp_path / "relcoh.cfg"
    cfg.write_text("# defaults\nfamily = poincare\nr = 2\npbar = 1.3\nquantities = energy,momentum\n")
    code, out, _ = run(["--config", str(cfg), "compute"], capsys)
    rec = json.loads(out)
    assert code == 0 and rec["family"] == "poincare" and rec["inputs"]["pbar"] == 1.3
    code, out, _ = run(["--config", str(cfg), "compute", "--pbar", "0"], capsys)
    assert json.loads(out)["inputs"]["pbar"] == 0.0
    assert json.loads(out)["inputs"]["r"] == 2.0


def test_config_errors(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("r = abc\n")
    assert run(["--config", str(bad), "compute"], capsys)[0] == 2
    bad.write_text("no equals sign\n")
    assert run(["--config", str(bad), "compute"], capsys)[0] == 2
    assert run(["--config", str(tmp_path / "missing.cfg"), "compute"], capsys)[0] == 2


def test_verify_specfun_tap(capsys):
    code, out, _ = run(["verify", "--suite", "specfun"], capsys)
    lines = out.splitlines()
    assert code == 0
    assert lines[0] == "TAP version 13"
    n = int(lines[1].split("..")[1])
    oks = [ln for ln in lines if ln.startswith("ok ")]
    assert len(oks) == n
    assert all("residual=" in ln and "tol=" in ln for ln in oks)


def test_verify_tolerance_override(capsys):
    code, out, _ = run(["verify", "--suite", "specfun", "--tol", "rel=1e-6"], capsys)
    assert code == 0
    assert "tol=1.0e-06" in out


def test_verify_failure_exit_1(capsys):
    code, out, _ = run(["verify", "--suite", "specfun", "--tol", "rel=1e-300,abs=1e-300"], capsys)
    assert code == 1
    assert "not ok" in out


def test_verify_lorentzian_lists_robertson(capsys):
    code, out, _ = run(["verify", "--suite", "lorentzian"], capsys)
    assert code == 0
    assert "robertson_saturation" in out
