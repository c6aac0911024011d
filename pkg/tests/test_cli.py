import json

import pytest

from main import run_command


def test_chiral_demo_csv(tmp_path, capsys):
    out = tmp_path / "demo.csv"
    assert run_command(["chiral-demo", "--kappa", "1", "--periods", "3", "--samples", "60", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "# kappa=1 periods=3 samples=60"
    assert lines[1].startswith("time,t_over_T,p_udd")
    assert len(lines) == 62
    first = lines[2].split(",")
    assert first[:5] == ["0", "0", "1", "0", "0"]


def test_chiral_demo_is_deterministic(tmp_path):
    paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
    for path in paths:
        assert run_command(["chiral-demo", "--samples", "7", "--out", str(path)]) == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_zip_json(tmp_path, capsys):
    out = tmp_path / "run.json"
    assert run_command(["zip", "--spins", "7", "--out", str(out)]) == 0
    payload = json.loads(out.read_text())
    assert payload["pulse_counts"] == {"pi": 6, "half_pi": 1}
    assert payload["entries"][-1]["fidelity_to_ghz"] >= 1 - 1e-8
    assert "fidelity_to_ghz=" in capsys.readouterr().out


def test_zip_csv_to_stdout(capsys):
    assert run_command(["zip", "--spins", "3", "--format", "csv", "--x-axis-half-pi"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("# m_spins=3")
    assert len(lines) == 6


def test_zip_rejects_even_register(capsys):
    assert run_command(["zip", "--spins", "4"]) == 1
    assert "error:" in capsys.readouterr().err


def test_schedule_listing(capsys):
    assert run_command(["schedule", "--spins", "5"]) == 0
    out = capsys.readouterr().out
    assert "Interact((3,4,5), 2T)" in out
    assert "pi pulses: 4, pi/2 pulses: 1" in out


def test_eta_auto(capsys):
    assert run_command(["eta", "--f", "auto", "--delta-phi", "2.0943951"]) == 0
    lines = dict(line.split(" = ") for line in capsys.readouterr().out.splitlines())
    assert float(lines["eta"]) == pytest.approx(0.307, abs=0.002)
    assert float(lines["h0_residual"]) < 1e-10
    assert "kappa" not in lines


def test_eta_with_rounded_f_reports_h0(capsys):
    assert run_command(["eta", "--f", "2.4", "--nu-d", "20"]) == 0
    lines = dict(line.split(" = ") for line in capsys.readouterr().out.splitlines())
    assert float(lines["h0_residual"]) > 1e-4
    assert float(lines["kappa"]) == pytest.approx(0.307 / 20, rel=0.02)


def test_eta_rejects_bad_f():
    assert run_command(["eta", "--f", "abc"]) == 2


def test_eta_rejects_non_positive_nu_d(capsys):
    assert run_command(["eta", "--nu-d", "0"]) == 1
    assert "error:" in capsys.readouterr().err


def test_floquet_verify_csv(tmp_path):
    out = tmp_path / "sweep.csv"
    assert run_command(["floquet-verify", "--ratio", "100", "--samples", "3", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("# g=1 f=2.40482555")
    assert lines[1] == "nu_d_over_g,f,time,vacuum_weight,fidelity_to_effective"
    assert len(lines) == 5
    assert float(lines[-1].split(",")[-1]) >= 0.99


def test_floquet_verify_json_from_suffix(tmp_path):
    out = tmp_path / "sweep.json"
    assert run_command(["floquet-verify", "--ratio", "50", "--ratio", "80", "--samples", "2", "--out", str(out)]) == 0
    payload = json.loads(out.read_text())
    assert [p["nu_d_over_g"] for p in payload["points"]] == [50.0, 50.0, 80.0, 80.0]


def test_unknown_command_and_flag():
    assert run_command(["teleport"]) == 2
    assert run_command(["zip", "--spins", "3", "--bogus"]) == 2


def test_floquet_verify_rejects_bad_ratio(capsys):
    assert run_command(["floquet-verify", "--ratio", "-5"]) == 1
    assert "ratio" in capsys.readouterr().err
