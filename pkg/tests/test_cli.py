import io
import json
import pathlib
import subprocess
import sys

import numpy as np
import pytest

from quartit.cli import main
from quartit.dynamics import damped_rabi

ROOT = pathlib.Path(__file__).resolve().parents[1]


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_compile_cnot_one_pulse(capsys):
    code, out, _ = run(["compile", str(ROOT / "programs/cnot.qp"), "--system", str(ROOT / "configs/ga69.cfg")], capsys)
    assert code == 0
    assert len(json.loads(out)["pulses"]) == 1


def test_compile_avoid_three_photon(capsys, tmp_path):
    prog = tmp_path / "p.qp"
    prog.write_text("P X03 90\n")
    code, out, _ = run(["compile", str(prog), "--system", "75As", "--avoid-three-photon"], capsys)
    doc = json.loads(out)
    assert code == 0 and len(doc["pulses"]) == 3
    assert all("replaced" in p["provenance"] for p in doc["pulses"])


def test_compile_stdin(monkeypatch, capsys):
    monkeypatch.setattr(sys, "stdin", io.StringIO("H A\n"))
    code, out, _ = run(["compile", "-"], capsys)
    assert code == 0 and json.loads(out)["pulses"]


def test_parse_error_exit_2(capsys, tmp_path):
    prog = tmp_path / "bad.qp"
    prog.write_text("H A\nP W01 90\n")
    code, _, err = run(["compile", str(prog)], capsys)
    assert code == 2 and "line 2" in err and "unknown axis W" in err


def test_io_error_exit_3(capsys, tmp_path):
    assert run(["compile", str(tmp_path / "missing.qp")], capsys)[0] == 3
    assert run(["compile", str(ROOT / "programs/cnot.qp"), "--system", str(tmp_path / "x.cfg")], capsys)[0] == 3


def test_usage_errors_exit_2(capsys):
    assert run(["compile"], capsys)[0] == 2
    assert run(["spectrum", "--bogus"], capsys)[0] == 2
    assert run(["spectrum", "--omega1", "medium"], capsys)[0] == 2
    assert run(["compile", "-", "--system", "14N"], capsys)[0] == 2


def test_numerical_failure_exit_4(capsys, tmp_path):
    trace = tmp_path / "flat.csv"
    trace.write_text("t_p_s,delta_rxx_ohm\n" + "".join(f"{t},1.0\n" for t in np.linspace(0, 1e-3, 50)))
    code, _, err = run(["fit", "--input", str(trace)], capsys)
    assert code == 4 and "no oscillation" in err


def test_help_lists_flags(capsys):
    for cmd, flag in (("compile", "--avoid-three-photon"), ("spectrum", "--tp"), ("tomo", "--records"),
                      ("rabi", "--transition"), ("fit", "--input"), ("prep", "--variant")):
        assert main([cmd, "--help"]) == 0
        assert flag in capsys.readouterr().out


def test_spectrum_three_peaks(capsys):
    from quartit.dynamics import Spectrum, find_peaks
    code, out, _ = run(["spectrum", "--tp", "0.126e-3", "--omega1", "weak", "--system", "69Ga", "--decoupled"], capsys)
    data = np.loadtxt(io.StringIO(out), delimiter=",", skiprows=1)
    peaks = data[find_peaks(Spectrum(data[:, 0], data[:, 1])), 0] - 60.0e6
    step = data[1, 0] - data[0, 0]
    assert code == 0 and np.allclose(peaks, [-15e3, 0, 15e3], atol=step)


def test_fit_reports_fields(capsys, tmp_path):
    t = np.linspace(0, 3e-3, 400)
    y = damped_rabi(t, 0.5, 2 * np.pi * 5e3, 0.6e-3)
    f = tmp_path / "trace.csv"
    f.write_text("t_p_s,delta_rxx_ohm\n" + "".join(f"{float(a)!r},{float(b)!r}\n" for a, b in zip(t, y)))
    code, out, _ = run(["fit", "--input", str(f)], capsys)
    doc = json.loads(out)
    assert code == 0 and {"omega_r", "t2", "residual"} <= set(doc)
    assert doc["t2"] == pytest.approx(0.6e-3, rel=1e-3)


def test_tomo_seeded_and_records_path(capsys, tmp_path):
    rec = tmp_path / "rec.json"
    code, out, _ = run(["tomo", "--state", "random", "--noise", "0.01", "--seed", "7", "--emit-records", str(rec)], capsys)
    doc = json.loads(out)
    assert code == 0 and "residual" in doc and doc["frobenius_error"] < 0.1
    code, out2, _ = run(["tomo", "--records", str(rec)], capsys)
    assert code == 0 and json.loads(out2)["rho_real"] == doc["rho_real"]
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(json.loads(rec.read_text())[:5]))
    assert run(["tomo", "--records", str(bad)], capsys)[0] == 2


def test_seeded_outputs_byte_identical(tmp_path):
    cmds = [
        ["tomo", "--seed", "3", "--noise", "0.02"],
        ["rabi", "--noise", "0.001", "--seed", "3", "--points", "50"],
        ["compile", str(ROOT / "programs/bell.qp")],
        ["prep", "10", "--via-11"],
    ]
    for cmd in cmds:
        outs = []
        for k in range(2):
            path = tmp_path / f"out{k}"
            subprocess.run([sys.executable, "-m", "quartit", *cmd, "-o", str(path)], check=True)
            outs.append(path.read_bytes())
        assert outs[0] == outs[1] and outs[0]


def test_prep_and_verify(capsys):
    code, out, _ = run(["prep", "00", "--d", "0.1"], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["pseudopure"] and doc["target_level"] == 0
    code, out, _ = run(["verify"], capsys)
    assert code == 0 and "mismatch" not in out


def test_rabi_csv(capsys):
    code, out, _ = run(["rabi", "--transition", "23", "--points", "20", "--tmax", "1e-3"], capsys)
    lines = out.splitlines()
    assert code == 0 and lines[0] == "t_p_s,delta_rxx_ohm,mz" and len(lines) == 21
