import json

import jsonschema
import numpy as np
import pytest

from adlab import io
from adlab.cli import run
from adlab.exceptions import FormatError, IoError
from adlab.model import Signal, make_chirp_covariance


def _check_schema(path, command):
    report = json.loads(open(path).read())
    jsonschema.validate(report, io.load_schema(command))
    assert report["format"] == "adlab-report v1"
    assert report["command"] == command
    return report


def test_signal_roundtrip_bit_exact(tmp_path):
    rng = np.random.default_rng(0)
    s = Signal(rng.standard_normal(33) + 1j * rng.standard_normal(33), dt=0.1, origin=0.3)
    p = tmp_path / "s.csv"
    io.write_signal(p, s)
    back = io.read_signal(p)
    assert np.array_equal(back.samples, s.samples)
    assert back.dt == s.dt and back.origin == s.origin


def test_matrix_roundtrip_bit_exact(tmp_path):
    R = make_chirp_covariance(16, 1 / 16, 0.3, 0.25)
    p = tmp_path / "m.csv"
    io.write_matrix(p, R)
    assert np.array_equal(io.read_matrix(p), R)


@pytest.mark.parametrize("complex_grid", [False, True])
def test_grid_roundtrip(tmp_path, complex_grid):
    G = np.random.default_rng(1).standard_normal((3, 5))
    if complex_grid:
        G = G + 1j * G[::-1]
    p = tmp_path / "g.csv"
    io.write_grid(p, G, "scale", "time")
    values, r, c = io.read_grid(p)
    assert np.array_equal(values, G) and (r, c) == ("scale", "time")


def test_bad_files(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("# adlab-signal v2 M=2 dt=1\n1,0\n0,1\n")
    with pytest.raises(FormatError):
        io.read_signal(p)
    p.write_text("# adlab-signal v1 M=3 dt=1\n1,0\n0,1\n")
    with pytest.raises(FormatError):
        io.read_signal(p)
    p.write_text("# adlab-matrix v1 M=1\nx,0\n")
    with pytest.raises(FormatError):
        io.read_matrix(p)
    with pytest.raises(IoError):
        io.read_signal(tmp_path / "missing.csv")
    with pytest.raises(FormatError):
        io.write_grid(tmp_path / "g.csv", np.zeros((2, 2)), "bad axis", "x")


def test_cli_gen_and_estimate(tmp_path):
    sig = tmp_path / "tone.csv"
    assert run(["gen", "--kind", "tone", "--m", "16", "--bin", "3", "--out", str(sig),
                "--json", str(tmp_path / "gen.json")]) == 0
    _check_schema(tmp_path / "gen.json", "gen")
    out = tmp_path / "est.json"
    assert run(["estimate", "--signal", str(sig), "--group", "cyclic", "--json", str(out),
                "--csv", str(tmp_path / "F.csv")]) == 0
    rep = _check_schema(out, "estimate")
    assert rep["result"]["rank"] == 1
    F = io.read_matrix(tmp_path / "F.csv")
    assert np.trace(F).real == pytest.approx(16.0)


@pytest.mark.parametrize("kind", ["periodogram", "dct", "autocorr", "ambiguity", "scalogram",
                                  "reconstruct"])
def test_cli_transform(tmp_path, kind):
    sig = tmp_path / "g.csv"
    assert run(["gen", "--kind", "gaussian", "--m", "64", "--beta", "0", "--out", str(sig)]) == 0
    out = tmp_path / "t.json"
    assert run(["transform", "--kind", kind, "--signal", str(sig), "--json", str(out),
                "--csv", str(tmp_path / "t.csv")]) == 0
    _check_schema(out, "transform")
    io.read_grid(tmp_path / "t.csv")


def test_cli_ambiguity_impulse_is_single_column(tmp_path):
    sig = tmp_path / "imp.csv"
    run(["gen", "--kind", "impulse", "--m", "8", "--bin", "2", "--out", str(sig)])
    out = tmp_path / "a.json"
    assert run(["transform", "--kind", "ambiguity", "--signal", str(sig), "--json", str(out),
                "--csv", str(tmp_path / "a.csv")]) == 0
    rep = json.loads(out.read_text())
    assert rep["result"]["nonzero_delays"] == [0]
    values, rows, cols = io.read_grid(tmp_path / "a.csv")
    assert (rows, cols) == ("doppler", "delay")
    assert np.count_nonzero(np.abs(values).sum(axis=0) > 1e-12) == 1


def test_cli_classify_and_match(tmp_path):
    cov = tmp_path / "chirp.csv"
    assert run(["gen", "--kind", "chirp", "--m", "32", "--dt", str(1 / 32), "--beta", "0.02",
                "--out", str(cov)]) == 0
    out = tmp_path / "c.json"
    assert run(["classify", "--covariance", str(cov), "--beta", "0.02", "--dt", str(1 / 32),
                "--json", str(out)]) == 0
    assert _check_schema(out, "classify")["matched"] == "chirpshift"
    out = tmp_path / "m.json"
    assert run(["match", "--covariance", str(cov), "--basis", "chirp-circulant", "--beta",
                "0.02", "--dt", str(1 / 32), "--json", str(out)]) == 0
    assert _check_schema(out, "match")["delta"] <= 1e-12


def test_cli_fig3(tmp_path):
    out = tmp_path / "f.json"
    assert run(["fig3", "--json", str(out), "--csv", str(tmp_path / "f.csv")]) == 0
    rep = _check_schema(out, "fig3")
    assert [r["matched"] for r in rep["rows"]] == ["shift", "logdiag", "chirpshift"]
    values, _, _ = io.read_grid(tmp_path / "f.csv")
    assert values.shape == (3, 3)


def test_cli_studies(tmp_path):
    out = tmp_path / "cv.json"
    assert run(["converge", "--json", str(out)]) == 0
    assert _check_schema(out, "converge")["passed"] is True
    out = tmp_path / "u.json"
    assert run(["uncertainty", "--m", "256", "--json", str(out)]) == 0
    _check_schema(out, "uncertainty")
    out = tmp_path / "r.json"
    assert run(["replacement", "--m", "16", "--bin", "3", "--snr=-20,20", "--trials", "50",
                "--repetitions", "4", "--seed", "1", "--json", str(out)]) == 0
    _check_schema(out, "replacement")
    out = tmp_path / "n.json"
    assert run(["noisefloor", "--m", "32", "--trials", "100", "--seed", "1", "--json",
                str(out)]) == 0
    assert _check_schema(out, "noisefloor")["result"]["exploratory"] is True


def test_cli_selftest(tmp_path, capsys):
    out = tmp_path / "s.json"
    assert run(["selftest", "--json", str(out)]) == 0
    _check_schema(out, "selftest")
    assert "[FAIL]" not in capsys.readouterr().out


def test_cli_exit_codes(tmp_path, capsys):
    assert run([]) == 2
    assert run(["gen", "--kind", "noise", "--out", str(tmp_path / "n.csv")]) == 2
    assert run(["replacement"]) == 2
    assert run(["estimate", "--signal", str(tmp_path / "missing.csv")]) == 1
    assert "error: IoError" in capsys.readouterr().err
    assert run(["gen", "--kind", "self-similar", "--hurst", "1.5", "--out",
                str(tmp_path / "x.csv")]) == 1
    assert "InvalidModel" in capsys.readouterr().err


def test_cli_noise_seed_reproducible(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run(["gen", "--kind", "noise", "--m", "8", "--seed", "4", "--out", str(a)])
    run(["gen", "--kind", "noise", "--m", "8", "--seed", "4", "--out", str(b)])
    assert a.read_text() == b.read_text()
