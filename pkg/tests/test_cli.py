import numpy as np
import pytest

from stokesffh import cli
from stokesffh import stokes as st


def _rows(path):
    lines = [l for l in open(path).read().splitlines() if l and not l.startswith("#")]
    return [l.split("\t") for l in lines[1:]]


@pytest.fixture(scope="module")
def wave_file(tmp_path_factory):
    p = tmp_path_factory.mktemp("w") / "w05.wave"
    assert cli.main(["wave", "--steepness", "0.05", "--modes", "256", "--out", str(p)]) == 0
    return p


@pytest.fixture(scope="module")
def flat_file(tmp_path_factory):
    p = tmp_path_factory.mktemp("f") / "flat.wave"
    assert cli.main(["wave", "--steepness", "0", "--modes", "64", "--out", str(p)]) == 0
    return p


def test_wave_command(wave_file, tmp_path):
    w = st.read_wave(wave_file)
    assert abs(w.s - 0.05) < 1e-14
    assert st.residual_norm(w) <= 1e-10 and w.converged
    summary = tmp_path / "branch.tsv"
    out = tmp_path / "w.wave"
    assert cli.main(["wave", "--steepness", "0.03", "--modes", "64", "--out", str(out),
                     "--summary", str(summary)]) == 0
    table = np.loadtxt(summary, skiprows=1)
    assert table.shape[1] == 4 and table[0, 0] == 0.0 and abs(table[-1, 0] - 0.03) < 1e-14
    assert np.all(np.diff(table[:, 1]) > 0)


def test_wave_from_seed(wave_file, tmp_path):
    out = tmp_path / "w06.wave"
    assert cli.main(["wave", "--steepness", "0.06", "--seed", str(wave_file), "--out", str(out)]) == 0
    assert st.read_wave(out).n_modes == 256
    assert cli.main(["wave", "--steepness", "0.01", "--seed", str(wave_file), "--out", str(out)]) == 2


def test_flat_wave_command(flat_file):
    w = st.read_wave(flat_file)
    assert w.c == 1.0 and not np.any(w.y_hat)


@pytest.mark.parametrize("argv", [
    ["wave", "--steepness", "0.142"],
    ["wave", "--steepness", "-0.01"],
    ["wave", "--steepness", "0.05", "--modes", "63"],
    ["wave", "--steepness", "0.05", "--L", "0"],
    ["wave"],
    ["nonsense"],
    ["babenko", "missing.wave"],
])
def test_usage_errors(argv, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert cli.main(argv) == 2


def test_babenko_flat_integer_spectrum(flat_file, tmp_path):
    out = tmp_path / "spectrum.tsv"
    assert cli.main(["babenko", str(flat_file), "--shifts", "-0.9,0.1,1.1", "--out", str(out)]) == 0
    xi = [float(r[2]) for r in _rows(out)]
    assert np.allclose(xi, [-1.0, 0.0, 1.0], atol=1e-10)


def test_babenko_bad_input(flat_file):
    assert cli.main(["babenko", str(flat_file), "--shifts", "a,b"]) == 2
    assert cli.main(["babenko", str(flat_file), "--mu", "1.0"]) == 2
    assert cli.main(["babenko", str(flat_file), "--mu", "0.3", "--parity", "even"]) == 2


def test_babenko_stdout_and_parity(flat_file, capsys):
    assert cli.main(["babenko", str(flat_file), "--shifts", "0.9", "--parity", "odd",
                     "--mu", "0"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0].split("\t") == ["s", "mu", "xi", "parity", "residual"]
    row = out[1].split("\t")
    assert abs(float(row[2]) - 1.0) < 1e-10 and row[3] == "odd"


def test_babenko_track(tmp_path):
    d = tmp_path / "branch"
    d.mkdir()
    for s in ("0.0", "0.02", "0.04"):
        assert cli.main(["wave", "--steepness", s, "--modes", "64",
                         "--out", str(d / f"w{s}.wave")]) == 0
    out = tmp_path / "track.tsv"
    assert cli.main(["babenko", str(d / "w0.0.wave"), "--track", str(d), "--shifts", "0.9",
                     "--parity", "even", "--out", str(out)]) == 0
    rows = _rows(out)
    s = [float(r[0]) for r in rows]
    xi = [float(r[2]) for r in rows]
    assert len(rows) == 3 and s == sorted(s)
    assert abs(xi[0] - 1.0) < 1e-10 and np.all(np.diff(xi) <= 1e-12)


def test_stability_flat_sweep_is_stable(flat_file, tmp_path):
    out = tmp_path / "sweep.tsv"
    assert cli.main(["stability", str(flat_file), "--mu", "0.1", "0.4", "--count", "4",
                     "--nev", "2", "--out", str(out)]) == 0
    text = out.read_text()
    assert "# N = 64" in text
    re = [float(r[1]) for r in _rows(out)]
    assert len(re) == 8 and max(re) <= 1e-8


def test_stability_log_schedule(flat_file, tmp_path):
    out = tmp_path / "sweep.tsv"
    assert cli.main(["stability", str(flat_file), "--mu-log", "1e-6", "1e-2", "--count", "5",
                     "--nev", "1", "--out", str(out)]) == 0
    mus = np.array([float(r[0]) for r in _rows(out)])
    assert np.allclose(np.log10(mus), [-6, -5, -4, -3, -2])
    assert cli.main(["stability", str(flat_file), "--mu-log", "0", "0.5"]) == 2
    assert cli.main(["stability", str(flat_file), "--mu", "0.2", "1.0"]) == 2


def test_stability_summary_line(wave_file, tmp_path, capsys):
    out = tmp_path / "bf.tsv"
    assert cli.main(["stability", str(wave_file), "--mu", "0.1", "0.2", "--count", "2",
                     "--nev", "2", "--out", str(out)]) == 0
    line = capsys.readouterr().out.strip().splitlines()[-1]
    assert line.startswith("# mu* =")
    gamma = float(line.split("gamma* =")[1])
    assert gamma > 0


def test_determinism(wave_file, tmp_path):
    outs = []
    for i in range(2):
        p = tmp_path / f"s{i}.tsv"
        assert cli.main(["stability", str(wave_file), "--mu", "0.1", "0.2", "--count", "2",
                         "--nev", "2", "--workers", str(i + 1), "--out", str(p)]) == 0
        outs.append(p.read_bytes())
    assert outs[0] == outs[1]
    a, b = tmp_path / "a.wave", tmp_path / "b.wave"
    for p in (a, b):
        cli.main(["wave", "--steepness", "0.02", "--modes", "64", "--out", str(p)])
    assert a.read_bytes() == b.read_bytes()


def test_config_layering(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# run settings\nsteepness = 0.01\nmodes = 32\nout = " + str(tmp_path / "c.wave") + "\n")
    assert cli.main(["wave", "--config", str(cfg)]) == 0
    w = st.read_wave(tmp_path / "c.wave")
    assert w.n_modes == 32 and abs(w.s - 0.01) < 1e-14
    # the flag wins over the file
    assert cli.main(["wave", "--config", str(cfg), "--steepness", "0.02"]) == 0
    assert abs(st.read_wave(tmp_path / "c.wave").s - 0.02) < 1e-14
    cfg.write_text("colour = blue\n")
    assert cli.main(["wave", "--config", str(cfg)]) == 2
    cfg.write_text("not a pair\n")
    assert cli.main(["wave", "--config", str(cfg)]) == 2


def test_numerical_failure_exit_code(tmp_path, monkeypatch):
    def fail(*a, **k):
        raise st.ContinuationError("forced", None)
    monkeypatch.setattr(st, "continue_branch", fail)
    assert cli.main(["wave", "--steepness", "0.05", "--out", str(tmp_path / "x")]) == 1
