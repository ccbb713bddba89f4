import numpy as np
import pytest

from stokesffh import spectral as sp
from stokesffh import stokes as st
from conftest import band_limited
from oracles import stokes_series, stokes_series_wave


def _cos_wave(n, a, c=1.0):
    u = sp.build_grid(n).nodes
    return st.StokesWave.from_samples(a * np.cos(u), c)


def test_flat_wave_residual_is_zero():
    w = st.flat_wave(64)
    assert np.all(st.babenko_residual(w) == 0)
    assert st.residual_norm(w) == 0.0
    assert w.s == 0.0 and w.c == 1.0


def test_linear_wave_residual_is_second_order():
    a = 1e-3
    w = _cos_wave(64, a)
    r = np.sqrt(np.mean(st.babenko_residual(w) ** 2))
    # ky = y, x_u y = y + a^2 cos^2 u, H(y y_u) = -a^2/2 cos 2u, so S y = -a^2 (1/2 + cos 2u)
    assert r == pytest.approx(a * a * np.sqrt(0.25 + 0.5), rel=1e-12)


def test_steepness_of_cosine():
    assert _cos_wave(32, 0.3).s == pytest.approx(0.3 / np.pi, rel=1e-14)


def test_S1_on_flat_wave():
    w = st.StokesWave(64, np.zeros(33), 1.3, 2.0)
    u = sp.build_grid(64).nodes
    v = np.cos(5 * u)
    assert np.allclose(st.apply_S1(w, v), (1.69 * 5 - 2.0) * v, atol=1e-13)


def test_S1_hermitian_and_null_vector(waves, rng):
    for s, w in waves.items():
        n = w.n_modes
        a = band_limited(rng, n, n // 4)
        b = band_limited(rng, n, n // 4)
        lhs = np.vdot(a, st.apply_S1(w, b))
        rhs = np.vdot(st.apply_S1(w, a), b)
        assert abs(lhs - rhs) <= 1e-11 * np.linalg.norm(a) * np.linalg.norm(st.apply_S1(w, b))
        y_u = sp.derivative(w.y)
        assert np.linalg.norm(st.apply_S1(w, y_u)) <= 1e-9 * np.linalg.norm(y_u)


def test_converged_waves_satisfy_invariants(waves):
    for s, w in waves.items():
        assert w.converged
        assert st.residual_norm(w) <= 1e-10
        assert st.spectral_tail(w) <= 1e-12
        assert 0 <= w.s < st.S_LIMIT
        assert np.min(st.x_u(w)) > 0


def test_newton_from_flat_with_zero_target():
    w = st.solve_newton(st.flat_wave(32), 0.0)
    assert w.converged and w.c == 1.0 and not np.any(w.y_hat)
    assert len(w.history) == 1


def test_newton_small_amplitude_matches_series():
    eps = 1e-3
    w = st.solve_newton(st.flat_wave(64), eps, control="y1")
    assert st.residual_norm(w) <= 1e-12
    Y, C = stokes_series(5)
    c2 = sum(float(x) * eps ** j for j, x in C.items())
    assert w.c ** 2 == pytest.approx(c2, abs=1e-15)
    assert abs(w.c ** 2 - 1 - 1e-6) < 1e-11


def test_newton_matches_series_at_moderate_amplitude():
    eps = 0.05
    w = st.solve_newton(st.flat_wave(128), eps, control="y1")
    y, c2 = stokes_series_wave(eps, 11, w.grid.nodes)
    assert abs(w.c ** 2 - c2) < 1e-11
    assert np.max(np.abs(w.y - y)) < 1e-11
    # the truncation error shrinks with the order, so the match is not accidental
    y7, c7 = stokes_series_wave(eps, 7, w.grid.nodes)
    assert abs(w.c ** 2 - c7) > 100 * abs(w.c ** 2 - c2)


def test_series_oracle_coefficients():
    from fractions import Fraction as F
    Y, C = stokes_series(5)
    assert C[2] == 1 and C[4] == F(7, 2) and C[1] == C[3] == 0
    assert Y[2] == {0: F(-1, 2), 2: F(1)}


def test_newton_quadratic_convergence(waves):
    w0 = waves[0.05]
    w = st.solve_newton(w0, 0.06)
    h = np.array(w.history)
    assert h[-1] <= 1e-11
    # h[0] belongs to the previous target and is not a Newton iterate of this one
    ratios = [np.log(b) / np.log(a) for a, b in zip(h[1:], h[2:])
              if a < 1e-2 and b > 1e-10]
    assert ratios and min(ratios) >= 1.7


def test_newton_failure_raises():
    with pytest.raises(st.NewtonError):
        st.solve_newton(st.flat_wave(64), 0.12, max_newton=2)
    with pytest.raises(ValueError):
        st.solve_newton(st.flat_wave(64), 0.01, control="height")


def test_resolution_self_consistency():
    w = st.continue_branch(st.flat_wave(256), 0.095493,
                           st.ContinuationPolicy(refine=False)).waves[-1]
    w1 = st.solve_newton(st.resample_wave(w, 1024), w.s)
    w2 = st.solve_newton(st.resample_wave(w, 2048), w.s)
    assert abs(w1.c - w2.c) <= 1e-9


def test_continuation_speed_increases(waves):
    branch = st.continue_branch(st.flat_wave(64), 0.05)
    s, c = np.array(branch.speed_curve).T
    assert np.all(np.diff(s) > 0) and np.all(np.diff(c) > 0)
    # a coarse branch agrees with an independent solve at four times the resolution
    assert abs(branch.waves[-1].c - waves[0.05].c) < 1e-12


def test_continuation_rejects_limiting_target():
    with pytest.raises(ValueError):
        st.continue_branch(st.flat_wave(32), 0.1411)


def test_branch_state_order():
    a, b = _cos_wave(16, 0.1), _cos_wave(16, 0.2)
    st.BranchState([a, b])
    with pytest.raises(ValueError):
        st.BranchState([b, a])


def test_continuation_lands_on_stops():
    br = st.continue_branch(st.flat_wave(64), 0.03, stops=[0.0123])
    assert any(abs(w.s - 0.0123) < 1e-15 for w in br.waves)
    assert abs(br.waves[-1].s - 0.03) < 1e-15


def test_branch_wave_at_interpolates(waves):
    br = st.BranchState([waves[0.08], waves[0.10]])
    w = br.wave_at(0.09)
    assert abs(w.s - 0.09) < 1e-14 and st.residual_norm(w) <= 1e-10
    assert waves[0.08].c < w.c < waves[0.10].c


def test_hamiltonian_small_amplitude():
    assert st.compute_hamiltonian(st.flat_wave(32)) == (0.0, 0.0)
    a, c = 1e-3, 1.2
    kin, pot = st.compute_hamiltonian(_cos_wave(64, a, c))
    assert kin == pytest.approx(np.pi * c * c * a * a / 2, rel=1e-12)
    assert pot == pytest.approx(np.pi * a * a / 2, rel=1e-3)


def test_surface_examples():
    x, y = st.surface_from_wave(st.flat_wave(16))
    assert np.allclose(x, sp.build_grid(16).nodes) and not np.any(y)
    a = 0.1
    w = _cos_wave(32, a)
    x, _ = st.surface_from_wave(w)
    u = w.grid.nodes
    assert np.allclose(x, u + a * np.sin(u), atol=1e-15)


def test_auxiliary_map_wave_agrees_with_uniform(waves):
    w = waves[0.12]
    wl = st.solve_newton(st.resample_wave(w, L=0.5), w.s)
    assert wl.L == 0.5 and st.residual_norm(wl) <= 1e-10
    assert abs(wl.c - w.c) < 1e-11
    x, y = st.surface_from_wave(wl)
    assert np.all(np.diff(x) > 0)


def test_wave_file_round_trip(tmp_path, waves):
    flat = st.flat_wave(32)
    st.write_wave(flat, tmp_path / "flat.txt")
    back = st.read_wave(tmp_path / "flat.txt")
    assert np.array_equal(back.y_hat, flat.y_hat) and back.c == flat.c

    w = waves[0.12]
    st.write_wave(w, tmp_path / "w.txt")
    back = st.read_wave(tmp_path / "w.txt")
    assert np.array_equal(back.y_hat, w.y_hat)
    assert (back.c, back.g, back.L, back.n_modes) == (w.c, w.g, w.L, w.n_modes)
    assert abs(st.residual_norm(back) - st.residual_norm(w)) < 1e-13
    assert back.converged


def test_wave_file_errors(tmp_path, waves):
    p = tmp_path / "w.txt"
    st.write_wave(waves[0.05], p)
    text = p.read_text()
    p.write_text(text[: len(text) // 2])
    with pytest.raises(st.WaveFileError, match="checksum"):
        st.read_wave(p)
    p.write_text(text.replace("format_version = 1", "format_version = 2"))
    with pytest.raises(st.WaveFileError, match="format_version"):
        st.read_wave(p)
    p.write_text("N = 4\n")
    with pytest.raises(st.WaveFileError):
        st.read_wave(p)


def test_wave_validation():
    with pytest.raises(ValueError):
        st.StokesWave(16, np.zeros(8), 1.0)
    with pytest.raises(ValueError):
        st.StokesWave(16, np.zeros(9), 1.0, L=0.0)
