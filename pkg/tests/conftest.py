import numpy as np
import pytest

from stokesffh import stokes as st


@pytest.fixture(scope="session")
def waves():
    """Converged waves on uniform grids, keyed by steepness."""
    branch = st.continue_branch(st.flat_wave(256), 0.12,
                                st.ContinuationPolicy(refine=True),
                                stops=[0.02, 0.05, 0.08, 0.10])
    out = {}
    for s in (0.02, 0.05, 0.08, 0.10, 0.12):
        out[s] = min(branch.waves, key=lambda w: abs(w.s - s))
        assert abs(out[s].s - s) < 1e-12
    return out


@pytest.fixture(scope="session")
def small_wave():
    """s = 0.02 on 32 nodes, small enough for dense oracles."""
    return st.solve_newton(st.flat_wave(32), 0.02)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def band_limited(rng, n, kmax, complex_=True):
    """Random field with modes ``|k| <= kmax`` only."""
    F = np.zeros(n, dtype=complex)
    F[:kmax + 1] = rng.standard_normal(kmax + 1) + 1j * rng.standard_normal(kmax + 1)
    F[n - kmax:] = rng.standard_normal(kmax) + 1j * rng.standard_normal(kmax)
    f = np.fft.ifft(F) * n
    return f if complex_ else f.real
