"""Floquet stability of Stokes waves.

Perturbations ``(delta_P, delta_y)`` in canonical conformal variables obey
the quadratic eigenvalue problem

    lambda^2 Q_mu dy - 2 c lambda H_mu dy - S1_mu dy = 0,

with ``Q_mu = Omega21^dagger k_mu^-1 Omega21``. Eigenvalues near ``i sigma``
(``sigma`` real) are found by Arnoldi iteration on ``B = A_sigma^-1 J`` with

    A_sigma^-1 [f; g] = [Q f; 0] + [i sigma Q; 1] S2^-1 (g + i sigma Q f),
    S2 = S1_mu + 2 i c sigma H_mu + sigma^2 Q_mu,

so that ``lambda = i sigma + 1/theta``. ``S2`` is hermitian and the inner
solves use MINRES with a Fourier-diagonal preconditioner.

All operators act on envelopes at the uniform nodes, so the wave must be
sampled with ``L = 1``.
"""
from __future__ import annotations

import csv
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import spectral as sp
from .krylov import KrylovConvergenceError, arnoldi_eigs, minres
from .stokes import StokesWave, resample_wave

log = logging.getLogger(__name__)

__all__ = [
    "ZeroModeError",
    "PerturbationState",
    "StabilityEigenPair",
    "FloquetSweep",
    "apply_omega21_mu",
    "apply_omega21_dagger_mu",
    "apply_R12_dagger_mu",
    "apply_Q_mu",
    "apply_S2_mu",
    "apply_J_mu",
    "block_shift_invert",
    "qep_residual",
    "qep_eigs_near",
    "flat_dispersion",
    "dispersion_ladder",
    "mu_schedule",
    "floquet_sweep",
    "write_sweep",
]

ZU_MIN = 1e-8


class ZeroModeError(ValueError):
    """``Omega21 f`` has a mean at ``mu = 0``, where ``k^-1`` is undefined."""


@dataclass
class PerturbationState:
    """Perturbation envelopes sharing a grid and Floquet parameter.

    ``delta_phi`` holds the first component: the canonical momentum while
    solving, the velocity potential in reported eigenvectors.
    """

    delta_phi: sp.QuasiField
    delta_y: sp.QuasiField

    def __post_init__(self) -> None:
        a, b = self.delta_phi, self.delta_y
        if a.grid != b.grid or a.mu != b.mu:
            raise ValueError("both components must share grid and mu")

    @property
    def mu(self) -> float:
        return self.delta_phi.mu

    @classmethod
    def from_arrays(cls, grid: sp.Grid, mu: float, a, b) -> "PerturbationState":
        return cls(sp.QuasiField(grid, mu, np.asarray(a, dtype=complex)),
                   sp.QuasiField(grid, mu, np.asarray(b, dtype=complex)))

    def stacked(self) -> np.ndarray:
        return np.concatenate([self.delta_phi.values, self.delta_y.values])


@dataclass
class StabilityEigenPair:
    """``lambda = gamma + i omega``; ``state`` is ``(delta_phi, delta_y)``.

    ``canonical`` keeps the solver's ``(delta_P, delta_y)`` pair.
    """

    lam: complex
    state: PerturbationState
    mu: float
    residual: float
    converged: bool = True
    canonical: Optional[PerturbationState] = None

    @property
    def growth(self) -> float:
        return float(self.lam.real)


@dataclass
class FloquetSweep:
    """Stability spectra over a list of Floquet parameters."""

    mu_values: list
    spectra: list
    failures: dict = field(default_factory=dict)

    @property
    def max_growth(self) -> tuple[float, float]:
        """``(mu*, gamma*)`` over converged pairs; ``(nan, 0)`` when empty."""
        best = (float("nan"), 0.0)
        first = True
        for mu, pairs in zip(self.mu_values, self.spectra):
            for p in pairs:
                if p.converged and (first or p.lam.real > best[1]):
                    best, first = (mu, float(p.lam.real)), False
        return best

    def rows(self):
        for mu, pairs in zip(self.mu_values, self.spectra):
            for p in pairs:
                yield mu, p.lam.real, p.lam.imag, p.residual, p.converged


# -- wave samples -------------------------------------------------------------------


class _Fields:
    def __init__(self, w: StokesWave):
        f = w.fields
        self.n = w.n_modes
        self.c, self.g = w.c, w.g
        self.x_u = 1.0 + f.ky
        self.y_u = sp.ifft(sp.symbol(self.n, 0.0, "deriv") * f.Y).real
        self.zu2 = self.x_u ** 2 + self.y_u ** 2
        self.A1 = f.A1


def _fields(w: StokesWave) -> _Fields:
    if w.L != 1.0:
        raise ValueError("stability operators need a uniformly sampled wave (L = 1); "
                         "use resample_wave(w, L=1.0)")
    cached = w.__dict__.get("_stability_fields")
    if cached is None:
        cached = _Fields(w)
        w.__dict__["_stability_fields"] = cached
    return cached


def _split(w: StokesWave, f, mu):
    if isinstance(f, sp.QuasiField):
        if f.values.shape[-1] != w.n_modes:
            raise ValueError("field and wave grids differ")
        return np.asarray(f.values), f.mu, f
    v = np.asarray(f)
    if v.shape[-1] != w.n_modes:
        raise ValueError("field and wave grids differ")
    return v, float(mu), None


def _wrap(out, proto):
    if proto is None:
        return out
    return sp.QuasiField(proto.grid, proto.mu, np.asarray(out, dtype=complex))


def _H(v, mu):
    return sp.ifft(sp.symbol(v.shape[-1], mu, "hilbert") * sp.fft(v))


# -- operator actions on arrays ----------------------------------------------------


def _omega(F: _Fields, v, mu):
    return F.x_u * v + F.y_u * _H(v, mu)


def _omega_dag(F: _Fields, v, mu):
    return F.x_u * v - _H(F.y_u * v, mu)


def _Q(F: _Fields, v, mu, strict=False):
    om = _omega(F, v, mu)
    O = sp.fft(om)
    if mu == 0.0 and strict:
        mean = abs(O[0]) / v.shape[-1]
        if mean > 1e-10 * max(1.0, np.abs(om).max()):
            raise ZeroModeError(f"mean of Omega21 f is {mean:.2e} at mu = 0")
    return _omega_dag(F, sp.ifft(sp.symbol(v.shape[-1], mu, "kinv") * O), mu)


def _S2(F: _Fields, v, mu, sigma):
    out = F.A1(v, mu)
    if sigma != 0.0:
        out = out + 2j * F.c * sigma * _H(v, mu) + sigma * sigma * _Q(F, v, mu)
    return out


# -- public operator actions --------------------------------------------------------


def apply_omega21_mu(w: StokesWave, f, mu: float = 0.0):
    """``x_u f + y_u H_mu f``."""
    v, mu, proto = _split(w, f, mu)
    return _wrap(_omega(_fields(w), v, mu), proto)


def apply_omega21_dagger_mu(w: StokesWave, f, mu: float = 0.0):
    """``x_u f - H_mu(y_u f)``, the adjoint of :func:`apply_omega21_mu`."""
    v, mu, proto = _split(w, f, mu)
    return _wrap(_omega_dag(_fields(w), v, mu), proto)


def apply_R12_dagger_mu(w: StokesWave, f, mu: float = 0.0):
    """``(x_u f + H_mu(y_u f)) / |z_u|^2``, the inverse of ``Omega21^dagger``.

    Raises ``ValueError`` when ``|z_u|^2`` drops below ``1e-8`` (a wave too
    close to the limiting corner for this resolution).
    """
    v, mu, proto = _split(w, f, mu)
    F = _fields(w)
    if F.zu2.min() < ZU_MIN:
        raise ValueError(f"|z_u|^2 = {F.zu2.min():.2e} below {ZU_MIN:g}: wave too close to limiting")
    return _wrap((F.x_u * v + _H(F.y_u * v, mu)) / F.zu2, proto)


def apply_Q_mu(w: StokesWave, f, mu: float = 0.0, strict: bool = True):
    """``Omega21^dagger k_mu^-1 Omega21 f``; hermitian positive semidefinite.

    At ``mu = 0`` the mean of ``Omega21 f`` must vanish; with ``strict`` a
    violation raises :class:`ZeroModeError`, otherwise the mean is dropped.
    """
    v, mu, proto = _split(w, f, mu)
    return _wrap(_Q(_fields(w), v, mu, strict), proto)


def apply_S2_mu(w: StokesWave, f, sigma: float, mu: float = 0.0):
    """``S1_mu + 2 i c sigma H_mu + sigma^2 Q_mu``; hermitian for real ``sigma``."""
    if np.iscomplexobj(sigma) and np.imag(sigma) != 0:
        raise ValueError("sigma must be real")
    v, mu, proto = _split(w, f, mu)
    return _wrap(_S2(_fields(w), v, mu, float(np.real(sigma))), proto)


def apply_J_mu(w: StokesWave, state: PerturbationState) -> PerturbationState:
    """``(w1, w2) -> (w2, w1 - 2 c H_mu w2)``."""
    mu = state.mu
    a, b = state.delta_phi.values, state.delta_y.values
    return PerturbationState.from_arrays(state.delta_phi.grid, mu, b,
                                         a - 2.0 * w.c * _H(b, mu))


# -- resolvent ----------------------------------------------------------------------


def _s2_precond(n: int, c: float, g: float, mu: float, sigma: float, floor: float = 1e-3,
                mu0: float = 1e-6):
    kap = sp.Grid(n).wavenumbers + mu
    a = np.abs(kap)
    d = np.abs(c * c * a - g - 2.0 * c * sigma * np.sign(kap) + sigma * sigma / np.maximum(a, mu0))
    d = np.maximum(d, floor)

    def apply(v):
        return sp.ifft(sp.fft(v) / d)
    return apply


class _Resolvent:
    """Reusable ``A_sigma^-1`` for one wave, Floquet parameter and shift."""

    def __init__(self, w: StokesWave, mu: float, sigma: float, tol: float = 1e-12,
                 max_iter: int = 5000):
        self.F = _fields(w)
        self.n, self.mu, self.sigma = w.n_modes, float(mu), float(sigma)
        self.tol, self.max_iter = tol, max_iter
        self.prec = _s2_precond(self.n, w.c, w.g, self.mu, self.sigma)
        self.solves = 0
        self.iterations = 0

    def s2(self, v):
        # identity on the Nyquist mode keeps the operator nonsingular there
        pv = sp.drop_nyquist(v)
        return sp.drop_nyquist(_S2(self.F, pv, self.mu, self.sigma)) + (v - pv)

    def q(self, v):
        return sp.drop_nyquist(_Q(self.F, sp.drop_nyquist(v), self.mu))

    def __call__(self, f, g):
        Qf = self.q(f)
        rhs = sp.drop_nyquist(g + 1j * self.sigma * Qf)
        z, rep = minres(self.s2, rhs, precond=self.prec, tol=self.tol, max_iter=self.max_iter)
        self.solves += 1
        self.iterations += rep.iterations
        if not rep.converged and rep.relative_residual > 100.0 * self.tol:
            raise KrylovConvergenceError(
                f"MINRES on S2 failed at mu={self.mu}, sigma={self.sigma}: {rep.message} "
                f"(residual {rep.relative_residual:.2e} after {rep.iterations} iterations); "
                "the shift may sit on the spectrum",
                residual=rep.relative_residual, iterations=rep.iterations)
        return Qf + 1j * self.sigma * self.q(z), z

    def apply_B(self, x):
        n = self.n
        a, b = x[:n], x[n:]
        # J [a; b] = [b; a - 2cH b]
        ja = b
        jb = a - 2.0 * self.F.c * _H(b, self.mu)
        p, q = self(ja, jb)
        return np.concatenate([p, q])


def block_shift_invert(w: StokesWave, state: PerturbationState, sigma: float,
                       tol: float = 1e-12, max_iter: int = 5000) -> PerturbationState:
    """``(R M R^dagger - i sigma J_mu)^-1 [f; g]`` by one MINRES solve with ``S2``.

    Raises :class:`~stokesffh.krylov.KrylovConvergenceError` when the inner
    solve fails, typically because ``i sigma`` lies on the spectrum.
    """
    mu = state.mu
    R = _Resolvent(w, mu, sigma, tol, max_iter)
    a, b = R(np.asarray(state.delta_phi.values, dtype=complex),
             np.asarray(state.delta_y.values, dtype=complex))
    return PerturbationState.from_arrays(state.delta_phi.grid, mu, a, b)


def qep_residual(w: StokesWave, lam: complex, dy, mu: float = 0.0) -> float:
    """``||lam^2 Q dy - 2 c lam H dy - S1 dy|| / ||dy||``."""
    v, mu, _ = _split(w, dy, mu)
    F = _fields(w)
    v = sp.drop_nyquist(np.asarray(v, dtype=complex))
    r = lam * lam * _Q(F, v, mu) - 2.0 * F.c * lam * _H(v, mu) - F.A1(v, mu)
    r = sp.drop_nyquist(r)
    return float(np.linalg.norm(r) / np.linalg.norm(v))


def qep_eigs_near(w: StokesWave, mu: float, sigma: float, nev: int = 4,
                  tol: float = 1e-10, ncv: Optional[int] = None,
                  v0: Optional[np.ndarray] = None, seed: int = 0,
                  max_nudges: int = 3) -> list[StabilityEigenPair]:
    """Stability eigenvalues nearest ``i sigma`` at Floquet parameter ``mu``.

    Returns pairs ordered by distance from ``i sigma``, each flagged
    converged when its QEP residual is at most ``1e-8``. Eigenvectors are
    reported in ``(delta_phi, delta_y)`` with the canonical pair kept in
    ``canonical``. When an inner solve fails the shift is nudged by
    ``1e-6 (1 + |sigma|)``.
    """
    if w.L != 1.0:
        w = resample_wave(w, w.n_modes, 1.0)
    n = w.n_modes
    grid = w.grid
    rng = np.random.default_rng(seed)
    if v0 is None:
        v0 = rng.standard_normal(2 * n) + 1j * rng.standard_normal(2 * n)
    v0 = np.asarray(v0, dtype=complex)
    v0 = np.concatenate([sp.drop_nyquist(v0[:n]), sp.drop_nyquist(v0[n:])])
    sig = float(sigma)
    for attempt in range(max_nudges + 1):
        R = _Resolvent(w, mu, sig, tol=0.01 * tol)
        try:
            res = arnoldi_eigs(R.apply_B, nev, ncv=ncv, tol=tol, dimension=2 * n, v0=v0,
                               seed=seed)
            break
        except KrylovConvergenceError as exc:
            if attempt == max_nudges:
                raise
            sig = sig + 1e-6 * (1.0 + abs(sig))
            log.info("nudging shift to %.12g after inner failure: %s", sig, exc)
    log.debug("qep mu=%g sigma=%g: %d solves, %d MINRES iterations", mu, sig, R.solves,
              R.iterations)
    F = _fields(w)
    out = []
    for r in res:
        if r.value == 0:
            continue
        lam = 1j * sig + 1.0 / r.value
        a, b = r.vector[:n], r.vector[n:]
        nb = np.linalg.norm(b)
        if nb == 0.0:
            continue
        resid = qep_residual(w, lam, b, mu)
        phi = (F.x_u * a + _H(F.y_u * a, mu)) / F.zu2
        scale = nb * np.sqrt(2.0 * np.pi / n)
        state = PerturbationState.from_arrays(grid, mu, phi / scale, b / scale)
        canon = PerturbationState.from_arrays(grid, mu, a / scale, b / scale)
        out.append(StabilityEigenPair(complex(lam), state, float(mu), resid,
                                      bool(resid <= 1e-8), canon))
    out.sort(key=lambda p: abs(p.lam - 1j * sig))
    return out


# -- sweeps -------------------------------------------------------------------------


def flat_dispersion(c: float, g: float, mu: float, k) -> np.ndarray:
    """Both flat-surface branches ``c (k+mu) +/- sqrt(g |k+mu|)``, shape ``(2, len(k))``."""
    kap = np.asarray(k, dtype=float) + mu
    r = np.sqrt(g * np.abs(kap))
    return np.stack([c * kap + r, c * kap - r])


def dispersion_ladder(c: float, g: float, mu: float, kmax: int = 3,
                      window: Optional[tuple] = None) -> list[float]:
    """Distinct flat-surface frequencies for ``|k| <= kmax``, sorted.

    ``window`` restricts to ``lo <= omega <= hi``.
    """
    om = np.unique(np.round(flat_dispersion(c, g, mu, np.arange(-kmax, kmax + 1)).ravel(), 12))
    if window is not None:
        om = om[(om >= window[0]) & (om <= window[1])]
    return [float(x) for x in om]


def mu_schedule(lo: float, hi: float, count: int, log_spaced: bool = False) -> np.ndarray:
    """Linear or logarithmic grid of Floquet parameters in ``[lo, hi]``."""
    if not (0.0 <= lo <= hi < 1.0):
        raise ValueError("need 0 <= lo <= hi < 1")
    if log_spaced:
        if lo <= 0.0:
            raise ValueError("a logarithmic schedule needs lo > 0")
        return np.geomspace(lo, hi, count)
    return np.linspace(lo, hi, count)


def _dedupe(pairs, tol=1e-9):
    out = []
    for p in sorted(pairs, key=lambda p: (p.lam.imag, p.lam.real)):
        if not any(abs(p.lam - q.lam) <= tol * max(1.0, abs(p.lam)) for q in out):
            out.append(p)
    return out


def floquet_sweep(w: StokesWave, mus: Sequence[float], shift_policy: str = "zero",
                  nev: int = 4, shifts: Sequence[float] = (0.0,), tol: float = 1e-10,
                  workers: int = 1, ncv: Optional[int] = None) -> FloquetSweep:
    """Stability spectra over a schedule of Floquet parameters.

    ``shift_policy`` is ``"zero"`` (``sigma = 0``), ``"ladder"`` (every value
    in ``shifts`` at each ``mu``) or ``"track"`` (start from ``shifts[0]`` and
    follow ``Im lambda`` of the most unstable pair found at the previous
    ``mu``). Failures are recorded per ``mu`` and the sweep continues. Results
    are ordered by the schedule regardless of ``workers``.
    """
    mus = [float(m) for m in mus]
    if any(not (0.0 <= m < 1.0) for m in mus):
        raise ValueError("Floquet parameters must lie in [0, 1)")
    if shift_policy not in ("zero", "ladder", "track"):
        raise ValueError(f"unknown shift policy {shift_policy!r}")
    if w.L != 1.0:
        w = resample_wave(w, w.n_modes, 1.0)
    _fields(w)
    failures: dict = {}

    def at(mu, sigmas):
        found = []
        for s in sigmas:
            try:
                found.extend(qep_eigs_near(w, mu, s, nev=nev, tol=tol, ncv=ncv))
            except KrylovConvergenceError as exc:
                failures[mu] = str(exc)
                log.warning("mu=%g sigma=%g failed: %s", mu, s, exc)
        return _dedupe(found)

    if shift_policy == "track":
        spectra = []
        sigma = float(shifts[0]) if len(shifts) else 0.0
        for mu in mus:
            pairs = at(mu, [sigma])
            spectra.append(pairs)
            good = [p for p in pairs if p.converged]
            if good:
                sigma = float(max(good, key=lambda p: p.lam.real).lam.imag)
        return FloquetSweep(mus, spectra, failures)

    sigmas = [0.0] if shift_policy == "zero" else [float(s) for s in shifts]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            spectra = list(ex.map(lambda m: at(m, sigmas), mus))
    else:
        spectra = [at(m, sigmas) for m in mus]
    return FloquetSweep(mus, spectra, failures)


def write_sweep(sweep: FloquetSweep, w: StokesWave, path) -> None:
    """Tab-delimited export with a ``# key = value`` header echoing the wave."""
    with open(path, "w", newline="") as fh:
        for key, val in (("N", w.n_modes), ("c", w.c), ("s", w.s), ("g", w.g), ("L", w.L)):
            fh.write(f"# {key} = {val:.16e}\n" if isinstance(val, float) else f"# {key} = {val}\n")
        wr = csv.writer(fh, delimiter="\t", lineterminator="\n")
        wr.writerow(["mu", "re_lambda", "im_lambda", "residual", "converged"])
        for mu, re, im, res, ok in sweep.rows():
            wr.writerow([f"{mu:.16e}", f"{re:.16e}", f"{im:.16e}", f"{res:.16e}", int(ok)])
