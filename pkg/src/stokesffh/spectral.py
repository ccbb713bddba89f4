"""Periodic grids and Fourier multipliers.

Fields are plain numpy arrays of samples on the uniform grid
``u_j = -pi + 2*pi*j/N``. The crest of a symmetric wave sits at ``u = 0``,
which is node ``j = N/2``; the trough ``u = -pi`` is node ``0``.

Fourier coefficients are indexed in FFT order, ``k = 0, 1, ..., N/2-1, -N/2,
..., -1``. The Nyquist mode ``k = -N/2`` has no partner and is annihilated by
every multiplier and every product, so all operators act on the
``N - 1``-dimensional space of modes ``|k| < N/2``.

Quasiperiodic fields ``f(u) = f~(u) exp(i mu u)`` are represented by their
periodic envelope ``f~``; the ``*_mu`` operators act on envelopes with the
wavenumber ``k`` replaced by ``k + mu``.
"""
from __future__ import annotations

import os
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.fft as sfft

__all__ = [
    "Grid",
    "QuasiField",
    "AuxMap",
    "build_grid",
    "build_aux_map",
    "apply_hilbert",
    "apply_k",
    "apply_hilbert_mu",
    "apply_k_mu",
    "apply_kinv_mu",
    "pad_spectrum",
    "derivative",
    "dealiased_product",
    "inner",
    "set_fft_workers",
]

_WORKERS = int(os.environ.get("STOKESFFH_THREADS", "1") or 1)


def set_fft_workers(n: int) -> None:
    """Set the number of threads scipy.fft may use."""
    global _WORKERS
    _WORKERS = max(1, int(n))


def fft(a: np.ndarray) -> np.ndarray:
    return sfft.fft(a, workers=_WORKERS)


def ifft(a: np.ndarray) -> np.ndarray:
    return sfft.ifft(a, workers=_WORKERS)


@dataclass(frozen=True)
class Grid:
    """Uniform grid of ``n_modes`` nodes on one 2*pi period."""

    n_modes: int

    def __post_init__(self) -> None:
        n = self.n_modes
        if not isinstance(n, (int, np.integer)) or n < 8 or n % 2:
            raise ValueError(f"n_modes must be an even integer >= 8, got {n!r}")

    @property
    def period(self) -> float:
        return 2.0 * np.pi

    @property
    def spacing(self) -> float:
        return 2.0 * np.pi / self.n_modes

    @property
    def nodes(self) -> np.ndarray:
        return _nodes(self.n_modes).copy()

    @property
    def wavenumbers(self) -> np.ndarray:
        return _wavenumbers(self.n_modes).copy()

    def coefficients(self, f: np.ndarray) -> np.ndarray:
        """Coefficients ``c_k`` of ``f = sum c_k exp(i k u)`` in FFT order."""
        return fft(f) / self.n_modes * _node_phase(self.n_modes)

    def synthesize(self, coeffs: np.ndarray) -> np.ndarray:
        """Inverse of :meth:`coefficients`."""
        return ifft(coeffs * _node_phase(self.n_modes)) * self.n_modes


def build_grid(n_modes: int) -> Grid:
    return Grid(n_modes)


@lru_cache(maxsize=64)
def _nodes(n: int) -> np.ndarray:
    return -np.pi + 2.0 * np.pi * np.arange(n) / n


@lru_cache(maxsize=64)
def _wavenumbers(n: int) -> np.ndarray:
    return np.fft.fftfreq(n, 1.0 / n)


@lru_cache(maxsize=64)
def _node_phase(n: int) -> np.ndarray:
    # exp(-i k u_0) with u_0 = -pi
    return (-1.0) ** np.abs(_wavenumbers(n))


@lru_cache(maxsize=256)
def _symbol(n: int, mu: float, kind: str) -> np.ndarray:
    kk = _wavenumbers(n) + mu
    if kind == "hilbert":
        s = 1j * np.sign(kk)
    elif kind == "k":
        s = np.abs(kk).astype(complex)
    elif kind == "kinv":
        a = np.abs(kk)
        s = np.zeros(n, dtype=complex)
        nz = a > 0
        s[nz] = 1.0 / a[nz]
    elif kind == "deriv":
        s = 1j * kk
    else:  # pragma: no cover
        raise ValueError(kind)
    s[n // 2] = 0.0
    s.setflags(write=False)
    return s


def symbol(n: int, mu: float, kind: str) -> np.ndarray:
    """Fourier symbol of ``hilbert``, ``k``, ``kinv`` or ``deriv`` at Floquet ``mu``."""
    return _symbol(int(n), float(mu), kind)


def multiply(f: np.ndarray, sym: np.ndarray, mu: float = 0.0) -> np.ndarray:
    """Apply a Fourier multiplier.

    Every ``mu = 0`` symbol satisfies ``s(-k) = conj(s(k))``, so real input
    then stays real.
    """
    out = ifft(sym * fft(f))
    if mu == 0.0 and np.isrealobj(f):
        return out.real
    return out


def _check_finite(f: np.ndarray) -> np.ndarray:
    f = np.asarray(f)
    if not np.all(np.isfinite(f)):
        raise ValueError("field contains non-finite values")
    return f


def apply_hilbert(f: np.ndarray) -> np.ndarray:
    """Circular Hilbert transform, multiplier ``i sign(k)``."""
    f = _check_finite(f)
    return multiply(f, symbol(f.shape[-1], 0.0, "hilbert"))


def apply_k(f: np.ndarray) -> np.ndarray:
    """Wavenumber operator ``k = -d/du H``, multiplier ``|k|``."""
    f = _check_finite(f)
    return multiply(f, symbol(f.shape[-1], 0.0, "k"))


def derivative(f: np.ndarray, mu: float = 0.0) -> np.ndarray:
    return multiply(np.asarray(f), symbol(np.shape(f)[-1], mu, "deriv"), mu)


@dataclass(frozen=True)
class QuasiField:
    """Periodic envelope ``values`` of ``f(u) = values(u) * exp(i mu u)``."""

    grid: Grid
    mu: float
    values: np.ndarray

    def __post_init__(self) -> None:
        if not 0.0 <= self.mu < 1.0:
            raise ValueError(f"Floquet parameter must lie in [0, 1), got {self.mu}")
        if np.shape(self.values) != (self.grid.n_modes,):
            raise ValueError("envelope length does not match the grid")

    def full(self, u: np.ndarray | None = None) -> np.ndarray:
        """Samples of the quasiperiodic function itself on the grid nodes."""
        u = self.grid.nodes if u is None else u
        return self.values * np.exp(1j * self.mu * u)


def _envelope(f, mu):
    if isinstance(f, QuasiField):
        return f.values, f.mu, f
    return _check_finite(f), float(mu), None


def _wrap(out, proto):
    if proto is None:
        return out
    return QuasiField(proto.grid, proto.mu, np.asarray(out, dtype=complex))


def apply_hilbert_mu(f, mu: float = 0.0):
    """Quasiperiodic Hilbert transform, multiplier ``i sign(k + mu)``.

    Accepts a :class:`QuasiField` (its own ``mu`` is used) or an envelope array.
    """
    v, mu, proto = _envelope(f, mu)
    return _wrap(multiply(v, symbol(v.shape[-1], mu, "hilbert"), mu), proto)


def apply_k_mu(f, mu: float = 0.0):
    """Multiplier ``|k + mu|`` on envelopes."""
    v, mu, proto = _envelope(f, mu)
    return _wrap(multiply(v, symbol(v.shape[-1], mu, "k"), mu), proto)


def apply_kinv_mu(f, mu: float = 0.0):
    """Multiplier ``1/|k + mu|``; at ``mu = 0`` the mean is annihilated (pseudo-inverse)."""
    v, mu, proto = _envelope(f, mu)
    return _wrap(multiply(v, symbol(v.shape[-1], mu, "kinv"), mu), proto)


@lru_cache(maxsize=64)
def _alternating(n: int) -> np.ndarray:
    a = np.ones(n)
    a[1::2] = -1.0
    a.setflags(write=False)
    return a


def drop_nyquist(v: np.ndarray) -> np.ndarray:
    """Remove the Nyquist mode, which lies outside the discretised space."""
    alt = _alternating(np.shape(v)[-1])
    return v - (np.dot(v, alt) / alt.size) * alt


def inner(a: np.ndarray, b: np.ndarray) -> complex:
    """Trapezoid inner product ``int conj(a) b du`` over one period."""
    return np.vdot(a, b) * (2.0 * np.pi / np.shape(a)[-1])


# -- resolution changes -------------------------------------------------------


def resize_coefficients(F: np.ndarray, m: int) -> np.ndarray:
    """Zero-pad or truncate an FFT-ordered coefficient array to length ``m``.

    The Nyquist entry of the result is always zero.
    """
    n = F.shape[-1]
    h = min(n, m) // 2
    out = np.zeros(F.shape[:-1] + (m,), dtype=complex)
    out[..., :h] = F[..., :h]
    out[..., m - h + 1:] = F[..., n - h + 1:]
    return out


def pad_spectrum(f: np.ndarray, new_n: int, tail_tol: float = 1e-13) -> np.ndarray:
    """Resample ``f`` onto a grid of ``new_n`` nodes by spectral interpolation.

    Growing keeps every coefficient and appends zeros. Shrinking is refused
    unless the discarded tail carries less than ``tail_tol`` of the energy.
    """
    f = _check_finite(f)
    n = f.shape[-1]
    build_grid(new_n)
    C = Grid(n).coefficients(f)
    if new_n < n:
        kept = resize_coefficients(C, new_n)
        total = np.sum(np.abs(C) ** 2)
        lost = total - np.sum(np.abs(kept) ** 2)
        if total > 0 and lost > tail_tol * total:
            raise ValueError(
                f"cannot shrink to {new_n} modes: tail energy fraction {lost / total:.3e}"
            )
    out = Grid(new_n).synthesize(resize_coefficients(C, new_n))
    return out.real if np.isrealobj(f) else out


# -- de-aliased products --------------------------------------------------------


def padded_size(n: int) -> int:
    return 3 * n // 2


def to_padded(F: np.ndarray, n: int) -> np.ndarray:
    """Samples on the 3/2-grid of the field with unnormalised FFT ``F`` (length ``n``)."""
    m = padded_size(n)
    return ifft(resize_coefficients(F, m)) * (m / n)


def from_padded(P: np.ndarray, n: int) -> np.ndarray:
    """Unnormalised length-``n`` FFT of the truncation of padded samples ``P``."""
    m = P.shape[-1]
    return resize_coefficients(fft(P), n) * (n / m)


def dealiased_product(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pointwise product truncated back to ``|k| < N/2`` without aliasing."""
    n = np.shape(a)[-1]
    out = ifft(from_padded(to_padded(fft(a), n) * to_padded(fft(b), n), n))
    if np.isrealobj(a) and np.isrealobj(b):
        return out.real
    return out


# -- auxiliary conformal map ---------------------------------------------------


@dataclass(frozen=True)
class AuxMap:
    """Auxiliary map of the period onto itself with Jacobian

        u_q = 2 L / (1 + L^2 - (1 - L^2) cos q),

    which places the finest spacing (``u_q = L``) at ``q = +-pi``. The
    ``centered`` arrays are the same map shifted by half a period so that the
    finest spacing lands on the crest at ``u = q = 0``.
    """

    L: float
    n_modes: int
    q: np.ndarray
    u_of_q: np.ndarray
    u_q: np.ndarray
    q_u: np.ndarray

    @property
    def grid(self) -> Grid:
        return Grid(self.n_modes)

    def centered(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """``(u(q), u_q, q_u)`` of the crest-centred map on the uniform q-nodes."""
        h = self.n_modes // 2
        u = np.roll(self.u_of_q, h) - np.pi
        u[h:] += 2.0 * np.pi
        return u, np.roll(self.u_q, h), np.roll(self.q_u, h)


def aux_jacobian(q: np.ndarray, L: float) -> np.ndarray:
    return 2.0 * L / (1.0 + L * L - (1.0 - L * L) * np.cos(q))


def centered_u(q: np.ndarray, L: float) -> np.ndarray:
    """Crest-centred map ``tan(u/2) = L tan(q/2)`` evaluated at arbitrary ``q``."""
    q = np.asarray(q, dtype=float)
    # keep q in [-pi, pi] then fix the branch
    return 2.0 * np.arctan(L * np.tan(q / 2.0))


def centered_q(u: np.ndarray, L: float) -> np.ndarray:
    """Inverse of :func:`centered_u`."""
    return 2.0 * np.arctan(np.tan(np.asarray(u, dtype=float) / 2.0) / L)


def build_aux_map(L: float, n_modes: int) -> AuxMap:
    if not 0.0 < L <= 1.0:
        raise ValueError(f"aux map parameter L must lie in (0, 1], got {L}")
    g = build_grid(n_modes)
    q = g.nodes
    u_q = aux_jacobian(q, L)
    with np.errstate(divide="ignore"):
        u = 2.0 * np.arctan(np.tan(q / 2.0) / L)
    u[0] = -np.pi
    return AuxMap(float(L), g.n_modes, q, u, u_q, 1.0 / u_q)
