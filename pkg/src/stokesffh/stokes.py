"""Stokes waves from the Babenko equation.

A wave is stored by the cosine coefficients of its elevation ``y`` (crest at
``u = 0``) together with the speed ``c`` and gravity ``g``. Waves may be
sampled through the crest-centred auxiliary map ``tan(u/2) = L tan(q/2)``;
the cosine series is then in the variable ``q`` and every operator acts on
samples at the uniform q-nodes. ``L = 1`` is the plain uniform grid.

In q-variables the wavenumber operator is ``k = q_u k_q`` and the Babenko
operator becomes ``S y = q_u A(y)`` with

    A(y) = c^2 k_q y - g u_q y - g y k_q y - (g/2) k_q (y^2),

whose Jacobian ``A1`` is hermitian in the plain q inner product. All
quadratic products are de-aliased with the 3/2 rule.
"""
from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass, field, replace
from functools import cached_property
from pathlib import Path
from typing import Optional

import numpy as np

from . import spectral as sp
from .krylov import conjugate_residual, minres

log = logging.getLogger(__name__)

S_LIMIT = 0.14106348398
FORMAT_VERSION = 1
# residual bound every converged wave must meet
FLOOR_RESIDUAL = 1e-10

__all__ = [
    "S_LIMIT",
    "StokesWave",
    "BranchState",
    "ContinuationPolicy",
    "NewtonError",
    "ContinuationError",
    "WaveFileError",
    "flat_wave",
    "babenko_residual",
    "residual_norm",
    "apply_S1",
    "apply_A1",
    "solve_newton",
    "continue_branch",
    "compute_steepness",
    "compute_hamiltonian",
    "surface_from_wave",
    "resample_wave",
    "spectral_tail",
    "write_wave",
    "read_wave",
]


class NewtonError(RuntimeError):
    def __init__(self, message: str, wave: Optional["StokesWave"] = None):
        super().__init__(message)
        self.wave = wave


class ContinuationError(RuntimeError):
    def __init__(self, message: str, branch: Optional["BranchState"] = None):
        super().__init__(message)
        self.branch = branch


class WaveFileError(ValueError):
    pass


def _cos_to_samples(a: np.ndarray, n: int) -> np.ndarray:
    C = np.zeros(n, dtype=complex)
    h = n // 2
    C[0] = a[0]
    C[1:h] = a[1:h] / 2.0
    C[h + 1:] = a[1:h][::-1] / 2.0
    return sp.Grid(n).synthesize(C).real


def _samples_to_cos(y: np.ndarray) -> np.ndarray:
    n = y.shape[-1]
    C = sp.Grid(n).coefficients(y)
    a = np.zeros(n // 2 + 1)
    a[0] = C[0].real
    a[1: n // 2] = 2.0 * C[1: n // 2].real
    return a


def reflect(v: np.ndarray) -> np.ndarray:
    """Samples of ``v(-q)``."""
    return np.roll(v[::-1], 1)


def even_part(v: np.ndarray) -> np.ndarray:
    return 0.5 * (v + reflect(v))


@dataclass(frozen=True)
class StokesWave:
    """A symmetric traveling wave.

    Attributes
    ----------
    n_modes : int
        Number of grid nodes ``N``.
    y_hat : ndarray
        Cosine coefficients ``a_0..a_{N/2}`` of ``y(q) = sum a_k cos(k q)``.
    c, g : float
        Speed and gravity.
    L : float
        Auxiliary map parameter; 1 means uniform sampling in ``u``.
    """

    n_modes: int
    y_hat: np.ndarray = field(repr=False)
    c: float
    g: float = 1.0
    L: float = 1.0
    converged: bool = False
    history: tuple = field(default=(), repr=False, compare=False)

    def __post_init__(self) -> None:
        sp.build_grid(self.n_modes)
        if np.shape(self.y_hat) != (self.n_modes // 2 + 1,):
            raise ValueError("y_hat must hold N/2 + 1 cosine coefficients")
        if not 0.0 < self.L <= 1.0:
            raise ValueError(f"L must lie in (0, 1], got {self.L}")

    @classmethod
    def from_samples(cls, y: np.ndarray, c: float, g: float = 1.0, L: float = 1.0,
                     **kw) -> "StokesWave":
        y = even_part(np.asarray(y, dtype=float))
        return cls(y.shape[-1], _samples_to_cos(y), float(c), float(g), float(L), **kw)

    @property
    def grid(self) -> sp.Grid:
        return sp.Grid(self.n_modes)

    @property
    def aux(self) -> Optional[sp.AuxMap]:
        return None if self.L == 1.0 else sp.build_aux_map(self.L, self.n_modes)

    @cached_property
    def y(self) -> np.ndarray:
        return _cos_to_samples(self.y_hat, self.n_modes)

    @cached_property
    def s(self) -> float:
        return compute_steepness(self)

    @cached_property
    def map_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """``(u(q), u_q, q_u)`` at the nodes of this wave."""
        if self.L == 1.0:
            u = self.grid.nodes
            one = np.ones_like(u)
            return u, one, one
        return sp.build_aux_map(self.L, self.n_modes).centered()

    @cached_property
    def fields(self) -> "_WaveFields":
        return _WaveFields(self)

    @property
    def residual(self) -> float:
        return residual_norm(self)


def flat_wave(n_modes: int, g: float = 1.0, L: float = 1.0) -> StokesWave:
    """The flat surface with linear speed ``c = sqrt(g)``."""
    return StokesWave(n_modes, np.zeros(n_modes // 2 + 1), float(np.sqrt(g)), float(g),
                      float(L), converged=True)


class _WaveFields:
    """Precomputed samples of a wave used by every operator application."""

    def __init__(self, w: StokesWave):
        n = w.n_modes
        self.n = n
        self.c, self.g, self.L = w.c, w.g, w.L
        self.uniform = w.L == 1.0
        self.y = w.y
        Y = sp.fft(self.y)
        self.Y = Y
        ksym = sp.symbol(n, 0.0, "k")
        self.ky = sp.ifft(ksym * Y).real
        self.y_u_q = sp.ifft(sp.symbol(n, 0.0, "deriv") * Y).real  # dy/dq
        self.y_p = sp.to_padded(Y, n).real
        self.ky_p = sp.to_padded(ksym * Y, n).real
        _, self.u_q, self.q_u = w.map_arrays
        self.sqrt_q_u = np.sqrt(self.q_u)

    def A1(self, v: np.ndarray, mu: float = 0.0) -> np.ndarray:
        """Jacobian ``A1`` of the weighted Babenko operator at Floquet ``mu``."""
        n = self.n
        c2, g = self.c * self.c, self.g
        ksym = sp.symbol(n, mu, "k")
        V = sp.fft(v)
        KV = ksym * V
        v_p = sp.to_padded(V, n)
        kv_p = sp.to_padded(KV, n)
        T1 = sp.from_padded(self.y_p * kv_p + self.ky_p * v_p, n)
        T2 = sp.from_padded(self.y_p * v_p, n)
        if self.uniform:
            out = sp.ifft(c2 * KV - g * V - g * (T1 + ksym * T2))
        else:
            out = sp.ifft(c2 * KV - g * (T1 + ksym * T2)) - g * self.u_q * v
        if mu == 0.0 and np.isrealobj(v):
            return out.real
        return out

    def A(self, y: np.ndarray, c: float) -> np.ndarray:
        """Weighted Babenko operator ``A(y) = u_q S(y)`` for arbitrary ``y`` and ``c``."""
        n, g = self.n, self.g
        ksym = sp.symbol(n, 0.0, "k")
        Y = sp.fft(y)
        y_p = sp.to_padded(Y, n)
        ky_p = sp.to_padded(ksym * Y, n)
        T1 = sp.from_padded(y_p * ky_p, n)
        T2 = sp.from_padded(y_p * y_p, n)
        out = sp.ifft(c * c * ksym * Y - g * T1 - 0.5 * g * ksym * T2).real
        return out - g * self.u_q * y


def babenko_residual(w: StokesWave) -> np.ndarray:
    """``S y = c^2 k y - g (x_u y - H(y y_u))`` sampled at the wave's nodes."""
    f = w.fields
    return f.q_u * f.A(f.y, w.c)


def _norm_u(w: StokesWave, v: np.ndarray) -> float:
    # L2 norm with respect to du
    _, u_q, _ = w.map_arrays
    return float(np.sqrt(np.sum(np.abs(v) ** 2 * u_q) * 2.0 * np.pi / w.n_modes))


def residual_norm(w: StokesWave) -> float:
    """Relative Babenko residual ``||S y|| / ||y||`` (0 for the flat surface)."""
    r = _norm_u(w, babenko_residual(w))
    ny = _norm_u(w, w.y)
    if ny == 0.0:
        return r
    return r / ny


def apply_A1(w: StokesWave, v: np.ndarray) -> np.ndarray:
    """Hermitian Jacobian ``A1 = u_q S1`` in q-variables."""
    return w.fields.A1(np.asarray(v))


def apply_S1(w: StokesWave, v: np.ndarray) -> np.ndarray:
    """Linearised Babenko operator ``(c^2 k - g) v - g (y k v + v k y + k(y v))``.

    For ``L < 1`` this is ``q_u A1 v``, hermitian in the ``du`` inner product.
    """
    f = w.fields
    out = f.A1(np.asarray(v))
    return out if f.uniform else f.q_u * out


def compute_steepness(w: StokesWave) -> float:
    """Crest-to-trough height over wavelength, ``(y(0) - y(pi)) / 2 pi``."""
    a = np.asarray(w.y_hat)
    k = np.arange(a.size)
    return float(np.sum(a * (1.0 - (-1.0) ** k)) / (2.0 * np.pi))


def compute_hamiltonian(w: StokesWave) -> tuple[float, float]:
    """Kinetic and potential energy of the wave.

    ``kinetic = 1/2 int psi k psi du`` with ``psi = -c H y`` and ``potential =
    g/2 int y^2 x_u du``. Both are invariant under the auxiliary map, which
    turns them into ``c^2/2 int (H y) k_q (H y) dq`` and ``g/2 int y^2 (u_q +
    k_q y) dq``.
    """
    f = w.fields
    n = w.n_modes
    C = sp.Grid(n).coefficients(f.y)
    kk = np.abs(sp.Grid(n).wavenumbers)
    kinetic = 0.5 * w.c ** 2 * 2.0 * np.pi * float(np.sum(kk * np.abs(C) ** 2))
    y2 = sp.dealiased_product(f.y, f.y)
    potential = 0.5 * w.g * float(np.sum(y2 * (f.u_q + f.ky))) * 2.0 * np.pi / n
    return kinetic, potential


def surface_from_wave(w: StokesWave) -> tuple[np.ndarray, np.ndarray]:
    """Physical surface ``x = u - H y``, ``y`` at the wave's nodes."""
    u, _, _ = w.map_arrays
    # for even y the Hilbert transforms in u and in q coincide
    return u - sp.apply_hilbert(w.y), w.y.copy()


def x_u(w: StokesWave) -> np.ndarray:
    f = w.fields
    return 1.0 + f.q_u * f.ky


def spectral_tail(w: StokesWave) -> float:
    """Norm of the top quarter of the cosine spectrum relative to the whole."""
    a = np.abs(np.asarray(w.y_hat))
    tot = np.linalg.norm(a)
    if tot == 0.0:
        return 0.0
    return float(np.linalg.norm(a[3 * w.n_modes // 8:]) / tot)


def _eval_cos(a: np.ndarray, q: np.ndarray, chunk: int = 512) -> np.ndarray:
    k = np.arange(a.size)
    out = np.empty(q.shape)
    for i in range(0, q.size, chunk):
        out[i:i + chunk] = np.cos(np.outer(q[i:i + chunk], k)) @ a
    return out


def resample_wave(w: StokesWave, n_modes: Optional[int] = None,
                  L: Optional[float] = None) -> StokesWave:
    """Re-sample a wave on another grid size and/or auxiliary map.

    Only spectral interpolation is performed; the result carries
    ``converged=False`` and should be polished with :func:`solve_newton`.
    """
    n = w.n_modes if n_modes is None else int(n_modes)
    L = w.L if L is None else float(L)
    if L == w.L:
        y = sp.pad_spectrum(w.y, n, tail_tol=1e-12)
    else:
        q = sp.Grid(n).nodes
        u = sp.centered_u(q, L)
        q_old = sp.centered_q(u, w.L)
        y = _eval_cos(np.asarray(w.y_hat), q_old)
    return StokesWave.from_samples(y, w.c, w.g, L)


# -- Newton solver ----------------------------------------------------------------


def _control(w: StokesWave, kind: str):
    n = w.n_modes
    if kind == "steepness":
        def ell(v):
            return (v[n // 2] - v[0]) / (2.0 * np.pi)
    elif kind == "y1":
        cq = np.cos(w.grid.nodes)

        def ell(v):
            return 2.0 * np.dot(v, cq) / n
    else:
        raise ValueError(f"unknown amplitude control {kind!r}")
    return ell


def _fourier_precond(n: int, c: float, g: float):
    d = c * c * np.abs(sp.Grid(n).wavenumbers) + g

    def apply(v):
        out = sp.ifft(sp.fft(v) / d)
        return out.real if np.isrealobj(v) else out
    return apply


def _inner_solve(op, rhs, tol, max_iter, precond):
    x, rep = conjugate_residual(op, rhs, tol=tol, max_iter=max_iter, precond=precond)
    if not rep.converged:
        log.debug("CR %s after %d iterations; retrying with MINRES", rep.message, rep.iterations)
        x, rep = minres(op, rhs, tol=tol, max_iter=4 * max_iter, precond=precond)
    return x.real, rep


def solve_newton(initial: StokesWave, target: float, tol: float = 1e-11,
                 max_newton: int = 30, control: str = "steepness",
                 inner_max_iter: int = 2000) -> StokesWave:
    """Newton iteration for the Babenko equation with a linear amplitude control.

    The unknowns are the even samples of ``y`` (mean included) and ``c``; the
    system is closed by ``control(y) = target`` where ``control`` is the
    steepness (default) or the first cosine coefficient (``"y1"``). Each
    Newton step eliminates the bordered ``c`` column with two inner solves of
    the hermitian Jacobian by conjugate residuals, with forcing term
    ``min(1e-3, ||S y|| / ||y||)``.

    Raises :class:`NewtonError` when ``max_newton`` steps do not reach ``tol``.
    """
    w = initial
    n, g = w.n_modes, w.g
    ell = _control(w, control)
    y = even_part(w.y.copy())
    c = float(w.c)
    if target == 0.0 and not np.any(y):
        return replace(flat_wave(n, g, w.L), history=(0.0,))
    if not np.any(y):
        # linear Stokes wave as the starting guess
        a = np.pi * target if control == "steepness" else target
        u, _, _ = w.map_arrays
        y = a * np.cos(u) - 0.5 * a * a
        c = np.sqrt(g * (1.0 + a * a))
    fields = w.fields
    _, u_q, q_u = w.map_arrays
    wgt = 2.0 * np.pi / n

    def rel_residual(F, y):
        r = np.sqrt(np.sum((q_u * F) ** 2 * u_q) * wgt)
        ny = np.sqrt(np.sum(y ** 2 * u_q) * wgt)
        return r / ny if ny > 0 else r

    history = []
    for it in range(max_newton + 1):
        F = fields.A(y, c)
        r = rel_residual(F, y)
        G = ell(y) - target
        history.append(r)
        log.debug("newton %d: residual %.3e control defect %.3e c=%.15f", it, r, G, c)
        control_ok = abs(G) <= 1e-13 * max(1.0, abs(target))
        if r <= tol and control_ok:
            break
        # rounding floor (grows with N): accept once stalled below the hard bound
        if control_ok and it > 0 and r <= FLOOR_RESIDUAL and r > 0.5 * history[-2]:
            log.debug("newton stalled at %.3e (rounding floor)", r)
            break
        if it == max_newton or not np.isfinite(r) or (it > 3 and r > 1e3 * history[0]):
            raise NewtonError(f"Newton failed after {it} steps (residual {r:.3e})",
                              StokesWave.from_samples(y, c, g, w.L))
        cur = StokesWave.from_samples(y, c, g, w.L)
        cf = cur.fields

        def op(v, cf=cf):
            return even_part(cf.A1(even_part(v)))

        prec = _fourier_precond(n, c, g)
        eta = min(1e-3, max(r, 1e-13))
        a, _ = _inner_solve(op, -even_part(F), eta, inner_max_iter, prec)
        dA_dc = 2.0 * c * cf.ky
        b, _ = _inner_solve(op, -even_part(dA_dc), eta, inner_max_iter, prec)
        db = ell(b)
        if db == 0.0:
            raise NewtonError("amplitude control is degenerate along the speed direction")
        dc = (-G - ell(a)) / db
        y = y + a + dc * b
        c = c + dc
    wave = StokesWave.from_samples(y, c, g, w.L, converged=True, history=tuple(history))
    return wave


# -- continuation -------------------------------------------------------------------


@dataclass
class BranchState:
    """Converged waves ordered by increasing steepness."""

    waves: list = field(default_factory=list)

    def __post_init__(self) -> None:
        s = [w.s for w in self.waves]
        if any(b <= a for a, b in zip(s, s[1:])):
            raise ValueError("steepness must increase strictly along a branch")

    def append(self, w: StokesWave) -> None:
        if self.waves and w.s <= self.waves[-1].s:
            raise ValueError("steepness must increase strictly along a branch")
        self.waves.append(w)

    @property
    def steepness(self) -> np.ndarray:
        return np.array([w.s for w in self.waves])

    @property
    def speed_curve(self) -> list[tuple[float, float]]:
        return [(w.s, w.c) for w in self.waves]

    @property
    def hamiltonian_curve(self) -> list[tuple[float, float]]:
        return [(w.s, sum(compute_hamiltonian(w))) for w in self.waves]

    def nearest(self, s: float) -> StokesWave:
        return self.waves[int(np.argmin(np.abs(self.steepness - s)))]

    def wave_at(self, s: float, tol: float = 1e-11) -> StokesWave:
        """Solve for the wave of steepness ``s`` starting from the stored neighbours."""
        ss = self.steepness
        i = int(np.searchsorted(ss, s))
        if 0 < i < len(ss):
            w0, w1 = self.waves[i - 1], self.waves[i]
            if w0.n_modes == w1.n_modes and w0.L == w1.L:
                t = (s - w0.s) / (w1.s - w0.s)
                guess = StokesWave.from_samples((1 - t) * w0.y + t * w1.y,
                                                (1 - t) * w0.c + t * w1.c, w0.g, w0.L)
            else:
                guess = w1 if abs(w1.s - s) < abs(w0.s - s) else w0
        else:
            guess = self.nearest(s)
        return solve_newton(guess, s, tol=tol)


@dataclass
class ContinuationPolicy:
    """Step control and resolution management for :func:`continue_branch`.

    ``aux`` is ``"fixed"`` (keep the start wave's ``L``) or ``"tiers"``
    (switch ``L`` through ``L_tiers`` as the steepness passes
    ``tier_thresholds``).
    """

    ds: float = 0.01
    ds_min: float = 1e-7
    ds_max: float = 0.01
    tol: float = 1e-11
    max_newton: int = 25
    tail_tol: float = 1e-12
    max_modes: int = 1 << 15
    aux: str = "fixed"
    L_tiers: tuple = (1.0, 0.25, 0.05, 0.005)
    tier_thresholds: tuple = (0.13, 0.138, 0.1405)
    refine: bool = True

    def tier_L(self, s: float) -> float:
        L = self.L_tiers[0]
        for thr, Lt in zip(self.tier_thresholds, self.L_tiers[1:]):
            if s >= thr:
                L = Lt
        return L


def _refine_resolution(w: StokesWave, policy: ContinuationPolicy) -> StokesWave:
    while spectral_tail(w) > policy.tail_tol:
        if 2 * w.n_modes > policy.max_modes:
            log.warning("resolution cap %d reached at s=%.6f (tail %.2e)",
                        policy.max_modes, w.s, spectral_tail(w))
            break
        log.info("doubling resolution to %d at s=%.6f", 2 * w.n_modes, w.s)
        w = solve_newton(resample_wave(w, 2 * w.n_modes), w.s, tol=policy.tol,
                         max_newton=policy.max_newton)
    return w


def continue_branch(start: StokesWave, s_target: float,
                    policy: Optional[ContinuationPolicy] = None,
                    stops: Optional[list] = None) -> BranchState:
    """Follow the branch of Stokes waves from ``start`` up to ``s_target``.

    Steps are taken in steepness with a secant predictor. A failed Newton
    solve halves the step; resolution is doubled whenever the top quarter of
    the spectrum exceeds ``policy.tail_tol``. Extra steepness values listed in
    ``stops`` are always landed on exactly.
    """
    policy = policy or ContinuationPolicy()
    if s_target >= S_LIMIT:
        raise ValueError(f"target steepness {s_target} is beyond the limiting wave {S_LIMIT}")
    if start.s > 0 and not start.converged:
        start = solve_newton(start, start.s, tol=policy.tol, max_newton=policy.max_newton)
    branch = BranchState([start])
    stops = sorted(s for s in (stops or []) if start.s < s < s_target) + [s_target]
    prev: Optional[StokesWave] = None
    cur = start
    ds = policy.ds
    while cur.s < s_target - 1e-15:
        s_next = min(cur.s + ds, stops[0])
        if prev is not None and prev.n_modes == cur.n_modes and prev.L == cur.L:
            t = (s_next - cur.s) / (cur.s - prev.s)
            guess = StokesWave.from_samples(cur.y + t * (cur.y - prev.y),
                                            cur.c + t * (cur.c - prev.c), cur.g, cur.L)
        else:
            guess = cur
        if policy.aux == "tiers":
            L_new = policy.tier_L(s_next)
            if L_new != guess.L:
                log.info("switching auxiliary map to L=%g at s=%.5f", L_new, s_next)
                guess = resample_wave(guess, L=L_new)
        try:
            nxt = solve_newton(guess, s_next, tol=policy.tol, max_newton=policy.max_newton)
        except NewtonError as exc:
            ds *= 0.5
            log.info("Newton failed at s=%.6f (%s); step halved to %.2e", s_next, exc, ds)
            if ds < policy.ds_min:
                raise ContinuationError(f"continuation stalled at s={cur.s:.8f}", branch) from exc
            continue
        if policy.refine:
            nxt = _refine_resolution(nxt, policy)
        prev, cur = cur, nxt
        branch.append(cur)
        if stops and abs(cur.s - stops[0]) < 1e-15:
            stops.pop(0)
        if len(nxt.history) <= 5:
            ds = min(ds * 1.5, policy.ds_max)
    return branch


# -- wave files ----------------------------------------------------------------------


def _format(x: float) -> str:
    return f"{x:.16e}"


def write_wave(w: StokesWave, path) -> None:
    """Write a wave as a self-describing text file.

    Grammar::

        # stokesffh wave
        format_version = 1
        N = <int>
        g = <float>
        c = <float>
        steepness = <float>
        L = <float>
        checksum = sha256:<hex digest of the coefficient block>
        coefficients
        <a_0>
        ...
        <a_{N/2}>

    Floats are written with 17 significant digits, which round-trips IEEE
    doubles exactly.
    """
    block = "\n".join(_format(a) for a in np.asarray(w.y_hat)) + "\n"
    digest = hashlib.sha256(block.encode()).hexdigest()
    header = [
        "# stokesffh wave",
        f"format_version = {FORMAT_VERSION}",
        f"N = {w.n_modes}",
        f"g = {_format(w.g)}",
        f"c = {_format(w.c)}",
        f"steepness = {_format(w.s)}",
        f"L = {_format(w.L)}",
        f"checksum = sha256:{digest}",
        "coefficients",
    ]
    Path(path).write_text("\n".join(header) + "\n" + block)


def read_wave(path) -> StokesWave:
    text = Path(path).read_text()
    head, sep, block = text.partition("coefficients\n")
    if not sep:
        raise WaveFileError(f"{path}: missing coefficient block")
    meta = {}
    for line in head.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, eq, val = line.partition("=")
        if not eq:
            raise WaveFileError(f"{path}: malformed header line {line!r}")
        meta[key.strip()] = val.strip()
    try:
        version = int(meta["format_version"])
    except (KeyError, ValueError) as exc:
        raise WaveFileError(f"{path}: missing format_version") from exc
    if version != FORMAT_VERSION:
        raise WaveFileError(f"{path}: unsupported format_version {version}")
    digest = hashlib.sha256(block.encode()).hexdigest()
    if meta.get("checksum") != f"sha256:{digest}":
        raise WaveFileError(f"{path}: checksum mismatch (truncated or corrupted file)")
    n = int(meta["N"])
    a = np.array([float(v) for v in block.split()])
    if a.size != n // 2 + 1:
        raise WaveFileError(f"{path}: expected {n // 2 + 1} coefficients, found {a.size}")
    w = StokesWave(n, a, float(meta["c"]), float(meta["g"]), float(meta["L"]))
    return replace(w, converged=residual_norm(w) <= 1e-10)
