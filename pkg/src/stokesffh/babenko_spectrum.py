"""Spectrum of the linearised Babenko operator and its branch points.

The eigenproblem ``S1 f = xi f`` is solved in the symmetrised auxiliary
variable ``h = u_q^(1/2) f``, where the operator ``K = q_u^(1/2) A1 q_u^(1/2)``
is hermitian in the plain inner product on the uniform q-nodes. For Floquet
``mu != 0`` the uniform grid (``L = 1``) is required and ``K = S1_mu``.

Eigenvalues near a shift ``sigma`` are found by Arnoldi iteration on the
resolvent ``(K - sigma)^-1``, each application being a preconditioned MINRES
solve.
"""
from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import spectral as sp
from .krylov import KrylovConvergenceError, arnoldi_eigs, minres
from .stokes import BranchState, StokesWave, reflect, resample_wave

log = logging.getLogger(__name__)

# residual above which a shift-invert result is taken as a singular shift
NUDGE_RESIDUAL = 1e-6

__all__ = [
    "EigenPair",
    "BranchPoint",
    "apply_S1_mu",
    "apply_symmetrized",
    "eig_nearest",
    "eigs_near",
    "eigenfunction_parity",
    "parity_projector",
    "track_eigenvalue_branch",
    "find_branch_point",
    "write_spectrum",
]


@dataclass
class EigenPair:
    """Eigenvalue ``xi`` of ``S1_mu`` and its unit-norm eigenfunction envelope.

    For waves on an auxiliary map the eigenfunction is sampled at the wave's
    q-nodes.
    """

    xi: float
    eigenfunction: sp.QuasiField
    mu: float
    parity: str
    residual: float


@dataclass
class BranchPoint:
    s_star: float
    mu: float
    kind: str
    bracket_width: float
    bracket: tuple = ()
    xi_ends: tuple = ()


def apply_S1_mu(w: StokesWave, f, mu: float = 0.0):
    """``(c^2 k_mu - g) f - g (y k_mu f + f k y + k_mu (y f))`` on envelopes.

    Accepts a :class:`~stokesffh.spectral.QuasiField` or an envelope array.
    """
    proto = f if isinstance(f, sp.QuasiField) else None
    v = f.values if proto is not None else np.asarray(f)
    mu = proto.mu if proto is not None else float(mu)
    if v.shape[-1] != w.n_modes:
        raise ValueError("field and wave grids differ")
    if w.L != 1.0 and mu != 0.0:
        raise ValueError("quasiperiodic operators need a uniformly sampled wave (L = 1)")
    fl = w.fields
    out = fl.A1(v, mu)
    if not fl.uniform:
        out = fl.q_u * out
    if proto is None:
        return out
    return sp.QuasiField(proto.grid, mu, np.asarray(out, dtype=complex))


def _on_map(w: StokesWave, aux: Optional[sp.AuxMap]) -> StokesWave:
    if aux is None or (aux.L == w.L and aux.n_modes == w.n_modes):
        return w
    return resample_wave(w, aux.n_modes, aux.L)


def apply_symmetrized(w: StokesWave, aux: Optional[sp.AuxMap], h):
    """``q_u^(1/2) A1 (q_u^(1/2) h)`` with ``A1`` the q-space Jacobian.

    A wave sampled on a different map is spectrally re-sampled onto ``aux``.
    """
    w = _on_map(w, aux)
    v = h.values if isinstance(h, sp.QuasiField) else np.asarray(h)
    fl = w.fields
    out = fl.sqrt_q_u * fl.A1(fl.sqrt_q_u * v)
    if isinstance(h, sp.QuasiField):
        return sp.QuasiField(h.grid, h.mu, np.asarray(out, dtype=complex))
    return out


def parity_projector(n: int, mu: float, parity: Optional[str]):
    """Projector onto envelopes whose full function is even/odd in ``u``.

    Defined for ``mu`` in ``{0, 1/2}``; returns ``None`` otherwise or when
    ``parity`` is ``None``.
    """
    if parity is None:
        return None
    if parity not in ("even", "odd"):
        raise ValueError(f"parity must be 'even' or 'odd', got {parity!r}")
    if mu not in (0.0, 0.5):
        raise ValueError("parity is only defined for mu = 0 and mu = 1/2")
    sign = 1.0 if parity == "even" else -1.0
    u = sp.Grid(n).nodes
    phase = np.exp(-2j * mu * u) if mu else None

    def proj(v):
        r = reflect(v)
        if phase is not None:
            r = r * phase
        return 0.5 * (v + sign * r)
    return proj


def eigenfunction_parity(f: sp.QuasiField, ratio: float = 1e-6) -> str:
    """Classify an eigenfunction as ``even``, ``odd`` or ``none``.

    Compares ``||f(u) - f(-u)||`` with ``||f(u) + f(-u)||`` for the full
    quasiperiodic function; parity is only meaningful for ``mu`` in
    ``{0, 1/2}``.
    """
    if f.mu not in (0.0, 0.5):
        return "none"
    v = np.asarray(f.values)
    r = reflect(v) * np.exp(-2j * f.mu * f.grid.nodes)
    minus = np.linalg.norm(v - r)
    plus = np.linalg.norm(v + r)
    scale = max(minus, plus)
    if scale == 0.0:
        return "none"
    if minus <= ratio * scale:
        return "even"
    if plus <= ratio * scale:
        return "odd"
    return "none"


def _normalize(v: np.ndarray) -> np.ndarray:
    n = v.size
    v = v / (np.linalg.norm(v) * np.sqrt(2.0 * np.pi / n))
    crest = v[n // 2]
    if abs(crest) > 1e-8 * np.abs(v).max():
        ph = crest / abs(crest)
    else:
        # odd function: fix the sign just to the right of the crest
        j = n // 2 + 1 + int(np.argmax(np.abs(v[n // 2 + 1: n // 2 + 1 + max(1, n // 8)])))
        ph = v[j] / abs(v[j])
    return v / ph


_drop_nyquist = sp.drop_nyquist


def _operator(w: StokesWave, mu: float):
    fl = w.fields
    if mu == 0.0:
        return lambda h: _drop_nyquist(fl.sqrt_q_u * fl.A1(fl.sqrt_q_u * _drop_nyquist(h)))
    if not fl.uniform:
        raise ValueError("quasiperiodic spectra need a uniformly sampled wave (L = 1)")
    return lambda h: _drop_nyquist(fl.A1(_drop_nyquist(h), mu))


def _resolvent_precond(w: StokesWave, mu: float, sigma: float, floor: float = 1e-3):
    kk = np.abs(sp.Grid(w.n_modes).wavenumbers + mu)
    d = np.maximum(np.abs(w.c ** 2 * kk - w.g - sigma), floor)

    def apply(v):
        return sp.ifft(sp.fft(v) / d)
    return apply


def eigs_near(w: StokesWave, sigma: float, mu: float = 0.0, nev: int = 1,
              parity: Optional[str] = None, v0: Optional[np.ndarray] = None,
              tol: float = 1e-10, ncv: Optional[int] = None,
              inner_max_iter: int = 5000, seed: int = 0,
              max_nudges: int = 3) -> list[EigenPair]:
    """The ``nev`` eigenpairs of ``S1_mu`` nearest to ``sigma``.

    With ``parity`` set (``mu`` in ``{0, 1/2}``) the search is restricted to
    the even or odd subspace, which splits the degenerate pairs of the flat
    surface. The inner MINRES tolerance is ``0.01 * tol``.

    A shift sitting on an eigenvalue (the translational zero at ``mu = 0``,
    say) makes the resolvent singular and spoils the other Ritz pairs. When
    any returned residual exceeds ``1e-6`` the shift is moved by
    ``1e-4 (1 + |sigma|)``, ten times further on each retry.
    """
    kw = dict(mu=mu, nev=nev, parity=parity, v0=v0, tol=tol, ncv=ncv,
              inner_max_iter=inner_max_iter, seed=seed)
    pairs = _eigs_at(w, sigma, **kw)
    step = 1e-4 * (1.0 + abs(sigma))
    for _ in range(max_nudges):
        if max(p.residual for p in pairs) <= NUDGE_RESIDUAL:
            break
        log.info("shift %.12g looks singular (residual %.1e); nudging by %.1e",
                 sigma, max(p.residual for p in pairs), step)
        pairs = _eigs_at(w, sigma + step, **kw)
        step *= 10.0
    pairs.sort(key=lambda p: abs(p.xi - sigma))
    return pairs


def _eigs_at(w: StokesWave, sigma: float, mu: float, nev: int, parity: Optional[str],
             v0: Optional[np.ndarray], tol: float, ncv: Optional[int],
             inner_max_iter: int, seed: int) -> list[EigenPair]:
    n = w.n_modes
    mu = float(mu)
    K = _operator(w, mu)
    P = parity_projector(n, mu, parity)
    prec = _resolvent_precond(w, mu, sigma)
    inner_tol = 0.01 * tol
    stats = {"solves": 0, "iters": 0}

    def shifted(x):
        return K(x) - sigma * x

    # identity on the discarded modes keeps the operator nonsingular there, so
    # rounding that leaks into them is not amplified near a small eigenvalue
    if P is not None:
        def op(x):
            px = _drop_nyquist(P(x))
            return _drop_nyquist(P(shifted(px))) + (x - px)
    else:
        def op(x):
            px = _drop_nyquist(x)
            return _drop_nyquist(shifted(px)) + (x - px)

    def B(x):
        rhs = _drop_nyquist(P(x) if P is not None else x)
        z, rep = minres(op, rhs, precond=prec, tol=inner_tol, max_iter=inner_max_iter)
        stats["solves"] += 1
        stats["iters"] += rep.iterations
        # a shift very close to an eigenvalue stalls MINRES just above target;
        # the outer residual is recomputed, so only a gross failure is fatal
        if not rep.converged and rep.relative_residual > 100.0 * inner_tol:
            raise KrylovConvergenceError(
                f"inner MINRES did not converge at shift {sigma}: {rep.message} "
                f"(residual {rep.relative_residual:.2e} after {rep.iterations} iterations)",
                residual=rep.relative_residual, iterations=rep.iterations)
        return P(z) if P is not None else z

    if v0 is None:
        rng = np.random.default_rng(seed)
        v0 = rng.standard_normal(n) + (1j * rng.standard_normal(n) if mu else 0.0)
    v0 = np.asarray(v0, dtype=complex)
    if P is not None:
        v0 = P(v0)
    v0 = _drop_nyquist(v0)
    dim = n - 1
    if P is not None:
        dim = n // 2 if parity == "even" or mu else n // 2 - 1
    if ncv is None:
        ncv = min(4 * nev + 8, dim)
    results = arnoldi_eigs(B, nev, ncv=ncv, tol=tol, dimension=n, v0=v0)
    log.debug("eigs_near sigma=%g mu=%g: %d solves, %d MINRES iterations",
              sigma, mu, stats["solves"], stats["iters"])
    pairs = []
    for r in results:
        xi_c = sigma + 1.0 / r.value
        h = r.vector
        if mu == 0.0:
            h_real = h * np.exp(-1j * np.angle(h[np.argmax(np.abs(h))]))
            if np.linalg.norm(h_real.imag) <= 1e-8 * np.linalg.norm(h_real):
                h = h_real.real
        Kh = K(h)
        ray = np.vdot(h, Kh) / np.vdot(h, h)
        if abs(ray.imag) > 1e-10 * max(1.0, abs(ray)):
            log.warning("Rayleigh quotient has imaginary part %.2e", ray.imag)
        xi = float(ray.real)
        res = float(np.linalg.norm(Kh - xi * h) / np.linalg.norm(h))
        fvals = _normalize(w.fields.sqrt_q_u * h) if not w.fields.uniform else _normalize(h)
        if mu == 0.0 and np.iscomplexobj(fvals) and np.linalg.norm(fvals.imag) <= 1e-8 * np.linalg.norm(fvals):
            fvals = fvals.real
        qf = sp.QuasiField(w.grid, mu, np.asarray(fvals, dtype=complex))
        par = parity if parity is not None else eigenfunction_parity(qf, 1e-6)
        if abs(xi - xi_c.real) > 1e-6 * max(1.0, abs(xi)):
            log.debug("Ritz value %s and Rayleigh quotient %s differ", xi_c, xi)
        pairs.append(EigenPair(xi, qf, mu, par, res))
    pairs.sort(key=lambda p: abs(p.xi - sigma))
    return pairs


def eig_nearest(w: StokesWave, sigma: float, mu: float = 0.0,
                v0: Optional[np.ndarray] = None, parity: Optional[str] = None,
                tol: float = 1e-10, **kw) -> EigenPair:
    """Eigenpair of ``S1_mu`` nearest to the real shift ``sigma``."""
    return eigs_near(w, sigma, mu, nev=1, parity=parity, v0=v0, tol=tol, **kw)[0]


def _transfer(f: np.ndarray, w: StokesWave) -> np.ndarray:
    """Move an eigenfunction onto the grid of ``w`` (same map assumed)."""
    if f.size == w.n_modes:
        return f
    return sp.pad_spectrum(f, w.n_modes, tail_tol=1e-8)


def track_eigenvalue_branch(branch: BranchState, seed: EigenPair, mu: Optional[float] = None,
                            parity: Optional[str] = None, tol: float = 1e-10,
                            min_overlap: float = 0.5, max_refine: int = 4) -> list[tuple[float, float]]:
    """Follow one eigenvalue of ``S1_mu`` along a branch of waves.

    At each wave the solve is seeded with the previous eigenfunction and the
    shift ``sigma = xi_prev - 0.1 |dxi|``. When the new eigenfunction overlaps
    the previous one by less than ``min_overlap`` the steepness step is
    refined with intermediate waves.
    """
    mu = seed.mu if mu is None else float(mu)
    if parity is None and seed.parity in ("even", "odd"):
        parity = seed.parity
    out = [(branch.waves[0].s, seed.xi)]
    prev_f = np.asarray(seed.eigenfunction.values)
    prev_xi, dxi = seed.xi, 0.0

    def solve_at(w, f0, xi0, dxi):
        sigma = xi0 - 0.1 * abs(dxi)
        return eig_nearest(w, sigma, mu, v0=_transfer(f0, w), parity=parity, tol=tol)

    prev_w = branch.waves[0]
    for w in branch.waves[1:]:
        pair = solve_at(w, prev_f, prev_xi, dxi)
        f = np.asarray(pair.eigenfunction.values)
        g0 = _transfer(prev_f, w)
        overlap = abs(np.vdot(g0, f)) / (np.linalg.norm(g0) * np.linalg.norm(f))
        depth = 0
        if overlap < min_overlap:
            log.info("branch jump suspected at s=%.6f (overlap %.2f); refining", w.s, overlap)
            sub = [prev_w]
            for frac in np.linspace(0, 1, 2 ** max_refine + 1)[1:-1]:
                from .stokes import solve_newton
                s_mid = prev_w.s + frac * (w.s - prev_w.s)
                sub.append(solve_newton(resample_wave(prev_w, w.n_modes, w.L), s_mid))
            f_cur, xi_cur, d_cur = prev_f, prev_xi, dxi
            for wm in sub[1:]:
                pm = solve_at(wm, f_cur, xi_cur, d_cur)
                d_cur = pm.xi - xi_cur
                f_cur, xi_cur = np.asarray(pm.eigenfunction.values), pm.xi
                out.append((wm.s, pm.xi))
                depth += 1
            pair = solve_at(w, f_cur, xi_cur, d_cur)
            f = np.asarray(pair.eigenfunction.values)
        dxi = pair.xi - prev_xi
        prev_xi, prev_f, prev_w = pair.xi, f, w
        out.append((w.s, pair.xi))
    out.sort()
    return out


def _xi_near_zero(w: StokesWave, mu: float, parity: Optional[str], sigma: float,
                  v0=None, tol: float = 1e-10) -> EigenPair:
    return eig_nearest(w, sigma, mu, v0=v0, parity=parity, tol=tol)


def find_branch_point(branch: BranchState, mu: float, bracket: tuple, tol_s: float = 1e-6,
                      parity: Optional[str] = "even", eig_tol: float = 1e-10,
                      wave_tol: float = 1e-11, shift_offset: float = 0.05) -> BranchPoint:
    """Bisection in steepness for a zero crossing of an eigenvalue of ``S1_mu``.

    At both bracket ends the eigenvalue of the given parity nearest zero is
    computed; they must have opposite signs. Each midpoint re-solves the wave
    (seeded from the stored branch) and follows the same eigenvalue with the
    shift interpolated between the current bracket values and moved by
    ``shift_offset`` so the inner solves stay well conditioned.
    """
    s_lo, s_hi = map(float, bracket)
    if not s_lo < s_hi:
        raise ValueError("bracket must satisfy s_lo < s_hi")
    if mu not in (0.0, 0.5):
        parity = None
    w_lo, w_hi = branch.wave_at(s_lo, wave_tol), branch.wave_at(s_hi, wave_tol)
    p_lo = _xi_near_zero(w_lo, mu, parity, shift_offset, tol=eig_tol)
    p_hi = _xi_near_zero(w_hi, mu, parity, shift_offset, v0=_transfer(p_lo.eigenfunction.values, w_hi),
                         tol=eig_tol)
    x_lo, x_hi = p_lo.xi, p_hi.xi
    log.info("bracket [%.8f, %.8f]: xi = %.3e, %.3e", s_lo, s_hi, x_lo, x_hi)
    if np.sign(x_lo) == np.sign(x_hi):
        raise ValueError(
            f"no sign change of the tracked eigenvalue on [{s_lo}, {s_hi}] (xi = {x_lo:.3e}, {x_hi:.3e})")
    f_ref = p_lo.eigenfunction.values
    local = BranchState(sorted([w_lo, w_hi], key=lambda x: x.s))
    while s_hi - s_lo > tol_s:
        s_mid = 0.5 * (s_lo + s_hi)
        w_mid = local.wave_at(s_mid, wave_tol)
        t = (s_mid - s_lo) / (s_hi - s_lo)
        sigma = (1 - t) * x_lo + t * x_hi + shift_offset
        p = _xi_near_zero(w_mid, mu, parity, sigma, v0=_transfer(f_ref, w_mid), tol=eig_tol)
        local.waves = sorted(local.waves + [w_mid], key=lambda x: x.s)
        f_ref = p.eigenfunction.values
        log.info("s=%.10f xi=%.3e", s_mid, p.xi)
        if np.sign(p.xi) == np.sign(x_lo):
            s_lo, x_lo = s_mid, p.xi
        else:
            s_hi, x_hi = s_mid, p.xi
    # linear interpolation of the crossing inside the final bracket
    s_star = s_lo - x_lo * (s_hi - s_lo) / (x_hi - x_lo)
    kind = "turning_point" if mu == 0.0 else "secondary_bifurcation"
    return BranchPoint(float(s_star), float(mu), kind, float(s_hi - s_lo), (s_lo, s_hi),
                       (x_lo, x_hi))


def write_spectrum(rows, path) -> None:
    """Tab-delimited export with columns ``s, mu, xi, parity, residual``."""
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, delimiter="\t", lineterminator="\n")
        wr.writerow(["s", "mu", "xi", "parity", "residual"])
        for r in rows:
            s, mu, xi, par, res = r
            wr.writerow([f"{s:.16e}", f"{mu:.16e}", f"{xi:.16e}", par, f"{res:.16e}"])
