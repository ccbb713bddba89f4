"""Matrix-free Krylov solvers.

MINRES and conjugate residual for hermitian (possibly indefinite) systems,
and a Krylov-Schur restarted Arnoldi method for the dominant eigenvalues of
general complex operators. All solvers work in complex arithmetic; real
problems are simply embedded.

Operators may be given as a :class:`LinearOperator`, a dense matrix, or any
callable ``v -> A v``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np
import scipy.linalg as sla

__all__ = [
    "LinearOperator",
    "SolveReport",
    "EigenResult",
    "KrylovConvergenceError",
    "minres",
    "conjugate_residual",
    "arnoldi_eigs",
    "shift_invert_power",
]

Matvec = Callable[[np.ndarray], np.ndarray]


class KrylovConvergenceError(RuntimeError):
    """An iteration stopped without reaching its tolerance."""

    def __init__(self, message: str, residual: float = np.nan, iterations: int = 0,
                 value=None, vector=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations
        self.value = value
        self.vector = vector


@dataclass
class LinearOperator:
    """Abstract square operator known only through its action."""

    dimension: int
    apply: Matvec
    adjoint_tag: str = "general"

    def __post_init__(self) -> None:
        if self.adjoint_tag not in ("hermitian", "skew", "general"):
            raise ValueError(f"unknown adjoint tag {self.adjoint_tag!r}")

    def __call__(self, v: np.ndarray) -> np.ndarray:
        return self.apply(v)

    def check_adjoint(self, trials: int = 3, seed: int = 0) -> float:
        """Largest relative defect of ``<x, Ay> = +-<Ax, y>`` over random probes."""
        if self.adjoint_tag == "general":
            return 0.0
        sign = 1.0 if self.adjoint_tag == "hermitian" else -1.0
        rng = np.random.default_rng(seed)
        worst = 0.0
        for _ in range(trials):
            x = rng.standard_normal(self.dimension) + 1j * rng.standard_normal(self.dimension)
            y = rng.standard_normal(self.dimension) + 1j * rng.standard_normal(self.dimension)
            Ax, Ay = self.apply(x), self.apply(y)
            lhs, rhs = np.vdot(x, Ay), sign * np.vdot(Ax, y)
            scale = np.linalg.norm(x) * np.linalg.norm(Ay) + np.linalg.norm(Ax) * np.linalg.norm(y)
            worst = max(worst, abs(lhs - rhs) / scale)
        return worst


@dataclass
class SolveReport:
    iterations: int
    relative_residual: float
    converged: bool
    message: str = ""
    history: list = field(default_factory=list, repr=False)


@dataclass
class EigenResult:
    value: complex
    vector: np.ndarray = field(repr=False)
    residual: float
    converged: bool


def _matvec(A) -> Matvec:
    if isinstance(A, LinearOperator):
        return A.apply
    if isinstance(A, np.ndarray):
        return lambda v: A @ v
    if callable(A):
        return A
    raise TypeError(f"cannot use {type(A).__name__} as an operator")


def _precond(M) -> Matvec:
    if M is None:
        return lambda v: v
    if isinstance(M, np.ndarray):
        if np.any(M.real <= 0):
            raise ValueError("diagonal preconditioner must be positive")
        inv = 1.0 / M
        return lambda v: inv * v
    return _matvec(M)


def minres(A, b, precond=None, tol: float = 1e-10, max_iter: int = 1000,
           x0: Optional[np.ndarray] = None) -> tuple[np.ndarray, SolveReport]:
    """Preconditioned MINRES for hermitian ``A``.

    Parameters
    ----------
    A : operator
        Hermitian, possibly indefinite.
    b : ndarray
        Right-hand side.
    precond : ndarray, operator or None
        Positive definite approximation of ``|A|``; an array is read as the
        diagonal of that approximation and inverted elementwise, an operator
        must apply the *inverse*.
    tol : float
        Target for ``||A x - b|| / ||b||`` measured in the preconditioned
        norm.
    max_iter : int
        Iteration cap.

    Returns
    -------
    x, report
        The final iterate and a :class:`SolveReport` whose ``history`` holds
        the residual estimate after each iteration (non-increasing).
    """
    matvec, Minv = _matvec(A), _precond(precond)
    b = np.asarray(b)
    dtype = np.result_type(b.dtype, np.complex128)
    x = np.zeros(b.shape, dtype=dtype) if x0 is None else np.array(x0, dtype=dtype)
    r1 = b - matvec(x) if x0 is not None else b.astype(dtype)
    y = Minv(r1)
    beta1 = np.vdot(r1, y).real
    if beta1 < 0:
        raise ValueError("preconditioner is not positive definite")
    beta1 = np.sqrt(beta1)
    bnorm = np.sqrt(np.vdot(b, Minv(b)).real) if x0 is not None else beta1
    if bnorm == 0.0:
        return np.zeros_like(x), SolveReport(0, 0.0, True, "zero right-hand side", [0.0])
    if beta1 == 0.0:
        return x, SolveReport(0, 0.0, True, "initial guess exact", [0.0])

    eps = np.finfo(float).eps
    oldb, beta, dbar, epsln = 0.0, beta1, 0.0, 0.0
    phibar = beta1
    cs, sn = -1.0, 0.0
    w = np.zeros_like(x)
    w2 = np.zeros_like(x)
    r2 = r1
    history = [phibar / bnorm]
    message = "iteration limit reached"
    converged = False
    itn = 0
    for itn in range(1, max_iter + 1):
        v = y / beta
        y = matvec(v)
        if itn >= 2:
            y = y - (beta / oldb) * r1
        alfa = np.vdot(v, y).real
        y = y - (alfa / beta) * r2
        r1, r2 = r2, y
        y = Minv(r2)
        oldb = beta
        beta2 = np.vdot(r2, y).real
        if beta2 < 0:
            message = "preconditioner lost positivity"
            break
        beta = np.sqrt(beta2)

        oldeps = epsln
        delta = cs * dbar + sn * alfa
        gbar = sn * dbar - cs * alfa
        epsln = sn * beta
        dbar = -cs * beta
        gamma = np.hypot(gbar, beta)
        if gamma < eps * max(abs(alfa), oldb, 1e-300):
            message = "breakdown: singular tridiagonal projection"
            break
        cs, sn = gbar / gamma, beta / gamma
        phi = cs * phibar
        phibar = sn * phibar

        w1, w2 = w2, w
        w = (v - oldeps * w1 - delta * w2) / gamma
        x = x + phi * w

        rel = abs(phibar) / bnorm
        history.append(rel)
        if rel <= tol:
            converged, message = True, "converged"
            break
        if beta <= eps * abs(alfa) or beta == 0.0:
            converged = rel <= tol
            message = "invariant subspace reached"
            break
    return x, SolveReport(itn, history[-1], converged, message, history)


def conjugate_residual(A, b, tol: float = 1e-10, max_iter: int = 1000, precond=None,
                       x0: Optional[np.ndarray] = None,
                       stall_window: int = 50) -> tuple[np.ndarray, SolveReport]:
    """Preconditioned conjugate residual method for hermitian ``A``.

    Minimises the residual in the ``M^-1`` norm over the Krylov space, like
    MINRES, but with short CG-type recurrences. On indefinite operators the
    recurrence can break down; the report then carries ``converged=False``
    and a diagnostic. A singular system whose right-hand side lies outside the
    range is flagged by residual stagnation over ``stall_window`` iterations.
    """
    matvec, Minv = _matvec(A), _precond(precond)
    b = np.asarray(b)
    dtype = np.result_type(b.dtype, np.complex128)
    x = np.zeros(b.shape, dtype=dtype) if x0 is None else np.array(x0, dtype=dtype)
    r = b.astype(dtype) - (matvec(x) if x0 is not None else 0.0)
    z = Minv(r)
    bnorm = np.sqrt(np.vdot(b, Minv(b)).real)
    if bnorm == 0.0:
        return np.zeros_like(x), SolveReport(0, 0.0, True, "zero right-hand side", [0.0])
    Az = matvec(z)
    rho = np.vdot(z, Az)
    p, q = z.copy(), Az.copy()
    rel = np.sqrt(abs(np.vdot(r, z).real)) / bnorm
    history = [rel]
    message, converged = "iteration limit reached", rel <= tol
    itn = 0
    best = rel
    best_at = 0
    if converged:
        return x, SolveReport(0, rel, True, "initial guess exact", history)
    for itn in range(1, max_iter + 1):
        Mq = Minv(q)
        qMq = np.vdot(q, Mq).real
        if qMq == 0.0 or abs(rho) < 1e-300:
            message = "breakdown"
            break
        alpha = rho / qMq
        x = x + alpha * p
        r = r - alpha * q
        z = z - alpha * Mq
        rel = np.sqrt(abs(np.vdot(r, z).real)) / bnorm
        history.append(rel)
        if rel <= tol:
            converged, message = True, "converged"
            break
        if rel < best * (1.0 - 1e-3):
            best, best_at = rel, itn
        elif itn - best_at >= stall_window:
            message = "stagnation: right-hand side not in the range (rank deficient)"
            break
        Az = matvec(z)
        rho_new = np.vdot(z, Az)
        if abs(rho_new) <= 1e-14 * abs(rho):
            message = "breakdown: vanishing recurrence (indefinite or rank deficient operator)"
            break
        beta = rho_new / rho
        rho = rho_new
        p = z + beta * p
        q = Az + beta * q
    return x, SolveReport(itn, history[-1], converged, message, history)


def _sort_key(theta: np.ndarray, which: str) -> np.ndarray:
    if which == "LM":
        return -np.abs(theta)
    if which == "LR":
        return -theta.real
    raise ValueError(f"unsupported selection {which!r}")


def arnoldi_eigs(B, nev: int, ncv: Optional[int] = None, tol: float = 1e-10,
                 dimension: Optional[int] = None, v0: Optional[np.ndarray] = None,
                 max_restarts: int = 200, seed: int = 0,
                 which: str = "LM") -> list[EigenResult]:
    """Dominant eigenpairs of a general operator by Krylov-Schur restarted Arnoldi.

    Parameters
    ----------
    B : operator
        Complex operator of size ``dimension`` (taken from ``B`` when it is a
        :class:`LinearOperator` or a matrix, otherwise from ``v0``).
    nev, ncv : int
        Wanted pairs and the maximal basis size; ``ncv`` defaults to
        ``4*nev + 8`` capped by the dimension. Requires ``nev < ncv``
        unless the basis spans the whole space.
    tol : float
        A pair is accepted once ``||B v - theta v|| <= tol * |theta|`` with
        ``||v|| = 1``.

    Returns
    -------
    list of EigenResult
        ``nev`` pairs ordered by decreasing ``|theta|``; pairs still above
        tolerance after ``max_restarts`` carry ``converged=False``.
    """
    matvec = _matvec(B)
    if dimension is None:
        if isinstance(B, LinearOperator):
            dimension = B.dimension
        elif isinstance(B, np.ndarray):
            dimension = B.shape[0]
        elif v0 is not None:
            dimension = np.size(v0)
        else:
            raise ValueError("dimension unknown; pass dimension or v0")
    n = int(dimension)
    if ncv is None:
        ncv = min(4 * nev + 8, n)
    # a basis spanning the whole space is invariant, so nev == ncv == n is allowed
    if not (0 < nev <= ncv <= n and (nev < ncv or ncv == n)):
        raise ValueError(f"need 0 < nev < ncv <= dimension, got nev={nev}, ncv={ncv}, n={n}")

    rng = np.random.default_rng(seed)
    if v0 is None:
        v0 = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    V = np.zeros((n, ncv + 1), dtype=complex)
    H = np.zeros((ncv + 1, ncv), dtype=complex)
    V[:, 0] = v0 / np.linalg.norm(v0)
    k = 0
    result: list[EigenResult] = []
    for restart in range(max_restarts + 1):
        for j in range(k, ncv):
            w = np.asarray(matvec(V[:, j]), dtype=complex)
            wnorm = np.linalg.norm(w)
            h = V[:, : j + 1].conj().T @ w
            w = w - V[:, : j + 1] @ h
            # second Gram-Schmidt pass
            h2 = V[:, : j + 1].conj().T @ w
            w = w - V[:, : j + 1] @ h2
            h = h + h2
            beta = np.linalg.norm(w)
            H[: j + 1, j] = h
            if beta <= 1e-13 * max(wnorm, 1e-300):
                # invariant subspace: continue with a fresh orthogonal direction
                H[j + 1, j] = 0.0
                r = rng.standard_normal(n) + 1j * rng.standard_normal(n)
                for _ in range(2):
                    r = r - V[:, : j + 1] @ (V[:, : j + 1].conj().T @ r)
                V[:, j + 1] = r / np.linalg.norm(r)
            else:
                H[j + 1, j] = beta
                V[:, j + 1] = w / beta

        m = ncv
        Hm = H[:m, :m]
        theta, S = sla.eig(Hm)
        order = np.argsort(_sort_key(theta, which), kind="stable")
        theta, S = theta[order], S[:, order]
        S = S / np.linalg.norm(S, axis=0)
        resid = np.abs(H[m, m - 1] * S[m - 1, :])
        scale = np.maximum(np.abs(theta), np.finfo(float).tiny)
        ok = resid[:nev] <= tol * scale[:nev]
        if np.all(ok) or restart == max_restarts:
            X = V[:, :m] @ S[:, :nev]
            result = [
                EigenResult(complex(theta[i]), X[:, i] / np.linalg.norm(X[:, i]),
                            float(resid[i]), bool(ok[i]))
                for i in range(nev)
            ]
            break

        # Krylov-Schur restart keeping the wanted Ritz values
        keep = min(nev + (ncv - nev) // 2, ncv - 1)
        threshold = _sort_key(theta, which)[keep - 1]
        T, Z, sdim = sla.schur(Hm, output="complex",
                               sort=lambda t: _sort_key(np.array([t]), which)[0] <= threshold)
        k = max(1, min(sdim, ncv - 1))
        b_row = H[m, m - 1] * Z[m - 1, :k]
        V[:, :k] = V[:, :m] @ Z[:, :k]
        V[:, k] = V[:, m]
        H[:] = 0.0
        H[:k, :k] = T[:k, :k]
        H[k, :k] = b_row
    return result


def shift_invert_power(B_apply: Matvec, v0: np.ndarray, tol: float = 1e-10,
                       max_iter: int = 500) -> tuple[complex, np.ndarray]:
    """Power iteration on a resolvent ``B = (A - sigma)^-1``.

    Returns the dominant ``theta`` of ``B`` and its unit eigenvector; the
    caller maps back with ``xi = sigma + 1/theta``. Raises
    :class:`KrylovConvergenceError` (carrying the last iterate and residual)
    when the dominant eigenvalue is not separated enough to converge.
    """
    matvec = _matvec(B_apply)
    v = np.array(v0, dtype=complex)
    nrm = np.linalg.norm(v)
    if nrm == 0.0:
        raise ValueError("starting vector must be nonzero")
    v /= nrm
    Bv = matvec(v)
    theta, res = 0.0, np.inf
    for it in range(1, max_iter + 1):
        theta = np.vdot(v, Bv)
        res = np.linalg.norm(Bv - theta * v)
        if res <= tol * max(abs(theta), np.finfo(float).tiny):
            return complex(theta), v
        nb = np.linalg.norm(Bv)
        if nb == 0.0:
            break
        v = Bv / nb
        Bv = matvec(v)
    raise KrylovConvergenceError(
        f"power iteration stagnated (residual {res:.3e})", residual=float(res),
        iterations=max_iter, value=complex(theta), vector=v)
