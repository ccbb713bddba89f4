"""Independent reference computations used by the tests.

Dense matrices are assembled column by column from the action of the
matrix-free operators on unit vectors, then handed to LAPACK through
``scipy.linalg``. Analytic references are written out term by term.
"""
from __future__ import annotations

import numpy as np
import scipy.linalg as sla


def probe_matrix(apply, n: int, dtype=complex) -> np.ndarray:
    """Dense matrix of a linear map from its action on the unit vectors."""
    M = np.zeros((n, n), dtype=dtype)
    e = np.zeros(n, dtype=dtype)
    for j in range(n):
        e[j] = 1.0
        M[:, j] = apply(e.copy())
        e[j] = 0.0
    return M


def nyquist_free_basis(n: int) -> np.ndarray:
    """Orthonormal basis (columns) of grid functions without the Nyquist mode."""
    alt = (-1.0) ** np.arange(n) / np.sqrt(n)
    P = np.eye(n) - np.outer(alt, alt)
    w, V = np.linalg.eigh(P)
    return V[:, w > 0.5]


def flat_S1_eigenvalues(n: int, c: float = 1.0, g: float = 1.0, mu: float = 0.0) -> np.ndarray:
    """``c^2 |k + mu| - g`` for ``|k| < n/2``, sorted."""
    k = np.arange(-n // 2 + 1, n // 2)
    return np.sort(c * c * np.abs(k + mu) - g)


def flat_qep_frequencies(n: int, mu: float, c: float = 1.0, g: float = 1.0) -> np.ndarray:
    """All ``c (k+mu) +/- sqrt(g |k+mu|)`` for ``|k| < n/2``, sorted."""
    k = np.arange(-n // 2 + 1, n // 2) + mu
    r = np.sqrt(g * np.abs(k))
    return np.sort(np.concatenate([c * k + r, c * k - r]))


def qep_dense_eigenvalues(Q: np.ndarray, H: np.ndarray, S1: np.ndarray, c: float) -> np.ndarray:
    """Finite eigenvalues of ``lam^2 Q - 2 c lam H - S1`` by companion linearisation.

    ``[[0, I], [S1, 2cH]] z = lam [[I, 0], [0, Q]] z`` with ``z = (v, lam v)``.
    """
    n = Q.shape[0]
    I = np.eye(n)
    Z = np.zeros((n, n))
    A = np.block([[Z, I], [S1, 2.0 * c * H]])
    B = np.block([[I, Z], [Z, Q]])
    lam = sla.eigvals(A, B)
    return lam[np.isfinite(lam)]


def match_sets(a, b) -> float:
    """Largest distance from a point of ``a`` to its nearest point of ``b``."""
    a = np.asarray(a).ravel()
    b = np.asarray(b).ravel()
    return float(max(np.min(np.abs(b - x)) for x in a))


# -- Stokes expansion in exact rational arithmetic ----------------------------------


def _cos_mul(a: dict, b: dict) -> dict:
    out: dict = {}
    for m, x in a.items():
        for n, y in b.items():
            for p in (abs(m - n), m + n):
                out[p] = out.get(p, 0) + x * y / 2
    return out


def _cos_k(a: dict) -> dict:
    return {n: n * x for n, x in a.items() if n}


def _cos_add(*terms) -> dict:
    out: dict = {}
    for scale, a in terms:
        for n, x in a.items():
            out[n] = out.get(n, 0) + scale * x
    return out


def stokes_series(order: int, g: int = 1):
    """Series of the Stokes wave in the first-harmonic amplitude ``eps``.

    Solves ``c^2 k y - g (y + y k y + k(y^2)/2) = 0`` with
    ``y = eps cos u + sum_j eps^j Y_j`` (no ``cos u`` beyond first order) and
    ``c^2 = g + sum_j eps^j C_j`` order by order in exact fractions.

    Returns ``(Y, C)``: ``Y[j]`` maps mode ``n`` to the coefficient of
    ``cos(n u)``, ``C[j]`` the ``eps^j`` coefficient of ``c^2``.
    """
    from fractions import Fraction

    Y = {1: {1: Fraction(1)}}
    C = {0: Fraction(g)}
    for j in range(2, order + 1):
        # everything at eps^j except the unknown (g k - g) Y_j and C_{j-1} k Y_1
        rhs: dict = {}
        for i in range(1, j - 1):
            if i in C:
                rhs = _cos_add((1, rhs), (C[i], _cos_k(Y[j - i])))
        for p in range(1, j):
            q = j - p
            rhs = _cos_add((1, rhs), (-g, _cos_mul(Y[p], _cos_k(Y[q]))),
                           (-Fraction(g, 2), _cos_k(_cos_mul(Y[p], Y[q]))))
        # mode 1 fixes the speed correction: C_{j-1} + rhs_1 = 0
        C[j - 1] = -rhs.get(1, Fraction(0))
        Yj = {}
        for n, x in rhs.items():
            if n == 1 or x == 0:
                continue
            # g (n - 1) Y_n + rhs_n = 0
            Yj[n] = -x / (g * (n - 1))
        Y[j] = Yj
    return Y, C


def stokes_series_wave(eps: float, order: int, u: np.ndarray):
    """Samples of the truncated series and the truncated ``c^2``."""
    Y, C = stokes_series(order)
    y = np.zeros_like(u)
    for j, modes in Y.items():
        for n, x in modes.items():
            y += float(x) * eps ** j * np.cos(n * u)
    c2 = sum(float(x) * eps ** j for j, x in C.items())
    return y, c2
