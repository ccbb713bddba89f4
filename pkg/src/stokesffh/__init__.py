"""Matrix-free pseudospectral tools for Stokes waves.

Submodules
----------
spectral
    Grids, Fourier multipliers, quasiperiodic fields and the auxiliary map.
krylov
    MINRES, conjugate residuals and restarted Arnoldi.
stokes
    Babenko equation: residual, Jacobian, Newton solver and continuation.
babenko_spectrum
    Eigenvalues of the linearised Babenko operator and branch points.
stability
    Floquet stability eigenvalues of Stokes waves.
"""
from .spectral import Grid, QuasiField, build_grid, build_aux_map
from .krylov import KrylovConvergenceError, minres, conjugate_residual, arnoldi_eigs
from .stokes import (S_LIMIT, BranchState, ContinuationPolicy, StokesWave, continue_branch,
                     flat_wave, read_wave, solve_newton, write_wave)
from .babenko_spectrum import EigenPair, BranchPoint, eig_nearest, find_branch_point
from .stability import FloquetSweep, StabilityEigenPair, floquet_sweep, qep_eigs_near

__version__ = "0.1.0"
