"""Exact ground state of the finite-N LMG model in the collective Jz basis.

    H = -lam Jz - (1/N) [Jx^2 + gamma Jy^2 - N (1 + gamma) / 4]

Only Jz and squares of Jx, Jy appear, so H connects m to m and m +- 2 and
splits into two spin-flip parity blocks, each a symmetric tridiagonal matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.linalg import eigh_tridiagonal

from .exceptions import NumericalError, ValidationError
from .reduction import CollectiveExpectations

PARITY_TOL = 1e-8
RESIDUAL_TOL = 1e-8


@dataclass(frozen=True)
class LmgParams:
    n_atoms: int
    lam: float = 0.0
    gamma: float = 0.0

    def __post_init__(self):
        if int(self.n_atoms) != self.n_atoms or self.n_atoms < 2:
            raise ValidationError(f"n_atoms must be an integer >= 2, got {self.n_atoms!r}")
        if not self.lam >= 0:
            raise ValidationError(f"field must be >= 0, got {self.lam!r}")
        if not (0 <= self.gamma < 1):
            raise ValidationError(f"gamma must lie in [0, 1), got {self.gamma!r}")

    lambda_c = 1.0


@dataclass
class LmgSolution:
    energy: float
    coefficients: np.ndarray  # amplitudes on m = -j..j
    converged: bool
    residual: float
    parity: int  # 0: j - m even, 1: j - m odd


def _m_values(n_atoms):
    j = n_atoms / 2
    return j, np.arange(n_atoms + 1) - j


def _raise2(j, m):
    """<m+2|J+^2|m>."""
    return np.sqrt(np.clip(j * (j + 1) - m * (m + 1), 0, None)) * np.sqrt(
        np.clip(j * (j + 1) - (m + 1) * (m + 2), 0, None))


def hamiltonian_parts(p: LmgParams):
    """Diagonal over m = -j..j and the m -> m+2 couplings."""
    n = p.n_atoms
    j, m = _m_values(n)
    g = p.gamma
    diag = -p.lam * m - ((1 + g) / 2 * (j * (j + 1) - m * m) - n * (1 + g) / 4) / n
    off2 = -(1 - g) / (4 * n) * _raise2(j, m[:-2])
    return diag, off2


def build_hamiltonian(p: LmgParams) -> sp.csr_matrix:
    diag, off2 = hamiltonian_parts(p)
    return sp.diags([off2, diag, off2], [-2, 0, 2]).tocsr()


def solve_ground_state(p: LmgParams) -> LmgSolution:
    """Lowest eigenpair, taken as the lower of the two parity-block minima."""
    diag, off2 = hamiltonian_parts(p)
    dim = p.n_atoms + 1
    best = None
    for parity in (0, 1):
        idx = np.arange(parity, dim, 2)
        if idx.size == 0:
            continue
        d = diag[idx]
        e = off2[idx[:-1]]
        if idx.size == 1:
            w, v = d.copy(), np.ones((1, 1))
        else:
            w, v = eigh_tridiagonal(d, e, select="i", select_range=(0, 0))
        if best is None or w[0] < best[0] - 1e-14 * max(1.0, abs(w[0])):
            vec = np.zeros(dim)
            vec[idx] = v[:, 0]
            best = (float(w[0]), vec, parity)
    energy, vec, parity = best
    vec /= np.linalg.norm(vec)
    if vec[np.argmax(np.abs(vec))] < 0:
        vec = -vec
    h = build_hamiltonian(p)
    residual = float(np.linalg.norm(h @ vec - energy * vec))
    return LmgSolution(energy, vec, residual <= RESIDUAL_TOL * max(1.0, abs(energy)), residual, parity)


def expectations(sol: LmgSolution, p: LmgParams, parity_tol: float = PARITY_TOL) -> CollectiveExpectations:
    n = p.n_atoms
    j, m = _m_values(n)
    c = sol.coefficients
    raise1 = np.sqrt(j * (j + 1) - m[:-1] * (m[:-1] + 1))
    jp = float(np.sum(c[1:] * raise1 * c[:-1]))
    anticomm = float(np.sum(c[1:] * raise1 * (2 * m[:-1] + 1) * c[:-1]))
    if abs(jp) > parity_tol or abs(anticomm) > parity_tol * n:
        raise NumericalError("ground state breaks spin-flip parity", {"<J+>": jp, "lam": p.lam})
    prob = c * c
    return CollectiveExpectations.from_moments(
        n,
        jz=float(prob @ m),
        jz2=float(prob @ (m * m)),
        jp2=float(np.sum(c[2:] * _raise2(j, m[:-2]) * c[:-2])),
        jp=jp,
        anticomm=anticomm,
    )


def energy_per_spin(p: LmgParams) -> float:
    return solve_ground_state(p).energy / p.n_atoms


def _check_residual(sol: LmgSolution):
    if not sol.converged:
        raise NumericalError("tridiagonal eigensolver residual too large", {"residual": sol.residual})


def solve(p: LmgParams):
    """Ground state and its collective expectations in one call."""
    sol = solve_ground_state(p)
    _check_residual(sol)
    return sol, expectations(sol, p)
