"""Finite-N Dicke model ground state in the extended coherent-state basis.

The Hamiltonian ``w a^dag a + D Jz + (2 lam / sqrt(N)) (a^dag + a) Jx`` is
assembled after relabeling the spin axes (x -> z, z -> x, y -> -y), so that
the boson couples to the diagonal spin operator.  Each pseudospin sector n
then carries an exactly displaced oscillator with shift
``g_n = 2 lam n / (w sqrt(N))`` and the Fock basis of ``A_n = a + g_n``
converges after a few tens of quanta.  Neighbouring sectors are coupled by
``D/2 * sqrt(j(j+1) - n(n+1))`` times the overlap matrix of Fock states
displaced relative to each other by ``2 lam / (w sqrt(N))``.

Basis index ``i * (n_tr + 1) + k`` stands for sector ``n = i - N/2`` and
displaced Fock level ``k``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace

import numpy as np
import scipy.sparse as sp
from scipy.linalg import eigh
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from .exceptions import NumericalError, ValidationError
from .reduction import CollectiveExpectations, reduce_pairwise
from .xstate import quantum_discord

log = logging.getLogger(__name__)

DENSE_LIMIT = 2000
LANCZOS_TOL = 1e-14
PARITY_TOL = 1e-8
RESIDUAL_TOL = 1e-8
N_TR_START = 12
N_TR_STEP = 4
N_TR_CAP = 60


@dataclass(frozen=True)
class DickeParams:
    n_atoms: int
    omega: float = 1.0
    delta: float = 1.0
    lam: float = 0.0
    n_tr: int = N_TR_START

    def __post_init__(self):
        if int(self.n_atoms) != self.n_atoms or self.n_atoms < 1:
            raise ValidationError(f"n_atoms must be a positive integer, got {self.n_atoms!r}")
        if not (self.omega > 0 and self.delta > 0):
            raise ValidationError("omega and delta must be positive")
        if not self.lam >= 0:
            raise ValidationError(f"coupling must be >= 0, got {self.lam!r}")
        if int(self.n_tr) != self.n_tr or self.n_tr < 1:
            raise ValidationError(f"n_tr must be an integer >= 1, got {self.n_tr!r}")

    @property
    def lambda_c(self) -> float:
        return 0.5 * math.sqrt(self.omega * self.delta)

    @property
    def shift_step(self) -> float:
        """Relative displacement of neighbouring sectors, g_{n+1} - g_n."""
        return 2.0 * self.lam / (self.omega * math.sqrt(self.n_atoms))


@dataclass
class GroundStateSolution:
    energy: float
    coefficients: np.ndarray  # shape (N + 1, n_tr + 1); row i is sector n = i - N/2
    converged: bool
    residual: float
    parity: int
    n_tr: int


def displacement_matrix(beta: float, size: int) -> np.ndarray:
    """Matrix of <k|D(beta)|k'> for real beta and 0 <= k, k' < size.

    Built by the two-index recurrence that follows from
    ``a D(beta) = D(beta) (a + beta)``:

        sqrt(k+1) M[k+1, k'] = sqrt(k') M[k, k'-1] + beta M[k, k']

    seeded with the vacuum row ``M[0, k'] = e^{-beta^2/2} (-beta)^k' / sqrt(k'!)``.
    Every entry is a matrix element of a unitary, so no intermediate value
    exceeds one in magnitude.
    """
    m = np.zeros((size, size))
    row = np.empty(size)
    row[0] = math.exp(-0.5 * beta * beta)
    for kp in range(1, size):
        row[kp] = -beta * row[kp - 1] / math.sqrt(kp)
    m[0] = row
    sq = np.sqrt(np.arange(size))
    for k in range(size - 1):
        nxt = beta * m[k]
        nxt[1:] += sq[1:] * m[k, :-1]
        m[k + 1] = nxt / math.sqrt(k + 1)
    return m


def displaced_fock_overlap(k: int, k_prime: int, beta_shift: float) -> float:
    """<k|D(beta)|k'> for Fock states and a real displacement."""
    if k < 0 or k_prime < 0:
        raise ValidationError("Fock indices must be nonnegative")
    return float(displacement_matrix(beta_shift, max(k, k_prime) + 1)[k, k_prime])


def _ladder(n_atoms: int) -> tuple[np.ndarray, np.ndarray]:
    """Sector labels n = -j..j and <n+1|J+|n> for n = -j..j-1."""
    j = n_atoms / 2
    ns = np.arange(n_atoms + 1) - j
    up = np.sqrt(j * (j + 1) - ns[:-1] * (ns[:-1] + 1))
    return ns, up


def build_hamiltonian(p: DickeParams) -> sp.csr_matrix:
    """Sparse rotated-frame Hamiltonian on the full (sector, level) basis."""
    n_sec = p.n_atoms + 1
    nk = p.n_tr + 1
    ns, up = _ladder(p.n_atoms)
    g = 2.0 * p.lam * ns / (p.omega * math.sqrt(p.n_atoms))
    levels = np.arange(nk)
    diag = (p.omega * (levels[None, :] - g[:, None] ** 2)).ravel()
    overlap = sp.csr_matrix(displacement_matrix(p.shift_step, nk))
    # block (n+1, n) holds <k|_{n+1} |k'>_n = <k|D(g_{n+1} - g_n)|k'>
    lower = sp.kron(sp.diags(0.5 * p.delta * up, -1, shape=(n_sec, n_sec)), overlap)
    h = sp.diags(diag) + lower + lower.T
    return sp.csr_matrix(h)


def parity_isometry(n_atoms: int, n_tr: int, sigma: int) -> sp.csr_matrix:
    """Columns spanning the sector with eigenvalue ``sigma`` of the parity map
    ``c[n, k] -> (-1)^k c[-n, k]``.

    Columns are ordered by |n| then k, which keeps the projected Hamiltonian
    banded.
    """
    nk = n_tr + 1
    n_sec = n_atoms + 1
    rows, cols, vals = [], [], []
    col = 0
    inv_sqrt2 = 1.0 / math.sqrt(2.0)
    for i in range(n_sec // 2, n_sec):
        mirror = n_sec - 1 - i
        for k in range(nk):
            sign = sigma * (-1) ** k
            if mirror == i:
                if sign != 1:
                    continue
                rows.append(i * nk + k)
                cols.append(col)
                vals.append(1.0)
            else:
                rows += [i * nk + k, mirror * nk + k]
                cols += [col, col]
                vals += [inv_sqrt2, sign * inv_sqrt2]
            col += 1
    return sp.csr_matrix((vals, (rows, cols)), shape=(n_sec * nk, col))


def _lowest_eigenpair(h: sp.spmatrix) -> tuple[float, np.ndarray]:
    dim = h.shape[0]
    if dim <= DENSE_LIMIT:
        e, v = eigh(h.toarray(), subset_by_index=[0, 0])
        return float(e[0]), v[:, 0]
    try:
        # fixed start vector keeps repeated runs bit-identical
        e, v = eigsh(h, k=1, which="SA", tol=LANCZOS_TOL, v0=np.ones(dim), maxiter=50 * dim)
    except ArpackNoConvergence as err:
        raise NumericalError("Lanczos iteration stagnated", {"dim": dim}) from err
    return float(e[0]), v[:, 0]


def solve_ground_state(p: DickeParams) -> GroundStateSolution:
    """Lowest eigenpair, solved separately in both parity sectors."""
    h = build_hamiltonian(p)
    best = None
    for sigma in (1, -1):
        v = parity_isometry(p.n_atoms, p.n_tr, sigma)
        if v.shape[1] == 0:
            continue
        e, c = _lowest_eigenpair(sp.csr_matrix(v.T @ h @ v))
        if best is None or e < best[0] - 1e-12 * max(1.0, abs(e)):
            best = (e, v @ c, sigma)
    energy, psi, sigma = best
    psi = psi / np.linalg.norm(psi)
    # deterministic overall sign
    lead = np.flatnonzero(np.abs(psi) > 1e-8 * np.abs(psi).max())[0]
    if psi[lead] < 0:
        psi = -psi
    residual = float(np.linalg.norm(h @ psi - energy * psi))
    converged = residual <= RESIDUAL_TOL * max(1.0, abs(energy))
    coeffs = psi.reshape(p.n_atoms + 1, p.n_tr + 1)
    return GroundStateSolution(energy, coeffs, converged, residual, sigma, p.n_tr)


def spin_density_bands(sol: GroundStateSolution, p: DickeParams, max_offset: int = 2) -> list[np.ndarray]:
    """Diagonals of the rotated-frame spin density matrix, boson traced out.

    ``bands[d][i] = rho[i, i + d]`` with
    ``rho[n, n'] = c_{n'}^T D((n' - n) * step) c_n`` (real symmetric).
    """
    c = sol.coefficients
    size = c.shape[1]
    bands = [np.sum(c * c, axis=1)]
    for d in range(1, max_offset + 1):
        m = displacement_matrix(d * p.shift_step, size)
        bands.append(np.sum((c[d:] @ m) * c[:-d], axis=1))
    return bands


def _rotated_spin_ops(n_atoms: int):
    ns, up = _ladder(n_atoms)
    jz = sp.diags(ns).tocsr()
    jp = sp.diags(up, -1, shape=(n_atoms + 1, n_atoms + 1)).tocsr()  # row n+1, column n
    jm = jp.T.tocsr()
    jx = 0.5 * (jp + jm)
    jy = -0.5j * (jp - jm)
    return jx, jy, jz


def expectations(sol: GroundStateSolution, p: DickeParams, parity_tol: float = PARITY_TOL) -> CollectiveExpectations:
    """Collective moments of the atoms in the original (unrotated) frame."""
    if p.n_atoms < 2:
        raise ValidationError("pairwise quantities need at least two atoms")
    bands = spin_density_bands(sol, p)
    n = p.n_atoms + 1
    rho = sp.diags([bands[2], bands[1], bands[0], bands[1], bands[2]], [-2, -1, 0, 1, 2], shape=(n, n)).tocsr()
    jx, jy, jz = _rotated_spin_ops(p.n_atoms)

    def ev(op):
        return complex(rho.multiply(op.T).sum())

    # original frame: Jz -> Jx', Jx -> Jz', Jy -> -Jy'
    orig_z = jx
    orig_p = jz - 1j * jy
    jp_val = ev(orig_p)
    if abs(jp_val) > parity_tol:
        raise NumericalError("ground state breaks parity", {"<J+>": jp_val, "lam": p.lam})
    return CollectiveExpectations.from_moments(
        p.n_atoms,
        jz=ev(orig_z).real,
        jz2=ev(orig_z @ orig_z).real,
        jp2=ev(orig_p @ orig_p),
        jp=jp_val,
        anticomm=ev(orig_p @ orig_z + orig_z @ orig_p),
    )


@dataclass
class ConvergedResult:
    solution: GroundStateSolution
    expectations: CollectiveExpectations
    discord: float
    n_tr: int
    converged: bool


def solve_converged(p: DickeParams, tol: float = 1e-8, step: int = N_TR_STEP, cap: int = N_TR_CAP) -> ConvergedResult:
    """Grow the truncation until energy and discord both settle within ``tol``.

    Energy changes are measured relative to ``max(1, |E|)``.  Hitting ``cap``
    logs a warning and flags the result as not converged.
    """
    prev = None
    q = p
    while True:
        sol = solve_ground_state(q)
        exp = expectations(sol, q)
        disc = quantum_discord(reduce_pairwise(exp).state).discord
        if prev is not None:
            de = abs(sol.energy - prev[0]) / max(1.0, abs(sol.energy))
            if de < tol and abs(disc - prev[1]) < tol:
                return ConvergedResult(sol, exp, disc, q.n_tr, sol.converged)
        if q.n_tr + step > cap:
            log.warning("n_tr cap %d reached for N=%d lam=%g", cap, p.n_atoms, p.lam)
            return ConvergedResult(sol, exp, disc, q.n_tr, False)
        prev = (sol.energy, disc)
        q = replace(q, n_tr=q.n_tr + step)
