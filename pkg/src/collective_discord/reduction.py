"""Two-spin reduced density matrix of a permutation-symmetric N-spin state.

For a state in the j = N/2 sector every pair of spins sees the same reduced
state, fully determined by a handful of collective expectation values.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import NonXFormError, NumericalError, ValidationError
from .xstate import DEFAULT_TOL, XState, concurrence_wootters

X_FORM_TOL = 1e-8
SECTOR_TOL = 1e-10


@dataclass(frozen=True)
class CollectiveExpectations:
    """Expectation values of collective spin operators.

    ``jp`` and ``jp2`` are <J+> and <J+^2>; ``jxy2`` is <Jx^2 + Jy^2>;
    ``anticomm`` is <J+ Jz + Jz J+>.
    """

    n_atoms: int
    jz: float
    jz2: float
    jp: complex
    jp2: complex
    jxy2: float
    jy2: float
    anticomm: complex

    def __post_init__(self):
        self.validate()

    def validate(self, tol: float = SECTOR_TOL):
        n = self.n_atoms
        if int(n) != n or n < 2:
            raise ValidationError(f"n_atoms must be an integer >= 2, got {n!r}")
        half = n / 2
        scale = max(1.0, half * half)
        if abs(self.jz) > half * (1 + tol):
            raise ValidationError(f"|<Jz>|={abs(self.jz)!r} exceeds N/2")
        if self.jz2 < -tol * scale or self.jz2 > half * half + tol * scale:
            raise ValidationError(f"<Jz^2>={self.jz2!r} outside [0, N^2/4]")
        if self.jy2 < -tol * scale:
            raise ValidationError(f"<Jy^2>={self.jy2!r} is negative")
        casimir = half * (half + 1)
        if abs(self.jxy2 + self.jz2 - casimir) > tol * scale:
            raise ValidationError(
                f"<Jx^2+Jy^2> + <Jz^2> = {self.jxy2 + self.jz2!r}, expected j(j+1) = {casimir!r}"
            )
        return self

    @classmethod
    def from_moments(cls, n_atoms, jz, jz2, jp2, jp=0.0, anticomm=0.0):
        """Build the record for a j = N/2 state, deriving <Jx^2+Jy^2> and <Jy^2>."""
        half = n_atoms / 2
        jxy2 = half * (half + 1) - jz2
        jy2 = 0.5 * (jxy2 - complex(jp2).real)
        return cls(int(n_atoms), float(jz), float(jz2), complex(jp), complex(jp2), float(jxy2),
                   float(jy2), complex(anticomm))


@dataclass(frozen=True)
class PairwiseReduction:
    state: XState
    x_plus: complex
    x_minus: complex


def pairwise_elements(exp: CollectiveExpectations) -> dict:
    """All independent two-spin matrix elements, including the x+/x- coherences."""
    n = exp.n_atoms
    nn = n * (n - 1)
    return {
        "v_plus": (n * n - 2 * n + 4 * exp.jz2 + 4 * (n - 1) * exp.jz) / (4 * nn),
        "v_minus": (n * n - 2 * n + 4 * exp.jz2 - 4 * (n - 1) * exp.jz) / (4 * nn),
        "w": (n * n - 4 * exp.jz2) / (4 * nn),
        "y": (exp.jxy2 - n / 2) / nn,
        "u": exp.jp2 / nn,
        # x+ = <du|rho|uu>, x- = <dd|rho|ud>
        "x_plus": ((n - 1) * exp.jp + exp.anticomm) / (2 * nn),
        "x_minus": ((n - 1) * exp.jp - exp.anticomm) / (2 * nn),
    }


def pairwise_matrix(exp: CollectiveExpectations) -> np.ndarray:
    """Full 4x4 two-spin density matrix in the (uu, ud, du, dd) basis."""
    e = pairwise_elements(exp)
    xp, xm = e["x_plus"], e["x_minus"]
    r = np.zeros((4, 4), dtype=complex)
    r[0, 0], r[3, 3] = e["v_plus"], e["v_minus"]
    r[1, 1] = r[2, 2] = e["w"]
    r[1, 2] = r[2, 1] = e["y"]
    r[3, 0] = e["u"]
    r[1, 0] = r[2, 0] = xp
    r[3, 1] = r[3, 2] = xm
    r = np.triu(r.conj().T, 1) + np.tril(r)
    return r


def reduce_pairwise(exp: CollectiveExpectations, x_tol: float = X_FORM_TOL,
                    tol: float = DEFAULT_TOL) -> PairwiseReduction:
    """Pairwise X state of a parity-symmetric collective state.

    Raises NonXFormError when the x+/x- coherences exceed ``x_tol``.
    """
    e = pairwise_elements(exp)
    if abs(e["x_plus"]) >= x_tol or abs(e["x_minus"]) >= x_tol:
        raise NonXFormError(
            f"state is not of X form: |x+|={abs(e['x_plus']):.3e}, |x-|={abs(e['x_minus']):.3e}"
        )
    try:
        state = XState(e["v_plus"], e["v_minus"], e["w"], e["y"], e["u"], tol=tol)
    except ValidationError as err:
        raise NumericalError(f"reduced state violates X-state invariants: {err}", e) from err
    return PairwiseReduction(state, e["x_plus"], e["x_minus"])


def scaled_concurrence(exp: CollectiveExpectations) -> float:
    """C_N = 1 - 4 <Jy^2> / N."""
    return 1.0 - 4.0 * exp.jy2 / exp.n_atoms


def scaled_concurrence_wootters(exp: CollectiveExpectations) -> float:
    """(N - 1) times the pairwise Wootters concurrence."""
    return (exp.n_atoms - 1) * concurrence_wootters(reduce_pairwise(exp).state)
