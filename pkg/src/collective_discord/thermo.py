"""Closed-form pairwise correlations in the thermodynamic limit.

Both models reduce, at leading order in 1/N, to the same one-parameter family
of X states labelled by ``beta_sq``.  For the Dicke model
``beta_sq = max(0, (1 - lam_c^2 / lam^2) / 2)``; for LMG
``beta_sq = max(0, (1 - lam) / 2)``, with the two diagonal populations
exchanged.  Population exchange is a local bit flip, so discord and
classical correlation are the same functions of ``beta_sq`` for both.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.optimize import minimize_scalar

from .exceptions import ValidationError
from .xstate import XState, xlogx

LN2 = math.log(2.0)
MODELS = ("dicke", "lmg")


@dataclass(frozen=True)
class MeanField:
    beta_sq: float
    alpha: float
    model: str
    energy_per_atom: float

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValidationError(f"unknown model {self.model!r}")
        if not (0.0 <= self.beta_sq <= 0.5):
            raise ValidationError(f"beta_sq={self.beta_sq!r} outside [0, 1/2]")


def _check_freqs(omega, delta):
    if not (omega > 0 and delta > 0):
        raise ValidationError("omega and delta must be positive")


def dicke_lambda_c(omega: float = 1.0, delta: float = 1.0) -> float:
    return 0.5 * math.sqrt(omega * delta)


def dicke_energy(alpha, beta, omega, delta, lam):
    """Mean-field energy per atom as a function of the two displacements."""
    return omega * alpha**2 - 4 * lam * alpha * beta * math.sqrt(1 - beta**2) + delta * (beta**2 - 0.5)


def dicke_stationarity(mf: MeanField, omega: float, delta: float, lam: float) -> tuple[float, float]:
    """Both partial derivatives of the energy (up to constant factors) at ``mf``."""
    a, b = mf.alpha, math.sqrt(mf.beta_sq)
    s = math.sqrt(1 - b * b)
    return (
        omega * a - 2 * lam * b * s,
        2 * a * lam * s - 2 * a * lam * b * b / s - b * delta,
    )


def mean_field_dicke(omega: float, delta: float, lam: float) -> MeanField:
    _check_freqs(omega, delta)
    if lam < 0:
        raise ValidationError("coupling must be >= 0")
    lc = dicke_lambda_c(omega, delta)
    beta_sq = 0.0 if lam <= lc else 0.5 * (1.0 - lc * lc / (lam * lam))
    b = math.sqrt(beta_sq)
    alpha = 2.0 * lam / omega * b * math.sqrt(1.0 - beta_sq)
    return MeanField(beta_sq, alpha, "dicke", dicke_energy(alpha, b, omega, delta, lam))


def lmg_energy(alpha_sq: float, lam: float) -> float:
    return -((1 - alpha_sq) * alpha_sq + lam * (alpha_sq - 0.5))


def mean_field_lmg(lam: float) -> MeanField:
    """LMG mean field at field ``lam`` (critical field 1).

    ``alpha`` is the Holstein-Primakoff displacement, alpha^2 = min(1, (1+lam)/2),
    and ``beta_sq = 1 - alpha^2``.
    """
    if lam < 0:
        raise ValidationError("field must be >= 0")
    alpha_sq = min(1.0, 0.5 * (1.0 + lam))
    return MeanField(max(0.0, 0.5 * (1.0 - lam)), math.sqrt(alpha_sq), "lmg", lmg_energy(alpha_sq, lam))


def thermo_elements(mf: MeanField) -> XState:
    b = mf.beta_sq
    big, small = (1 - b) ** 2, b * b
    off = b * (1 - b)
    if mf.model == "dicke":
        return XState(small, big, off, off, off)
    return XState(big, small, off, off, off)


def m_parameter(beta_sq: float) -> float:
    b = beta_sq
    return math.sqrt((2 * b - 1) ** 2 + 16 * b * b * (1 - b) ** 2)


def _binary_term(m: float) -> float:
    # (1+M) ln(1+M) + (1-M) ln(1-M); M <= 1 on the whole family
    return (1 + m) * math.log(1 + m) + float(xlogx(min(max(1 - m, 0.0), 1.0)))


def thermo_entropy_subsystem(beta_sq: float) -> float:
    return -float(xlogx(beta_sq) + xlogx(1 - beta_sq))


def thermo_discord(mf: MeanField) -> float:
    b = mf.beta_sq
    d = (
        thermo_entropy_subsystem(b)
        + float(xlogx(2 * b * (1 - b)))
        + float(xlogx(b * b + (1 - b) ** 2))
        + LN2
        - 0.5 * _binary_term(m_parameter(b))
    )
    return max(d, 0.0)


def thermo_classical(mf: MeanField) -> float:
    b = mf.beta_sq
    c = thermo_entropy_subsystem(b) - LN2 + 0.5 * _binary_term(m_parameter(b))
    return max(c, 0.0)


def mean_field(model: str, lam: float, omega: float = 1.0, delta: float = 1.0) -> MeanField:
    if model == "dicke":
        return mean_field_dicke(omega, delta, lam)
    if model == "lmg":
        return mean_field_lmg(lam)
    raise ValidationError(f"unknown model {model!r}")


def critical_coupling(model: str, omega: float = 1.0, delta: float = 1.0) -> float:
    return dicke_lambda_c(omega, delta) if model == "dicke" else 1.0


def discord_maximum(model: str, omega: float = 1.0, delta: float = 1.0, xtol: float = 1e-7):
    """Location and height of the thermodynamic-limit discord maximum.

    Searches the ordered phase, where the curve is unimodal: (lam_c, 10 lam_c)
    for Dicke and (0, lam_c) for LMG.  Returns ``(lam_star / lam_c, D_max)``.
    """
    lc = critical_coupling(model, omega, delta)
    lo, hi = (lc, 10 * lc) if model == "dicke" else (0.0, lc)
    res = minimize_scalar(lambda x: -thermo_discord(mean_field(model, x, omega, delta)),
                          bounds=(lo, hi), method="bounded", options={"xatol": xtol * lc})
    return float(res.x) / lc, -float(res.fun)
