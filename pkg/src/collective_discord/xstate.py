"""Pairwise correlation measures for two-qubit X states.

The X state is stored through its five independent entries.  In the basis
ordered as (|up,up>, |up,down>, |down,up>, |down,down>) the density matrix is

    [[v+, 0,  0,  u*],
     [0,  w,  y,  0 ],
     [0,  y,  w,  0 ],
     [u,  0,  0,  v-]]

so ``v_plus`` is the all-up population and ``u = <down,down|rho|up,up>``.
All entropies are in nats.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .exceptions import NumericalError, ValidationError

DEFAULT_TOL = 1e-12
HALF_PI = 0.5 * math.pi

# coarse scan resolution and refinement tolerances of the discord minimizer
GRID_POINTS = 64
REFINE_XATOL = 1e-9
MAX_SWEEPS = 20
GRID_REFINE_MISMATCH = 1e-8


def xlogx(p):
    """``p ln p`` with ``0 ln 0 = 0``; works on scalars and arrays.

    Inputs are clipped to [0, 1] first, which absorbs the tiny negative
    eigenvalues produced by round-off.
    """
    p = np.clip(np.asarray(p, dtype=float), 0.0, 1.0)
    safe = np.where(p > 0.0, p, 1.0)
    out = p * np.log(safe)
    return out if out.ndim else float(out)


def _xlogx(p: float) -> float:
    # scalar fast path used inside the refinement loop
    if p <= 0.0:
        return 0.0
    if p > 1.0:
        p = 1.0
    return p * math.log(p)


@dataclass(frozen=True)
class XState:
    v_plus: float
    v_minus: float
    w: float
    y: float
    u: complex = 0.0
    tol: float = field(default=DEFAULT_TOL, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "u", complex(self.u))
        for name in ("v_plus", "v_minus", "w", "y"):
            object.__setattr__(self, name, float(getattr(self, name)))
        self.validate(self.tol)

    def validate(self, tol: float = DEFAULT_TOL) -> "XState":
        vals = (self.v_plus, self.v_minus, self.w, self.y, self.u.real, self.u.imag)
        if not all(math.isfinite(v) for v in vals):
            raise ValidationError(f"non-finite X-state entry in {self!r}")
        trace = self.v_plus + self.v_minus + 2.0 * self.w
        if abs(trace - 1.0) > tol:
            raise ValidationError(f"trace is {trace!r}, expected 1")
        for name in ("v_plus", "v_minus", "w"):
            v = getattr(self, name)
            if v < -tol or v > 1.0 + tol:
                raise ValidationError(f"{name}={v!r} outside [0, 1]")
        if self.w + tol < abs(self.y):
            raise ValidationError(f"positivity: w={self.w!r} < |y|={abs(self.y)!r}")
        if self.v_plus * self.v_minus + tol < abs(self.u) ** 2:
            raise ValidationError("positivity: v+ v- < |u|^2")
        return self

    def matrix(self) -> np.ndarray:
        """Dense 4x4 density matrix in the (uu, ud, du, dd) basis."""
        r = np.zeros((4, 4), dtype=complex)
        r[0, 0], r[3, 3] = self.v_plus, self.v_minus
        r[1, 1] = r[2, 2] = self.w
        r[1, 2] = r[2, 1] = self.y
        r[3, 0] = self.u
        r[0, 3] = self.u.conjugate()
        return r

    def conjugated(self) -> "XState":
        """State with ``u`` replaced by its conjugate (the <J-^2> convention)."""
        return XState(self.v_plus, self.v_minus, self.w, self.y, self.u.conjugate(), tol=self.tol)


@dataclass(frozen=True)
class MeasurementAngles:
    theta: float
    phi: float

    def __post_init__(self):
        for name in ("theta", "phi"):
            v = getattr(self, name)
            if not (0.0 <= v <= HALF_PI):
                raise ValidationError(f"{name}={v!r} outside [0, pi/2]")


@dataclass(frozen=True)
class CorrelationResult:
    discord: float
    classical: float
    mutual_info: float
    optimal_angles: MeasurementAngles
    concurrence: float


def entropy_subsystem(rho: XState) -> float:
    """Von Neumann entropy of one qubit (both marginals coincide)."""
    return -(_xlogx(rho.v_plus + rho.w) + _xlogx(rho.v_minus + rho.w))


def joint_eigenvalues(rho: XState) -> np.ndarray:
    s = rho.v_plus + rho.v_minus
    r = math.sqrt((rho.v_plus - rho.v_minus) ** 2 + 4.0 * abs(rho.u) ** 2)
    ev = np.array([rho.w + rho.y, rho.w - rho.y, 0.5 * (s + r), 0.5 * (s - r)])
    return np.clip(ev, 0.0, 1.0)


def entropy_joint(rho: XState) -> float:
    return -float(np.sum(xlogx(joint_eigenvalues(rho))))


def mutual_information(rho: XState) -> float:
    return 2.0 * entropy_subsystem(rho) - entropy_joint(rho)


def _conditional_entropy_arrays(vp, vm, w, y, uc, theta, phi):
    """Vectorized conditional entropy over angle arrays; ``uc`` is conj(u)."""
    c2 = np.cos(theta) ** 2
    s2 = np.sin(theta) ** 2
    sc = np.sin(theta) * np.cos(theta)
    coh = np.abs(np.exp(1j * phi) * uc + np.exp(-1j * phi) * y)
    total = 0.0
    for a, b in ((c2, s2), (s2, c2)):
        xp = vp * a + w * b
        xm = w * a + vm * b
        ysq = (sc * coh) ** 2
        p = xp + xm
        root = np.sqrt((xp - xm) ** 2 + 4.0 * ysq)
        # p*lambda_pm are the unnormalized branch eigenvalues
        total = total + xlogx(p) - xlogx(0.5 * (p + root)) - xlogx(0.5 * (p - root))
    return total


def _conditional_entropy_scalar(vp, vm, w, y, uc, theta, phi):
    c, s = math.cos(theta), math.sin(theta)
    c2, s2, sc = c * c, s * s, s * c
    coh = abs(cmath.exp(1j * phi) * uc + cmath.exp(-1j * phi) * y)
    ysq4 = 4.0 * (sc * coh) ** 2
    total = 0.0
    for a, b in ((c2, s2), (s2, c2)):
        xp = vp * a + w * b
        xm = w * a + vm * b
        p = xp + xm
        root = math.sqrt((xp - xm) ** 2 + ysq4)
        total += _xlogx(p) - _xlogx(0.5 * (p + root)) - _xlogx(0.5 * (p - root))
    return total


def conditional_entropy(rho: XState, angles: MeasurementAngles) -> float:
    """Entropy of qubit A after the projective measurement on B set by ``angles``.

    Branches with vanishing probability contribute nothing.
    """
    return _conditional_entropy_scalar(
        rho.v_plus, rho.v_minus, rho.w, rho.y, rho.u.conjugate(), angles.theta, angles.phi
    )


def _refine(f, theta, phi, h):
    """Coordinate-wise bounded Brent descent inside the box of half-width h."""
    lo_t, hi_t = max(0.0, theta - h), min(HALF_PI, theta + h)
    lo_p, hi_p = max(0.0, phi - h), min(HALF_PI, phi + h)
    best = f(theta, phi)
    for _ in range(MAX_SWEEPS):
        prev = best
        r = minimize_scalar(lambda t: f(t, phi), bounds=(lo_t, hi_t), method="bounded",
                            options={"xatol": REFINE_XATOL})
        if r.fun < best:
            theta, best = float(r.x), float(r.fun)
        r = minimize_scalar(lambda q: f(theta, q), bounds=(lo_p, hi_p), method="bounded",
                            options={"xatol": REFINE_XATOL})
        if r.fun < best:
            phi, best = float(r.x), float(r.fun)
        # endpoints are not sampled by the bounded method
        for t in (lo_t, hi_t):
            v = f(t, phi)
            if v < best:
                theta, best = t, v
        for q in (lo_p, hi_p):
            v = f(theta, q)
            if v < best:
                phi, best = q, v
        if prev - best < 1e-14:
            break
    return best, theta, phi


def minimize_conditional_entropy(rho: XState, grid: int = GRID_POINTS, n_starts: int = 3):
    """Minimum of the conditional entropy over measurement angles.

    A uniform ``grid x grid`` scan over [0, pi/2]^2 picks the start points,
    then a local coordinate-wise refinement polishes the best few.
    The phase of ``u`` is first removed by a local z rotation, which leaves
    every entropy unchanged and makes phi in [0, pi/2] sufficient.

    Returns ``(value, MeasurementAngles)``.
    """
    uc = complex(abs(rho.u))
    args = (rho.v_plus, rho.v_minus, rho.w, rho.y, uc)
    g = np.linspace(0.0, HALF_PI, grid)
    tt, pp = np.meshgrid(g, g, indexing="ij")
    vals = _conditional_entropy_arrays(rho.v_plus, rho.v_minus, rho.w, rho.y, uc, tt, pp)
    grid_min = float(vals.min())
    order = np.argsort(vals, axis=None, kind="stable")[:n_starts]
    h = g[1] - g[0]

    def f(t, q):
        return _conditional_entropy_scalar(*args, t, q)

    best = (math.inf, 0.0, 0.0)
    for idx in order:
        i, j = np.unravel_index(idx, vals.shape)
        cand = _refine(f, float(g[i]), float(g[j]), h)
        if cand[0] < best[0]:
            best = cand
    value, theta, phi = best
    if value > grid_min + GRID_REFINE_MISMATCH:
        raise NumericalError(
            "refinement ended above the grid minimum",
            {"grid_min": grid_min, "refined": value, "theta": theta, "phi": phi},
        )
    return value, MeasurementAngles(min(max(theta, 0.0), HALF_PI), min(max(phi, 0.0), HALF_PI))


def quantum_discord(rho: XState, grid: int = GRID_POINTS) -> CorrelationResult:
    h_a = entropy_subsystem(rho)
    mutual = 2.0 * h_a - entropy_joint(rho)
    cond, angles = minimize_conditional_entropy(rho, grid=grid)
    classical = h_a - cond
    discord = mutual - classical
    return CorrelationResult(
        discord=discord,
        classical=classical,
        mutual_info=mutual,
        optimal_angles=angles,
        concurrence=concurrence_wootters(rho),
    )


def concurrence_wootters(rho: XState) -> float:
    return 2.0 * max(0.0, abs(rho.u) - rho.w, abs(rho.y) - math.sqrt(max(rho.v_plus * rho.v_minus, 0.0)))
