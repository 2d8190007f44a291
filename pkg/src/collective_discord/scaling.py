"""Derivatives, extremum search and finite-size fits for correlation curves."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .exceptions import NumericalError, ValidationError

EXTREMUM_XTOL = 1e-5


@dataclass(frozen=True)
class CorrelationCurve:
    model: str
    n_atoms: int | None
    lambda_grid: np.ndarray
    discord: np.ndarray
    classical: np.ndarray
    concurrence_scaled: np.ndarray | None = None

    def __post_init__(self):
        grid = np.asarray(self.lambda_grid, dtype=float)
        object.__setattr__(self, "lambda_grid", grid)
        if grid.ndim != 1 or grid.size < 2:
            raise ValidationError("a curve needs at least two grid points")
        if np.any(np.diff(grid) <= 0):
            raise ValidationError("lambda grid must be strictly increasing")
        for name in ("discord", "classical", "concurrence_scaled"):
            val = getattr(self, name)
            if val is None:
                continue
            arr = np.asarray(val, dtype=float)
            if arr.shape != grid.shape:
                raise ValidationError(f"{name} has shape {arr.shape}, grid has {grid.shape}")
            if not np.all(np.isfinite(arr)):
                raise ValidationError(f"{name} contains non-finite values")
            object.__setattr__(self, name, arr)


@dataclass(frozen=True)
class ScalingFit:
    kind: str  # "power_law" or "log2_linear"
    coefficient: float
    exponent_or_slope: float
    intercept: float
    r_squared: float
    n_values: np.ndarray

    @property
    def mu(self) -> float:
        """Decay exponent of a power-law fit, value ~ N^-mu."""
        if self.kind != "power_law":
            raise ValidationError("mu is defined for power-law fits only")
        return -self.exponent_or_slope

    def as_dict(self) -> dict:
        return {
            "kind": self.kind,
            "coefficient": self.coefficient,
            "exponent_or_slope": self.exponent_or_slope,
            "intercept": self.intercept,
            "r_squared": self.r_squared,
            "n_values": [int(n) for n in self.n_values],
        }


def derivative(curve, values=None, tol: float | None = None) -> np.ndarray:
    """First derivative on a (possibly non-uniform) grid.

    Accepts a CorrelationCurve, whose discord is differentiated, or a grid
    plus ``values``.  Interior points use second-order central differences,
    the two ends one-sided differences.  With ``tol`` set, a warning is
    issued when the estimated truncation error h^2 |f'''| / 6 exceeds it.
    """
    if isinstance(curve, CorrelationCurve):
        x, y = curve.lambda_grid, curve.discord
    else:
        x = np.asarray(curve, dtype=float)
        y = np.asarray(values, dtype=float)
    if x.shape != y.shape or x.size < 2:
        raise ValidationError("grid and values must have equal length >= 2")
    d = np.gradient(y, x)
    if tol is not None and x.size >= 4:
        h = np.diff(x)
        third = np.gradient(np.gradient(d, x), x)
        err = float(np.max(h.max() ** 2 * np.abs(third) / 6))
        if err > tol:
            warnings.warn(f"grid too coarse: estimated derivative error {err:.2e} > {tol:.2e}", stacklevel=2)
    return d


def _parabola_vertex(x, y):
    (x0, x1, x2), (y0, y1, y2) = x, y
    den = (x0 - x1) * (x0 - x2) * (x1 - x2)
    a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / den
    b = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / den
    c = (x1 * x2 * (x1 - x2) * y0 + x2 * x0 * (x2 - x0) * y1 + x0 * x1 * (x0 - x1) * y2) / den
    xv = -b / (2 * a)
    return xv, a * xv * xv + b * xv + c


def locate_extremum(target, side: str = "max", bracket=None, values=None,
                    n_scan: int = 25, xtol: float = EXTREMUM_XTOL):
    """Position and value of a maximum or minimum.

    ``target`` is either a callable, scanned on ``n_scan`` points of
    ``bracket`` and then refined by bounded Brent search around the best
    scan point, or a sampled grid (with ``values``), in which case the
    parabola through the best sample and its two neighbours gives the vertex.
    Raises NumericalError when the extremum sits on the edge of the search
    range, since then it is not bracketed.
    """
    if side not in ("max", "min"):
        raise ValidationError(f"side must be 'max' or 'min', got {side!r}")
    sign = -1.0 if side == "max" else 1.0

    if not callable(target):
        x = np.asarray(target, dtype=float)
        y = np.asarray(values, dtype=float)
        i = int(np.argmin(sign * y))
        if i == 0 or i == x.size - 1:
            raise NumericalError("extremum not bracketed by the grid", {"index": i})
        return tuple(float(v) for v in _parabola_vertex(x[i - 1:i + 2], y[i - 1:i + 2]))

    if bracket is None:
        raise ValidationError("a bracket is required for callable targets")
    lo, hi = map(float, bracket)
    if not hi > lo or n_scan < 3:
        raise ValidationError("need hi > lo and at least three scan points")
    xs = np.linspace(lo, hi, n_scan)
    ys = np.array([sign * target(x) for x in xs])
    i = int(np.argmin(ys))
    if i == 0 or i == n_scan - 1:
        raise NumericalError("extremum not bracketed", {"bracket": (lo, hi), "at": float(xs[i])})
    res = minimize_scalar(lambda x: sign * target(x), bounds=(xs[i - 1], xs[i + 1]),
                          method="bounded", options={"xatol": xtol})
    if res.fun > ys[i]:
        return float(xs[i]), float(sign * ys[i])
    return float(res.x), float(sign * res.fun)


def _select(n_values, values, min_n):
    n = np.asarray(n_values, dtype=float)
    v = np.asarray(values, dtype=float)
    if n.shape != v.shape:
        raise ValidationError("sizes and values differ in length")
    if min_n is not None:
        keep = n >= min_n
        n, v = n[keep], v[keep]
    if n.size < 3:
        raise ValidationError(f"at least three points are needed, got {n.size}")
    if np.any(n <= 0) or not np.all(np.isfinite(v)):
        raise ValidationError("sizes must be positive and values finite")
    return n, v


def _linear_fit(x, y):
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else max(0.0, 1.0 - float(np.sum(resid**2)) / ss_tot)
    return float(slope), float(intercept), min(r2, 1.0)


def fit_power_law(n_values, values, min_n: int | None = None) -> ScalingFit:
    """Least squares of ln(value) against ln(N); value = coefficient * N^slope."""
    n, v = _select(n_values, values, min_n)
    if np.any(v <= 0):
        raise ValidationError("power-law fit needs strictly positive values")
    slope, intercept, r2 = _linear_fit(np.log(n), np.log(v))
    return ScalingFit("power_law", math.exp(intercept), slope, intercept, r2, n.astype(int))


def fit_log2_linear(n_values, values, min_n: int | None = None) -> ScalingFit:
    """Least squares of value against log2(N); value = slope log2 N + intercept."""
    n, v = _select(n_values, values, min_n)
    slope, intercept, r2 = _linear_fit(np.log2(n), v)
    return ScalingFit("log2_linear", slope, slope, intercept, r2, n.astype(int))
