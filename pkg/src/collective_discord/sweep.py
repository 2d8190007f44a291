"""Parameter sweeps and finite-size scaling runs over (N, lambda) points.

Every point is an independent task.  Tasks run in a process pool whose size
comes from the caller or from the ``COLLECTIVE_DISCORD_WORKERS`` environment
variable; results are always returned ordered by (N, lambda), so the output
does not depend on the pool size.
"""

from __future__ import annotations

import csv
import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import dicke, lmg, thermo
from .exceptions import NumericalError, ValidationError
from .reduction import reduce_pairwise, scaled_concurrence
from .scaling import ScalingFit, fit_log2_linear, fit_power_law, locate_extremum
from .xstate import XState, quantum_discord

log = logging.getLogger(__name__)

WORKERS_ENV = "COLLECTIVE_DISCORD_WORKERS"
MODELS = ("dicke", "lmg", "thermo_dicke", "thermo_lmg")
CSV_FIELDS = (
    "model", "N", "lambda", "gamma", "omega", "delta", "discord", "classical", "mutual_info",
    "concurrence_scaled", "d_discord_d_lambda", "energy", "converged", "n_tr_used",
)
DEFAULT_DERIV_STEP = 1e-3  # in units of lambda_c
SCALING_BRACKETS = {"dicke": (0.95, 1.5), "lmg": (0.6, 1.05)}
SCALING_SCAN = {"dicke": 19, "lmg": 36}


def default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise ValidationError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None
    if n < 1:
        raise ValidationError(f"{WORKERS_ENV} must be >= 1")
    return n


def parallel_map(func, items, workers: int | None = None) -> list:
    """Ordered map, in-process for one worker and over a process pool otherwise."""
    items = list(items)
    workers = default_workers() if workers is None else workers
    if workers <= 1 or len(items) <= 1:
        return [func(it) for it in items]
    with ProcessPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(func, items, chunksize=1))


def critical_coupling(model: str, omega: float = 1.0, delta: float = 1.0) -> float:
    base = model.removeprefix("thermo_")
    if base not in ("dicke", "lmg"):
        raise ValidationError(f"unknown model {model!r}")
    return thermo.critical_coupling(base, omega, delta)


@dataclass
class CorrelationPoint:
    model: str
    n_atoms: int | None
    lam: float
    gamma: float | None
    omega: float | None
    delta: float | None
    discord: float | None = None
    classical: float | None = None
    mutual_info: float | None = None
    concurrence_scaled: float | None = None
    d_discord_d_lambda: float | None = None
    energy: float | None = None
    converged: bool = False
    n_tr_used: int | None = None

    def values(self) -> list:
        return [self.model, self.n_atoms, self.lam, self.gamma, self.omega, self.delta, self.discord,
                self.classical, self.mutual_info, self.concurrence_scaled, self.d_discord_d_lambda,
                self.energy, self.converged, self.n_tr_used]

    def csv_row(self) -> list[str]:
        return [_cell(v) for v in self.values()]

    def as_dict(self) -> dict:
        return dict(zip(CSV_FIELDS, self.values()))


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


@dataclass(frozen=True)
class PointTask:
    model: str
    n_atoms: int | None
    lam: float
    omega: float = 1.0
    delta: float = 1.0
    gamma: float = 0.0
    n_tr: int | str = "auto"
    tol: float = 1e-8
    deriv_step: float | None = None  # absolute step in lambda


def _finite_state(task: PointTask, n_tr: int | None):
    """Solve one finite-N point; returns (expectations, energy, converged, n_tr_used)."""
    if task.model == "dicke":
        if n_tr is None:
            res = dicke.solve_converged(dicke.DickeParams(task.n_atoms, task.omega, task.delta, task.lam), tol=task.tol)
            return res.expectations, res.solution.energy, res.converged, res.n_tr
        p = dicke.DickeParams(task.n_atoms, task.omega, task.delta, task.lam, n_tr=n_tr)
        sol = dicke.solve_ground_state(p)
        return dicke.expectations(sol, p), sol.energy, sol.converged, n_tr
    p = lmg.LmgParams(task.n_atoms, task.lam, task.gamma)
    sol = lmg.solve_ground_state(p)
    return lmg.expectations(sol, p), sol.energy, sol.converged, None


def discord_at(model: str, n_atoms, lam: float, omega=1.0, delta=1.0, gamma=0.0, n_tr=None) -> float:
    """Discord at one coupling; Dicke uses the given truncation (converged if None)."""
    if model.startswith("thermo_"):
        return thermo.thermo_discord(thermo.mean_field(model[7:], lam, omega, delta))
    task = PointTask(model, n_atoms, lam, omega, delta, gamma)
    exp = _finite_state(task, n_tr)[0]
    return quantum_discord(reduce_pairwise(exp).state).discord


def _central_difference(f, lam, h):
    if lam - h < 0:
        return (f(lam + h) - f(lam)) / h
    return (f(lam + h) - f(lam - h)) / (2 * h)


def evaluate_point(task: PointTask) -> CorrelationPoint:
    """All correlation measures at one (model, N, lambda); numerical failures
    come back as a row flagged not converged."""
    dicke_like = task.model in ("dicke", "thermo_dicke")
    pt = CorrelationPoint(
        task.model,
        None if task.model.startswith("thermo_") else task.n_atoms,
        float(task.lam),
        None if dicke_like else float(task.gamma),
        float(task.omega) if dicke_like else None,
        float(task.delta) if dicke_like else None,
    )
    try:
        if task.model.startswith("thermo_"):
            mf = thermo.mean_field(task.model[7:], task.lam, task.omega, task.delta)
            pt.discord = thermo.thermo_discord(mf)
            pt.classical = thermo.thermo_classical(mf)
            pt.mutual_info = pt.discord + pt.classical
            pt.energy = mf.energy_per_atom
            pt.converged = True
            n_tr = None
        else:
            n_tr = None if task.n_tr == "auto" else int(task.n_tr)
            exp, energy, ok, n_used = _finite_state(task, n_tr)
            res = quantum_discord(reduce_pairwise(exp).state)
            pt.discord, pt.classical, pt.mutual_info = res.discord, res.classical, res.mutual_info
            pt.concurrence_scaled = scaled_concurrence(exp)
            pt.energy, pt.converged, pt.n_tr_used = float(energy), bool(ok), n_used
            n_tr = n_used
        if task.deriv_step:
            def f(x):
                return discord_at(task.model, task.n_atoms, x, task.omega, task.delta, task.gamma, n_tr)
            pt.d_discord_d_lambda = _central_difference(f, task.lam, task.deriv_step)
    except NumericalError as err:
        log.error("numerical failure at %s N=%s lambda=%r: %s", task.model, task.n_atoms, task.lam, err)
        pt.converged = False
    return pt


@dataclass
class SweepConfig:
    model: str
    n_atoms: list[int] = field(default_factory=list)
    lambda_range: tuple[float, float, int] = (0.0, 2.0, 21)
    lambda_scaled: bool = False  # grid given in units of lambda_c
    omega: float = 1.0
    delta: float = 1.0
    gamma: float = 0.0
    n_tr: int | str = "auto"
    tolerances: dict = field(default_factory=lambda: {"convergence": 1e-8, "deriv_step": DEFAULT_DERIV_STEP})
    derivative: bool = False
    refine_levels: int = 0
    output_path: str | None = None
    format: str = "csv"
    parallelism: int | None = None

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValidationError(f"model must be one of {MODELS}, got {self.model!r}")
        if isinstance(self.n_atoms, int):
            self.n_atoms = [self.n_atoms]
        self.n_atoms = [int(n) for n in self.n_atoms]
        if not self.model.startswith("thermo_"):
            if not self.n_atoms:
                raise ValidationError("finite-N models need at least one value of N")
            if min(self.n_atoms) < 2:
                raise ValidationError("N must be >= 2")
        lo, hi, steps = self.lambda_range
        if int(steps) != steps or steps < 2:
            raise ValidationError("lambda_range needs at least 2 steps")
        if not (0 <= lo < hi):
            raise ValidationError("lambda_range must satisfy 0 <= min < max")
        self.lambda_range = (float(lo), float(hi), int(steps))
        if self.n_tr != "auto" and (int(self.n_tr) != self.n_tr or int(self.n_tr) < 1):
            raise ValidationError("n_tr must be a positive integer or 'auto'")
        if not (self.omega > 0 and self.delta > 0):
            raise ValidationError("omega and delta must be positive")
        if not 0 <= self.gamma < 1:
            raise ValidationError("gamma must lie in [0, 1)")
        if self.format not in ("csv", "json"):
            raise ValidationError("format must be csv or json")
        if self.refine_levels < 0:
            raise ValidationError("refine_levels must be >= 0")
        tol = {"convergence": 1e-8, "deriv_step": DEFAULT_DERIV_STEP}
        tol.update(self.tolerances or {})
        if not (tol["convergence"] > 0 and tol["deriv_step"] > 0):
            raise ValidationError("tolerances must be positive")
        self.tolerances = tol
        if self.parallelism is not None and self.parallelism < 1:
            raise ValidationError("parallelism must be >= 1")

    @property
    def lambda_c(self) -> float:
        return critical_coupling(self.model, self.omega, self.delta)


def lambda_grid(cfg: SweepConfig) -> np.ndarray:
    """Uniform grid, optionally densified geometrically around lambda_c.

    Level k adds lambda_c +- s / 2^k, with s the uniform spacing, so the
    spacing next to the critical point halves with every level.
    """
    lo, hi, steps = cfg.lambda_range
    scale = cfg.lambda_c if cfg.lambda_scaled else 1.0
    grid = np.linspace(lo, hi, steps) * scale
    if cfg.refine_levels:
        lc = cfg.lambda_c
        s = (hi - lo) / (steps - 1) * scale
        extra = [lc] + [lc + sgn * s / 2**k for k in range(1, cfg.refine_levels + 1) for sgn in (-1, 1)]
        extra = [x for x in extra if lo * scale <= x <= hi * scale]
        grid = np.union1d(grid, extra)
    return grid


def sweep_tasks(cfg: SweepConfig) -> list[PointTask]:
    sizes = [None] if cfg.model.startswith("thermo_") else sorted(set(cfg.n_atoms))
    h = cfg.tolerances["deriv_step"] * cfg.lambda_c if cfg.derivative else None
    return [
        PointTask(cfg.model, n, float(lam), cfg.omega, cfg.delta, cfg.gamma, cfg.n_tr,
                  cfg.tolerances["convergence"], h)
        for n in sizes for lam in lambda_grid(cfg)
    ]


def run_sweep(cfg: SweepConfig, workers: int | None = None) -> list[CorrelationPoint]:
    """Evaluate every (N, lambda) point; persisted when ``cfg.output_path`` is set."""
    workers = workers if workers is not None else cfg.parallelism
    points = parallel_map(evaluate_point, sweep_tasks(cfg), workers)
    points.sort(key=lambda p: (p.n_atoms or 0, p.lam))
    if cfg.output_path:
        write_points(points, cfg.output_path, cfg.format, metadata=sweep_metadata(cfg))
    return points


def sweep_metadata(cfg: SweepConfig) -> dict:
    meta = asdict(cfg)
    meta.pop("parallelism")
    meta.pop("output_path")
    meta["lambda_c"] = cfg.lambda_c
    return meta


def write_points(points, path: str, fmt: str = "csv", metadata: dict | None = None):
    if fmt == "csv":
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CSV_FIELDS)
            for p in points:
                w.writerow(p.csv_row())
        if metadata is not None:
            with open(path + ".meta.json", "w") as fh:
                json.dump(metadata, fh, indent=2, sort_keys=True)
                fh.write("\n")
    elif fmt == "json":
        doc = {"metadata": metadata or {}, "points": [p.as_dict() for p in points]}
        with open(path, "w") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")
    else:
        raise ValidationError(f"unknown format {fmt!r}")


def read_points(path: str) -> list[dict]:
    """Rows of a sweep CSV with numbers parsed and empty cells as None."""
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            rec = {}
            for key, val in row.items():
                if val == "":
                    rec[key] = None
                elif key == "model":
                    rec[key] = val
                elif key == "converged":
                    rec[key] = val == "true"
                elif key in ("N", "n_tr_used"):
                    rec[key] = int(val)
                else:
                    rec[key] = float(val)
            out.append(rec)
    return out


# finite-size scaling

def auto_deriv_step(n_atoms: int) -> float:
    """Derivative step in units of lambda_c.

    The critical window narrows like N^(-2/3); the step is kept at a
    hundredth of it, capped at 1e-3.
    """
    return min(DEFAULT_DERIV_STEP, 0.01 * n_atoms ** (-2.0 / 3.0))


@dataclass(frozen=True)
class ScalingTask:
    model: str
    n_atoms: int
    omega: float = 1.0
    delta: float = 1.0
    gamma: float = 0.0
    deriv_step: float | None = None  # units of lambda_c; None picks auto_deriv_step
    bracket: tuple[float, float] | None = None  # units of lambda_c
    n_scan: int | None = None
    tol: float = 1e-8


@dataclass
class SizeResult:
    n_atoms: int
    discord_critical: float
    extremum_lambda: float
    extremum_value: float
    deriv_step: float
    n_tr_used: int | None


def _dicke_truncation(task: ScalingTask, lams) -> int:
    # a single truncation for the whole search keeps the discord curve smooth
    return max(
        dicke.solve_converged(dicke.DickeParams(task.n_atoms, task.omega, task.delta, lam), tol=task.tol).n_tr
        for lam in lams
    )


def scale_one_size(task: ScalingTask) -> SizeResult:
    """Discord at lambda_c and the extremum of dD/dlambda for one N."""
    lc = critical_coupling(task.model, task.omega, task.delta)
    lo, hi = task.bracket or SCALING_BRACKETS[task.model]
    h = (task.deriv_step or auto_deriv_step(task.n_atoms)) * lc
    n_tr = _dicke_truncation(task, (lc, hi * lc)) if task.model == "dicke" else None

    def f(lam):
        return discord_at(task.model, task.n_atoms, lam, task.omega, task.delta, task.gamma, n_tr)

    def deriv(lam):
        return (f(lam + h) - f(lam - h)) / (2 * h)

    side = "max" if task.model == "dicke" else "min"
    lam_star, value = locate_extremum(deriv, side, (lo * lc, hi * lc), n_scan=task.n_scan or SCALING_SCAN[task.model])
    return SizeResult(task.n_atoms, f(lc), lam_star, value, h, n_tr)


@dataclass
class ScalingReport:
    model: str
    sizes: list[SizeResult]
    power_law: ScalingFit
    log2_linear: ScalingFit

    def as_dict(self) -> dict:
        return {
            "model": self.model,
            "sizes": [asdict(s) for s in self.sizes],
            "power_law": self.power_law.as_dict(),
            "log2_linear": self.log2_linear.as_dict(),
        }


def run_scaling(model: str, n_values, omega=1.0, delta=1.0, gamma=0.0, deriv_step=None, bracket=None,
                min_n_power=None, min_n_log=None, workers=None) -> ScalingReport:
    """D(lambda_c) power law and log2-linear fit of the dD/dlambda extrema."""
    if model not in ("dicke", "lmg"):
        raise ValidationError("scaling runs need a finite-N model (dicke or lmg)")
    sizes = sorted(set(int(n) for n in n_values))
    if len(sizes) < 3:
        raise ValidationError("scaling needs at least three sizes")
    tasks = [ScalingTask(model, n, omega, delta, gamma, deriv_step, bracket) for n in sizes]
    results = parallel_map(scale_one_size, tasks, workers)
    ns = [r.n_atoms for r in results]
    return ScalingReport(
        model,
        results,
        fit_power_law(ns, [r.discord_critical for r in results], min_n=min_n_power),
        fit_log2_linear(ns, [r.extremum_value for r in results], min_n=min_n_log),
    )


def xstate_query(v_plus, v_minus, w, y, u_re, u_im=0.0) -> dict:
    res = quantum_discord(XState(v_plus, v_minus, w, y, complex(u_re, u_im)))
    return {
        "discord": res.discord,
        "classical": res.classical,
        "mutual_info": res.mutual_info,
        "theta": res.optimal_angles.theta,
        "phi": res.optimal_angles.phi,
        "concurrence": res.concurrence,
    }
