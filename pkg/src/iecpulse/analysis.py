"""Energy cost, schedule validation, and optimization of antedated passages.

The energy cost of a passage is the dimensionless pulse area
integral of omega_r from 0 to the completion time (t_a for antedated
schedules, else t_f). A resonant pi-pulse has area pi, the lower bound.
For a fixed antedating time the cost is a unimodal function of the
initial beta rate; sweep_beta_dot0 locates its minimum by a grid scan
followed by golden-section refinement.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .dynamics import Weights, adiabatic_state, bloch_vector, fidelity, invariant_state
from .errors import DegeneratePoint, DivergentPulse, NoFeasiblePoint
from .pulse import _waveform, adaptive_simpson
from .schedule import SchedulePair, antedated_pair

__all__ = [
    "SweepResult",
    "ValidationReport",
    "PassageReport",
    "energy_cost",
    "validate_schedule",
    "sweep_beta_dot0",
    "compare_passages",
    "golden_section",
]

#: Frequencies are "finite" when |delta| * t_f stays below this bound on the
#: validation grid; genuine divergences blow past any fixed threshold.
DELTA_FINITE_BOUND = 1e3


def energy_cost(pair: SchedulePair) -> float:
    """Pulse area of omega_r up to the completion time (dimensionless)."""
    s_end = pair.switch_fraction if pair.switch_fraction is not None else 1.0
    wave = _waveform(pair)
    return adaptive_simpson(wave.omega, 0.0, s_end, 1e-8)


@dataclass
class ValidationReport:
    """Grid-check outcome for one schedule; validation never raises."""

    omega_r_nonnegative: bool
    delta_finite: bool
    gamma_range_ok: bool
    max_adiabaticity_metric: float
    messages: list[str] = field(default_factory=list)

    @property
    def feasible(self) -> bool:
        return self.omega_r_nonnegative and self.delta_finite and self.gamma_range_ok


def validate_schedule(pair: SchedulePair, *, grid_points: int = 10_000) -> ValidationReport:
    """Check waveform physicality on a dense grid.

    omega_r must be nonnegative and delta bounded over the driven segment
    [0, t_end]; gamma must stay within [-pi, pi] over the whole design
    window [0, t_f] (dips below -pi signal non-compensable singularities).
    Also reports the maximum adiabaticity metric over the driven segment.
    """
    wave = _waveform(pair)
    s_end = pair.switch_fraction if pair.switch_fraction is not None else 1.0
    grid = (np.arange(grid_points) + 0.5) * (s_end / grid_points)
    messages: list[str] = []

    omega_ok = delta_ok = True
    max_metric = math.nan
    try:
        omega = wave.omega_many(grid)
        delta = wave.delta_many(grid)
    except DivergentPulse as exc:
        messages.append(str(exc))
        omega_ok = delta_ok = False
    else:
        min_omega = float(omega.min())
        if min_omega < -1e-9:
            omega_ok = False
            messages.append(f"omega_r turns negative (min {min_omega:.3e} * 1/t_f)")
        max_delta = float(np.abs(delta).max())
        if not np.isfinite(max_delta) or max_delta > DELTA_FINITE_BOUND:
            delta_ok = False
            messages.append(f"delta exceeds the finiteness bound (max {max_delta:.3e} * 1/t_f)")
        max_metric = _max_adiabaticity(wave, grid, omega, delta)
        if math.isnan(max_metric):
            messages.append("adiabaticity metric undefined somewhere (level crossing)")

    full = np.linspace(0.0, 1.0, grid_points + 1)
    gamma = np.asarray(pair.gamma(full), dtype=float)
    gamma_ok = bool(gamma.min() >= -math.pi - 1e-9 and gamma.max() <= math.pi + 1e-9)
    if not gamma_ok:
        messages.append(
            f"gamma leaves [-pi, pi] (range [{gamma.min():.4f}, {gamma.max():.4f}] rad)"
        )
    return ValidationReport(
        omega_r_nonnegative=omega_ok,
        delta_finite=delta_ok,
        gamma_range_ok=gamma_ok,
        max_adiabaticity_metric=max_metric,
        messages=messages,
    )


def _max_adiabaticity(wave, grid: np.ndarray, omega: np.ndarray, delta: np.ndarray) -> float:
    h = 1e-6
    try:
        om_p = wave.omega_many(grid + h)
        om_m = wave.omega_many(grid - h)
        dl_p = wave.delta_many(grid + h)
        dl_m = wave.delta_many(grid - h)
    except DivergentPulse:
        return math.nan
    gen = np.hypot(omega, delta)
    if gen.min() < 1e-12:
        return math.nan
    dom = (om_p - om_m) / (2.0 * h)
    ddl = (dl_p - dl_m) / (2.0 * h)
    return float(np.abs((omega * ddl - dom * delta) / gen**3).max())


@dataclass
class SweepResult:
    """Energy cost versus initial beta rate for one antedating time.

    beta_dot0 values are in units of pi / (2 t_f). Infeasible grid points
    carry cost NaN and are listed separately.
    """

    t_a: float
    grid: list[tuple[float, float]]
    minimum: tuple[float, float]
    infeasible_points: list[float]


def _sweep_point(args: tuple[float, float, float]) -> tuple[float, bool]:
    """Cost and feasibility at one grid point (t_f, t_a, beta_dot0 units)."""
    t_f, t_a, units = args
    pair = antedated_pair(t_f, t_a, units * 0.5 * math.pi / t_f, enforce_range=False)
    report = validate_schedule(pair)
    if not report.feasible:
        return math.nan, False
    try:
        return energy_cost(pair), True
    except DivergentPulse:
        return math.nan, False


def sweep_beta_dot0(
    t_f: float,
    t_a: float,
    lo: float,
    hi: float,
    n: int,
    *,
    workers: int | None = None,
) -> SweepResult:
    """Sweep the initial beta rate over [lo, hi] (units of pi / 2 t_f).

    Builds the antedated schedule at each of n grid points, records the
    energy cost of feasible points, then refines the best bracket by
    golden-section search (well below the 1e-4 contract). Raises
    NoFeasiblePoint when validation fails everywhere.
    """
    if not lo < hi:
        raise ValueError("need lo < hi")
    if n < 10:
        raise ValueError("need n >= 10 grid points")
    units = np.linspace(lo, hi, n)
    jobs = [(t_f, t_a, float(u)) for u in units]
    if workers is not None and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            evaluated = list(pool.map(_sweep_point, jobs, chunksize=max(1, n // (4 * workers))))
    else:
        evaluated = [_sweep_point(job) for job in jobs]
    grid = [(float(u), cost) for u, (cost, _) in zip(units, evaluated)]
    infeasible = [float(u) for u, (_, ok) in zip(units, evaluated) if not ok]
    feasible = [(float(u), cost) for u, (cost, ok) in zip(units, evaluated) if ok]
    if not feasible:
        raise NoFeasiblePoint(f"no feasible beta_dot0 in [{lo}, {hi}] for t_a = {t_a}")

    best_idx = min(range(len(feasible)), key=lambda i: feasible[i][1])
    bracket_lo = feasible[max(best_idx - 1, 0)][0]
    bracket_hi = feasible[min(best_idx + 1, len(feasible) - 1)][0]

    def cost_at(u: float) -> float:
        value, ok = _sweep_point((t_f, t_a, u))
        return value if ok else math.inf

    candidates = [feasible[best_idx]]
    if bracket_hi > bracket_lo:
        u_star, c_star = golden_section(cost_at, bracket_lo, bracket_hi, tol=1e-6)
        if math.isfinite(c_star):
            candidates.append((u_star, c_star))
    minimum = min(candidates, key=lambda p: p[1])
    return SweepResult(t_a=t_a, grid=grid, minimum=minimum, infeasible_points=infeasible)


def golden_section(f, lo: float, hi: float, *, tol: float = 1e-6) -> tuple[float, float]:
    """Minimize a unimodal f on [lo, hi]; returns (argmin, min)."""
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    c = hi - inv_phi * (hi - lo)
    d = lo + inv_phi * (hi - lo)
    fc, fd = f(c), f(d)
    while hi - lo > tol:
        if fc < fd:
            hi, d, fd = d, c, fc
            c = hi - inv_phi * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + inv_phi * (hi - lo)
            fd = f(d)
    u = 0.5 * (lo + hi)
    return u, f(u)


@dataclass
class PassageReport:
    """Aligned per-passage tables: populations, Bloch trajectories, timing."""

    pair: SchedulePair
    t: np.ndarray
    rho11: np.ndarray
    rho22: np.ndarray
    bloch: np.ndarray
    adiabatic_rho11: np.ndarray
    adiabatic_rho22: np.ndarray
    adiabatic_bloch: np.ndarray
    fidelity_to_target: np.ndarray
    max_population_gap: float
    inversion_time: float | None


def compare_passages(
    pairs: list[SchedulePair],
    w: Weights,
    n_grid: int,
    *,
    population_tol: float = 1e-3,
) -> list[PassageReport]:
    """Tabulate invariant-basis and adiabatic-reference passages side by side.

    For each schedule: diagonal populations and Bloch trajectory of the
    designed state, the same for the mixing-angle reference, the largest
    population gap between the two, and the first time the populations
    reach their inverted targets within population_tol.
    """
    reports = []
    for pair in pairs:
        s_grid = np.arange(n_grid + 1) / n_grid
        rho = [invariant_state(pair, w, float(s)) for s in s_grid]
        try:
            ad = [adiabatic_state(pair, w, float(s)) for s in s_grid]
        except DegeneratePoint:
            ad = None
        target = invariant_state(pair, w, 1.0)
        rho11 = np.array([r[0, 0].real for r in rho])
        rho22 = np.array([r[1, 1].real for r in rho])
        fid = np.array([fidelity(r, target) for r in rho])
        gap = math.nan
        ad11 = ad22 = np.full(n_grid + 1, math.nan)
        ad_bloch = np.full((n_grid + 1, 3), math.nan)
        if ad is not None:
            ad11 = np.array([r[0, 0].real for r in ad])
            ad22 = np.array([r[1, 1].real for r in ad])
            ad_bloch = np.stack([bloch_vector(r) for r in ad])
            gap = float(np.abs(rho11 - ad11).max())
        hit = np.nonzero(
            (np.abs(rho11 - target[0, 0].real) <= population_tol)
            & (np.abs(rho22 - target[1, 1].real) <= population_tol)
        )[0]
        inversion_time = float(s_grid[hit[0]] * pair.t_f) if len(hit) else None
        reports.append(
            PassageReport(
                pair=pair,
                t=s_grid * pair.t_f,
                rho11=rho11,
                rho22=rho22,
                bloch=np.stack([bloch_vector(r) for r in rho]),
                adiabatic_rho11=ad11,
                adiabatic_rho22=ad22,
                adiabatic_bloch=ad_bloch,
                fidelity_to_target=fid,
                max_population_gap=gap,
                inversion_time=inversion_time,
            )
        )
    return reports


def default_workers() -> int:
    """Worker count for parallel sweeps; IECPULSE_WORKERS overrides cpu_count."""
    env = os.environ.get("IECPULSE_WORKERS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1
