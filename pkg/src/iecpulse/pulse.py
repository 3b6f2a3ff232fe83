"""Control waveforms derived from a schedule.

The invariant construction fixes the Rabi frequency and detuning as

    omega_r(t) = gamma_dot / sin(beta)
    delta(t)   = omega_r * cot(gamma) * cos(beta) - beta_dot

Both quotients hit 0/0 at schedule-defined points (the passage endpoints,
the antedated zero of gamma, the rate-reversal zero of beta). Because
gamma and beta are polynomials, the limits there are exact ratios of
leading Taylor coefficients; this module evaluates a truncated power
series of numerator and denominator around each such point instead of
dividing nearly-cancelling floats. A genuine order mismatch (denominator
vanishing faster than numerator) raises DivergentPulse.

All internal arithmetic is dimensionless: rates per unit s = t / t_f and
frequencies multiplied by t_f. Public functions convert at the boundary,
so every dimensionless output is exactly independent of t_f.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import DegeneratePoint, DivergentPulse
from .poly import Polynomial, real_roots
from .schedule import SchedulePair

__all__ = [
    "PulseTable",
    "omega_r_at",
    "delta_at",
    "synthesize",
    "adiabaticity_metric",
    "lr_phase",
    "adaptive_simpson",
]

#: Half-width (in s) of the neighborhood around a singular point inside
#: which series evaluation replaces direct division.
_WINDOW = 1e-3
_TERMS = 20
#: Series coefficients below this fraction of the series scale are fit
#: noise, not structure.
_NOISE_REL = 1e-9


# ---------------------------------------------------------------------------
# truncated power series helpers (plain float arrays, ascending powers)

def _series_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.convolve(a, b)[:_TERMS]


def _series_sin_cos(h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """sin and cos of a power series with arbitrary constant term."""
    c0 = h[0]
    hh = h.copy()
    hh[0] = 0.0
    sin_hh = np.zeros(_TERMS)
    cos_hh = np.zeros(_TERMS)
    power = np.zeros(_TERMS)
    power[0] = 1.0
    fact = 1.0
    for k in range(_TERMS):
        if k:
            fact *= k
        term = power / fact
        if k % 4 == 0:
            cos_hh += term
        elif k % 4 == 1:
            sin_hh += term
        elif k % 4 == 2:
            cos_hh -= term
        else:
            sin_hh -= term
        power = _series_mul(power, hh)
        if not power.any():
            break
    s0, c0v = math.sin(c0), math.cos(c0)
    return s0 * cos_hh + c0v * sin_hh, c0v * cos_hh - s0 * sin_hh


_WINDOW_POWERS = _WINDOW ** np.arange(_TERMS)


def _leading_index(c: np.ndarray) -> int | None:
    # Coefficients only matter within |u| < _WINDOW, so noise is separated
    # from structure in window-scaled units; raw high-order coefficients of
    # composed series grow combinatorially and would drown the threshold.
    mags = np.abs(c) * _WINDOW_POWERS[: len(c)]
    scale = float(mags.max())
    if scale == 0.0:
        return None
    threshold = _NOISE_REL * max(1.0, scale)
    idx = np.nonzero(mags > threshold)[0]
    return int(idx[0]) if len(idx) else None


def _series_ratio(num: np.ndarray, den: np.ndarray, u: float, where: float) -> float:
    jn = _leading_index(num)
    jd = _leading_index(den)
    if jd is None:
        raise DivergentPulse(f"denominator vanishes identically near s = {where:.6g}")
    if jn is None:
        return 0.0
    if jn < jd:
        raise DivergentPulse(f"waveform diverges at s = {where:.6g}")
    value = npoly.polyval(u, num[jn:]) / npoly.polyval(u, den[jd:])
    return float(u ** (jn - jd) * value)


# ---------------------------------------------------------------------------
# per-schedule waveform evaluator

def _angle_multiple_roots(p: Polynomial, dp: Polynomial) -> list[float]:
    """Points in [0, 1] where sin(p) = 0, i.e. p crosses a multiple of pi.

    A structural double root (e.g. the schedule endpoint where value and
    rate both vanish) can numerically split into a close pair; clusters
    within 1e-6 are merged onto the member with the smallest rate, which
    is the correct expansion point for the series limits.
    """
    stations = [0.0, 1.0] + real_roots(dp, 0.0, 1.0)
    values = [float(p(s)) for s in stations]
    k_lo = math.ceil(min(values) / math.pi - 1e-9)
    k_hi = math.floor(max(values) / math.pi + 1e-9)
    roots: list[float] = []
    for k in range(k_lo, k_hi + 1):
        roots.extend(real_roots(p.shifted(-k * math.pi), 0.0, 1.0))
    roots.sort()
    merged: list[float] = []
    cluster: list[float] = []
    for r in roots + [math.inf]:
        if cluster and r - cluster[-1] > 1e-6:
            merged.append(min(cluster, key=lambda x: abs(float(dp(x)))))
            cluster = []
        if math.isfinite(r):
            cluster.append(r)
    return merged


class _Waveform:
    """Dimensionless waveform evaluators for one schedule pair."""

    def __init__(self, pair: SchedulePair):
        self.gamma = pair.gamma
        self.beta = pair.beta
        self.dgamma = pair.gamma.derivative()
        self.dbeta = pair.beta.derivative()
        self.switch = pair.switch_fraction
        self.beta_sing = _angle_multiple_roots(self.beta, self.dbeta)
        self.gamma_sing = _angle_multiple_roots(self.gamma, self.dgamma)
        self.all_sing = sorted(set(self.beta_sing) | set(self.gamma_sing))
        self._series: dict[tuple[str, float], tuple[np.ndarray, np.ndarray]] = {}
        self._switch_delta: float | None = None

    # -- singular-point bookkeeping --------------------------------------

    @staticmethod
    def _nearest(s: float, points: list[float]) -> float | None:
        best = None
        dist = _WINDOW
        for s0 in points:
            d = abs(s - s0)
            if d < dist:
                best, dist = s0, d
        return best

    def _omega_series(self, s0: float) -> tuple[np.ndarray, np.ndarray]:
        key = ("omega", s0)
        if key not in self._series:
            num = self.dgamma.taylor_coefficients(s0, _TERMS)
            sin_b, _ = _series_sin_cos(self.beta.taylor_coefficients(s0, _TERMS))
            self._series[key] = (num, sin_b)
        return self._series[key]

    def _cot_series(self, s0: float) -> tuple[np.ndarray, np.ndarray]:
        key = ("cot", s0)
        if key not in self._series:
            sin_g, cos_g = _series_sin_cos(self.gamma.taylor_coefficients(s0, _TERMS))
            sin_b, cos_b = _series_sin_cos(self.beta.taylor_coefficients(s0, _TERMS))
            dg = self.dgamma.taylor_coefficients(s0, _TERMS)
            num = _series_mul(_series_mul(dg, cos_g), cos_b)
            den = _series_mul(sin_g, sin_b)
            self._series[key] = (num, den)
        return self._series[key]

    # -- scalar evaluators (design waveform, no switch applied) ----------

    def omega(self, s: float) -> float:
        """Rabi frequency times t_f."""
        s0 = self._nearest(s, self.beta_sing)
        if s0 is None:
            return float(self.dgamma(s)) / math.sin(float(self.beta(s)))
        num, den = self._omega_series(s0)
        return _series_ratio(num, den, s - s0, s0)

    def cot_term(self, s: float) -> float:
        """omega_r * cot(gamma) * cos(beta) times t_f (= delta + beta_dot)."""
        s0 = self._nearest(s, self.all_sing)
        if s0 is None:
            g = float(self.gamma(s))
            b = float(self.beta(s))
            return float(self.dgamma(s)) * math.cos(g) * math.cos(b) / (
                math.sin(b) * math.sin(g)
            )
        num, den = self._cot_series(s0)
        return _series_ratio(num, den, s - s0, s0)

    def delta(self, s: float) -> float:
        """Detuning times t_f."""
        return self.cot_term(s) - float(self.dbeta(s))

    def omega_tilde(self, s: float) -> float:
        """Phase-accumulation rate times t_f:
        (delta + beta_dot) cos(gamma) + beta_dot + omega_r sin(gamma) cos(beta).
        """
        g = float(self.gamma(s))
        b = float(self.beta(s))
        return (
            self.cot_term(s) * math.cos(g)
            + float(self.dbeta(s))
            + self.omega(s) * math.sin(g) * math.cos(b)
        )

    # -- vectorized grid evaluators ---------------------------------------

    def _grid_fix(self, s: np.ndarray, out: np.ndarray, points: list[float], f) -> None:
        for s0 in points:
            mask = np.abs(s - s0) < _WINDOW
            if mask.any():
                out[mask] = [f(float(v)) for v in s[mask]]

    def omega_many(self, s: np.ndarray) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = self.dgamma(s) / np.sin(self.beta(s))
        self._grid_fix(s, out, self.beta_sing, self.omega)
        return out

    def delta_many(self, s: np.ndarray) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        g = self.gamma(s)
        b = self.beta(s)
        with np.errstate(divide="ignore", invalid="ignore"):
            cot = self.dgamma(s) * np.cos(g) * np.cos(b) / (np.sin(b) * np.sin(g))
        self._grid_fix(s, cot, self.all_sing, self.cot_term)
        return cot - self.dbeta(s)

    # -- switch handling ---------------------------------------------------

    def switch_delta(self) -> float:
        """Detuning (times t_f) held after the antedated switch."""
        if self.switch is None:
            raise ValueError("schedule has no antedated switch")
        if self._switch_delta is None:
            value = self.delta(self.switch)
            if abs(value) < 1e-9:
                warnings.warn(
                    "switched detuning is ~0: the post-switch Hamiltonian is degenerate "
                    "and the population inversion is not well defined",
                    stacklevel=3,
                )
            self._switch_delta = value
        return self._switch_delta


@lru_cache(maxsize=128)
def _waveform(pair: SchedulePair) -> _Waveform:
    return _Waveform(pair)


# ---------------------------------------------------------------------------
# public API

def omega_r_at(pair: SchedulePair, s: float) -> float:
    """Rabi frequency of the design waveform at s, in angular-frequency units."""
    _check_s(s)
    return _waveform(pair).omega(s) / pair.t_f


def delta_at(pair: SchedulePair, s: float) -> float:
    """Detuning of the design waveform at s, in angular-frequency units."""
    _check_s(s)
    return _waveform(pair).delta(s) / pair.t_f


def _check_s(s: float) -> None:
    if not -1e-12 <= s <= 1.0 + 1e-12:
        raise ValueError(f"s = {s!r} outside [0, 1]")


@dataclass(frozen=True)
class PulseTable:
    """Uniformly sampled waveforms on [0, t_f].

    omega_r and delta are in angular-frequency units (1/t_f scale). For
    antedated schedules, samples past t_a carry omega_r = 0 and the
    constant switched detuning.
    """

    t_f: float
    t: np.ndarray
    omega_r: np.ndarray
    delta: np.ndarray
    t_a: float | None = None

    def __len__(self) -> int:
        return len(self.t)

    def rows(self):
        """Iterate (t, omega_r, delta) samples."""
        return zip(self.t, self.omega_r, self.delta)


def synthesize(pair: SchedulePair, n: int) -> PulseTable:
    """Sample the physical waveforms at n+1 uniform times on [0, t_f]."""
    if n < 2:
        raise ValueError("need n >= 2 grid intervals")
    wave = _waveform(pair)
    s = np.arange(n + 1) / n
    omega = wave.omega_many(s)
    delta = wave.delta_many(s)
    a = pair.switch_fraction
    if a is not None:
        after = s > a
        omega[after] = 0.0
        delta[after] = wave.switch_delta()
    return PulseTable(
        t_f=pair.t_f,
        t=s * pair.t_f,
        omega_r=omega / pair.t_f,
        delta=delta / pair.t_f,
        t_a=pair.t_a,
    )


def adiabaticity_metric(pair: SchedulePair, s: float, *, h: float = 1e-6) -> float:
    """|omega_r * delta_dot - omega_r_dot * delta| / Omega^3 at interior s.

    Dimensionless and independent of t_f. Rates are central finite
    differences of the closed-form evaluators at step h in s. Raises
    DegeneratePoint at a level crossing (Omega * t_f < 1e-12).
    """
    if not h < s < 1.0 - h:
        raise ValueError("adiabaticity metric is defined at interior points")
    wave = _waveform(pair)
    om = wave.omega(s)
    dl = wave.delta(s)
    gen = math.hypot(om, dl)
    if gen < 1e-12:
        raise DegeneratePoint(f"generalized Rabi frequency vanishes at s = {s:.6g}")
    dom = (wave.omega(s + h) - wave.omega(s - h)) / (2.0 * h)
    ddl = (wave.delta(s + h) - wave.delta(s - h)) / (2.0 * h)
    return abs(om * ddl - dom * dl) / gen**3


def lr_phase(pair: SchedulePair, t: float, branch: int) -> float:
    """Phase accumulated by an invariant eigenstate up to time t (radians).

    branch = +1 for the upper invariant branch, -1 for the lower; the two
    phases are opposite. Quadrature is adaptive Simpson to 1e-9 absolute.
    """
    if branch not in (+1, -1):
        raise ValueError("branch must be +1 or -1")
    if not 0.0 <= t <= pair.t_f * (1 + 1e-12):
        raise ValueError("t outside [0, t_f]")
    wave = _waveform(pair)
    s_end = t / pair.t_f
    if s_end == 0.0:
        return 0.0
    integral = adaptive_simpson(wave.omega_tilde, 0.0, s_end, 1e-9)
    return -0.5 * branch * integral


def adaptive_simpson(f, a: float, b: float, tol: float, *, max_depth: int = 48) -> float:
    """Adaptive Simpson quadrature of f on [a, b] to absolute tolerance tol."""
    fa, fb = f(a), f(b)
    m = 0.5 * (a + b)
    fm = f(m)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    return _simpson_step(f, a, b, fa, fb, fm, whole, tol, max_depth)


def _simpson_step(f, a, b, fa, fb, fm, whole, tol, depth):
    m = 0.5 * (a + b)
    lm, rm = 0.5 * (a + m), 0.5 * (m + b)
    flm, frm = f(lm), f(rm)
    left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
    right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
    err = left + right - whole
    if depth <= 0 or abs(err) <= 15.0 * tol:
        return left + right + err / 15.0
    half = 0.5 * tol
    return _simpson_step(f, a, m, fa, fm, flm, left, half, depth - 1) + _simpson_step(
        f, m, b, fm, fb, frm, right, half, depth - 1
    )
