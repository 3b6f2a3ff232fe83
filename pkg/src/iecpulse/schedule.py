"""Invariant-parameter schedules for two-level population inversion.

A schedule is a pair of polynomial angles (gamma, beta) in normalized time
s = t / t_f. gamma steers the populations from pi (all in the lower
invariant branch) to 0; beta is the azimuthal phase that shapes the
waveforms. Three families are provided:

* third_order_pair   -- cubic gamma and beta; the baseline passage that
  completes the inversion at t_f.
* fourth_order_pair  -- quartic gamma with a prescribed midpoint value,
  which speeds up the passage; beta as in the cubic family.
* antedated_pair     -- quartic gamma forced to zero at an early time t_a,
  plus a quintic beta whose sign change compensates the gamma-rate
  reversal; the drive is switched off at t_a.

All boundary conditions are stated per unit t and converted to per unit s
(multiply rates by t_f), so coefficients are independent of t_f.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import NoCrossing, UnphysicalSchedule
from .poly import Condition, Polynomial, fit, real_roots

__all__ = [
    "SchedulePair",
    "third_order_pair",
    "fourth_order_pair",
    "antedated_pair",
    "gamma_dot_zero_crossing",
    "critical_gamma_mid",
]

PI = math.pi

#: Antedating times below roughly 2 t_f / 7.7 push gamma under -pi and make
#: the waveforms non-compensable.
MIN_ANTEDATE_FRACTION = 2.0 / 7.7


@dataclass(frozen=True)
class SchedulePair:
    """A designed (gamma, beta) schedule with its physical time scale.

    gamma, beta are polynomials in s = t / t_f (radians). t_a, when set,
    is the antedated switch time (same units as t_f). beta_dot0 is the
    initial beta rate in radians per unit t.
    """

    gamma: Polynomial
    beta: Polynomial
    t_f: float
    t_a: float | None
    beta_dot0: float

    def __post_init__(self) -> None:
        if not self.t_f > 0:
            raise ValueError("t_f must be positive")
        if self.t_a is not None and not 0 < self.t_a < self.t_f:
            raise ValueError("t_a must lie strictly inside (0, t_f)")

    @property
    def switch_fraction(self) -> float | None:
        """t_a / t_f, or None for passages that run to t_f."""
        return None if self.t_a is None else self.t_a / self.t_f


def _gamma_conditions() -> list[Condition]:
    # Inversion endpoints plus zero rate where the drive turns on/off.
    return [
        Condition(0.0, 0, PI),
        Condition(0.0, 1, 0.0),
        Condition(1.0, 0, 0.0),
        Condition(1.0, 1, 0.0),
    ]


def _cubic_beta(beta_dot0_s: float) -> Polynomial:
    # beta(0) = beta(1) = -pi/2 keeps the detuning finite at both ends and
    # the Rabi frequency nonnegative; the rate conditions fix the detuning
    # endpoint values.
    return fit(
        [
            Condition(0.0, 0, -PI / 2),
            Condition(1.0, 0, -PI / 2),
            Condition(0.0, 1, beta_dot0_s),
            Condition(1.0, 1, -beta_dot0_s),
        ],
        3,
    )


def third_order_pair(t_f: float) -> SchedulePair:
    """Cubic gamma/beta passage completing the inversion at t_f."""
    gamma = fit(_gamma_conditions(), 3)
    beta_dot0 = 1.5 * PI / t_f
    beta = _cubic_beta(1.5 * PI)
    return SchedulePair(gamma, beta, t_f, None, beta_dot0)


def fourth_order_pair(
    t_f: float, gamma_mid: float, *, enforce_range: bool = True
) -> SchedulePair:
    """Quartic gamma with gamma(t_f/2) = gamma_mid; beta as in the cubic family.

    gamma_mid below critical_gamma_mid() makes gamma dip negative near t_f,
    which no beta can compensate; such requests raise UnphysicalSchedule
    unless enforce_range=False (diagnostic construction for validation).
    """
    if enforce_range and gamma_mid < critical_gamma_mid() - 1e-6:
        raise UnphysicalSchedule(
            f"gamma_mid={gamma_mid:.6f} is below the nonnegativity limit "
            f"{critical_gamma_mid():.6f}"
        )
    gamma = fit(_gamma_conditions() + [Condition(0.5, 0, gamma_mid)], 4)
    beta_dot0 = 1.5 * PI / t_f
    beta = _cubic_beta(1.5 * PI)
    return SchedulePair(gamma, beta, t_f, None, beta_dot0)


def antedated_pair(
    t_f: float,
    t_a: float,
    beta_dot0: float | None = None,
    *,
    enforce_range: bool = True,
) -> SchedulePair:
    """Passage whose gamma reaches 0 at t_a < t_f; the drive is cut there.

    gamma is the quartic through the usual endpoint conditions plus
    gamma(t_a) = 0; it dips negative on (t_a, t_f) and its rate changes
    sign at some t_s in (t_a, t_f). beta is the quintic satisfying

        beta(0) = -pi/2, beta(t_f) = +pi/2, beta(t_a) = -pi/2,
        beta(t_s) = 0,   beta'(0) = beta_dot0, beta'(t_f) = -beta_dot0,

    so that both the detuning at gamma = 0 and the Rabi frequency at the
    rate reversal stay finite and nonnegative. beta_dot0 defaults to
    pi / (2 t_f) and is tunable (it controls the energy cost).

    With enforce_range=True (default) schedules whose gamma leaves
    [-pi, pi] raise UnphysicalSchedule; t_a below ~MIN_ANTEDATE_FRACTION
    * t_f trips this. Pass enforce_range=False to construct such a pair
    anyway for diagnostic validation.
    """
    if beta_dot0 is None:
        beta_dot0 = 0.5 * PI / t_f
    if not beta_dot0 > 0:
        raise ValueError("beta_dot0 must be positive")
    a = t_a / t_f
    if not 0.0 < a < 1.0:
        raise ValueError("t_a must lie strictly inside (0, t_f)")
    gamma = fit(_gamma_conditions() + [Condition(a, 0, 0.0)], 4)
    if enforce_range and _poly_min(gamma, 0.0, 1.0) < -PI - 1e-9:
        raise UnphysicalSchedule(
            f"gamma dips below -pi for t_a = {t_a!r} "
            f"(antedating earlier than ~{MIN_ANTEDATE_FRACTION:.4f} t_f)"
        )
    t_s = gamma_dot_zero_crossing(gamma)
    b = beta_dot0 * t_f
    beta = fit(
        [
            Condition(0.0, 0, -PI / 2),
            Condition(1.0, 0, PI / 2),
            Condition(a, 0, -PI / 2),
            Condition(t_s, 0, 0.0),
            Condition(0.0, 1, b),
            Condition(1.0, 1, -b),
        ],
        5,
    )
    return SchedulePair(gamma, beta, t_f, t_a, beta_dot0)


def gamma_dot_zero_crossing(gamma: Polynomial) -> float:
    """The unique interior s where d(gamma)/ds changes sign.

    Roots without a sign change (tangencies, boundary roots) are ignored.
    Raises NoCrossing when no unique interior sign change exists, e.g. for
    the monotone cubic gamma.
    """
    dg = gamma.derivative()
    candidates = real_roots(dg, 1e-9, 1.0 - 1e-9)
    crossings = []
    for r in candidates:
        left = dg(max(r - 1e-6, 0.0))
        right = dg(min(r + 1e-6, 1.0))
        if left * right < 0.0:
            crossings.append(r)
    if len(crossings) != 1:
        raise NoCrossing(
            f"expected exactly one interior sign change of gamma-dot, found {len(crossings)}"
        )
    return crossings[0]


def _poly_min(p: Polynomial, lo: float, hi: float) -> float:
    """Minimum of p on [lo, hi]: dense grid plus stationary-point refinement."""
    grid = np.linspace(lo, hi, 10_001)
    values = [float(np.min(p(grid)))]
    values += [float(p(r)) for r in real_roots(p.derivative(), lo, hi)]
    return min(values)


@lru_cache(maxsize=1)
def critical_gamma_mid() -> float:
    """Smallest midpoint value keeping the quartic gamma nonnegative on [0, t_f].

    Below this threshold the quartic develops a negative dip just before
    t_f; the dip hugs the structural double root at t_f, so right at the
    threshold it degenerates into a triple root there. Negativity is
    therefore tested as interior minimum < -1e-12 (dip depth shrinks
    cubically toward the threshold, below float resolution) or terminal
    curvature < 0 (exact at the threshold, linear in gamma_mid). Bisection
    to 1e-9.
    """
    def dips(mid: float) -> bool:
        g = fit(_gamma_conditions() + [Condition(0.5, 0, mid)], 4)
        curvature_end = g.derivative().derivative()(1.0)
        return curvature_end < 0.0 or _poly_min(g, 0.0, 1.0) < -1e-12

    lo, hi = 0.3, PI / 2
    while hi - lo > 1e-9:
        mid = 0.5 * (lo + hi)
        if dips(mid):
            lo = mid
        else:
            hi = mid
    return hi
