"""Polynomial algebra and constrained (value/derivative) interpolation.

All schedules in this package are real polynomials in the normalized time
s = t / t_f on [0, 1]. Fitting solves a dense Vandermonde-with-derivatives
system; root finding brackets sign changes on a dense grid and bisects.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import SingularSystem

__all__ = ["Polynomial", "Condition", "fit", "real_roots"]


class Polynomial:
    """Immutable real polynomial, coefficients in ascending power."""

    __slots__ = ("_coeffs",)

    def __init__(self, coefficients: Sequence[float]) -> None:
        c = np.array(coefficients, dtype=float).reshape(-1)
        c.setflags(write=False)
        self._coeffs = c

    @property
    def coefficients(self) -> np.ndarray:
        return self._coeffs

    @property
    def degree(self) -> int:
        """len(coefficients) - 1; the empty (zero) polynomial has degree -1."""
        return len(self._coeffs) - 1

    def __call__(self, s):
        if len(self._coeffs) == 0:
            return np.zeros_like(np.asarray(s, dtype=float)) if np.ndim(s) else 0.0
        return npoly.polyval(s, self._coeffs)

    def derivative(self) -> "Polynomial":
        if len(self._coeffs) <= 1:
            return Polynomial([])
        return Polynomial(self._coeffs[1:] * np.arange(1, len(self._coeffs)))

    def taylor_coefficients(self, s0: float, n: int) -> np.ndarray:
        """Coefficients of p(s0 + u) as a power series in u, length n."""
        out = np.zeros(n)
        q: Polynomial = self
        fact = 1.0
        for j in range(n):
            if j:
                fact *= j
            if q.degree < 0:
                break
            out[j] = q(s0) / fact
            q = q.derivative()
        return out

    def shifted(self, offset: float) -> "Polynomial":
        """p + offset (constant term shifted)."""
        if len(self._coeffs) == 0:
            return Polynomial([offset])
        c = self._coeffs.copy()
        c[0] += offset
        return Polynomial(c)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Polynomial):
            return NotImplemented
        return np.array_equal(self._coeffs, other._coeffs)

    def __hash__(self) -> int:
        return hash(self._coeffs.tobytes())

    def __repr__(self) -> str:
        return f"Polynomial({self._coeffs.tolist()})"


@dataclass(frozen=True)
class Condition:
    """One interpolation constraint: the derivative_order-th derivative at s equals value."""

    s: float
    derivative_order: int
    value: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.s <= 1.0:
            raise ValueError("condition abscissa must lie in [0, 1]")
        if self.derivative_order < 0:
            raise ValueError("derivative order must be nonnegative")


def _condition_row(s: float, order: int, degree: int) -> np.ndarray:
    row = np.zeros(degree + 1)
    for j in range(order, degree + 1):
        row[j] = math.perm(j, order) * s ** (j - order)
    return row


def fit(conditions: Sequence[Condition], degree: int) -> Polynomial:
    """Fit the unique degree-`degree` polynomial through the given conditions.

    Requires exactly degree + 1 conditions. Raises SingularSystem when the
    constraint matrix is rank-deficient (duplicate or conflicting conditions).
    """
    if len(conditions) != degree + 1:
        raise ValueError(
            f"need exactly {degree + 1} conditions for degree {degree}, got {len(conditions)}"
        )
    a = np.array([_condition_row(c.s, c.derivative_order, degree) for c in conditions])
    b = np.array([c.value for c in conditions])
    try:
        coeffs = np.linalg.solve(a, b)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(f"rank-deficient interpolation system: {exc}") from exc
    p = Polynomial(coeffs)
    scale = max(1.0, float(np.max(np.abs(b))))
    for c in conditions:
        q = p
        for _ in range(c.derivative_order):
            q = q.derivative()
        if abs(q(c.s) - c.value) > 1e-9 * scale:
            raise SingularSystem("ill-conditioned interpolation system (residual check failed)")
    return p


def real_roots(
    p: Polynomial, lo: float, hi: float, *, cells: int = 2048, tol: float = 1e-12
) -> list[float]:
    """All real roots of p in [lo, hi], sorted ascending.

    Sign changes are bracketed on a `cells`-cell grid and bisected to `tol`;
    grid nodes where |p| is negligible relative to the grid scale count as
    roots (catches boundary roots without a sign change). Multiple roots
    inside one cell are reported once per sign change.
    """
    if not lo < hi:
        raise ValueError("real_roots requires lo < hi")
    grid = np.linspace(lo, hi, cells + 1)
    f = np.asarray(p(grid), dtype=float)
    scale = float(np.max(np.abs(f)))
    if scale == 0.0:
        return []
    roots: list[float] = [float(s) for s, v in zip(grid, f) if abs(v) <= 1e-12 * scale]
    for i in range(cells):
        fa, fb = f[i], f[i + 1]
        if fa * fb < 0.0:
            a, b = float(grid[i]), float(grid[i + 1])
            va = fa
            while b - a > tol:
                m = 0.5 * (a + b)
                vm = float(p(m))
                if vm == 0.0:
                    a = b = m
                    break
                if va * vm < 0.0:
                    b = m
                else:
                    a, va = m, vm
            roots.append(0.5 * (a + b))
    roots.sort()
    merged: list[float] = []
    for r in roots:
        if not merged or r - merged[-1] > 1e-9:
            merged.append(r)
    return merged
