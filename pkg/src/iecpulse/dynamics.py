"""Two-level mixed-state dynamics along a designed passage.

States are plain 2x2 complex numpy arrays (density matrices) or length-2
complex vectors. The invariant-basis mixed state

    rho(t) = p_plus |phi_plus(t)><phi_plus(t)| + p_minus |phi_minus(t)><phi_minus(t)|

is the exact solution of the von Neumann equation under the engineered
Hamiltonian, so a fixed-step RK4 integration of i drho/dt = [H, rho]
serves as an independent oracle for the whole construction. The
mixing-angle (instantaneous-eigenbasis) state provides the adiabatic
reference passage.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegeneratePoint, StepTooCoarse
from .pulse import _waveform
from .schedule import SchedulePair

__all__ = [
    "Weights",
    "Trajectory",
    "bloch_vector",
    "check_density_matrix",
    "hamiltonian_at",
    "invariant_at",
    "invariant_eigenstate",
    "invariant_residual",
    "invariant_state",
    "adiabatic_state",
    "evolve",
    "evolve_pure",
    "fidelity",
]

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
IDENTITY = np.eye(2, dtype=complex)


@dataclass(frozen=True)
class Weights:
    """Populations of the two invariant branches; they must sum to one."""

    p_plus: float
    p_minus: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.p_plus <= 1.0 and 0.0 <= self.p_minus <= 1.0):
            raise ValueError("branch weights must lie in [0, 1]")
        if abs(self.p_plus + self.p_minus - 1.0) > 1e-12:
            raise ValueError("branch weights must sum to 1")

    @property
    def difference(self) -> float:
        return self.p_plus - self.p_minus


@dataclass(frozen=True)
class Trajectory:
    """Sampled evolution: times, states, Bloch vectors, fidelity to target."""

    t: np.ndarray
    rho: np.ndarray
    bloch: np.ndarray
    fidelity_to_target: np.ndarray
    target: np.ndarray


def bloch_vector(rho: np.ndarray) -> np.ndarray:
    """(x, y, z) with rho = (I + x sx + y sy + z sz) / 2."""
    return np.array(
        [
            2.0 * rho[0, 1].real,
            -2.0 * rho[0, 1].imag,
            (rho[0, 0] - rho[1, 1]).real,
        ]
    )


def check_density_matrix(
    rho: np.ndarray, *, herm_tol: float = 1e-12, trace_tol: float = 1e-12, eig_tol: float = 1e-10
) -> None:
    """Raise ValueError unless rho is Hermitian, unit-trace, and PSD."""
    if rho.shape != (2, 2):
        raise ValueError("density matrix must be 2x2")
    if np.abs(rho - rho.conj().T).max() > herm_tol:
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho).real - 1.0) > trace_tol or abs(np.trace(rho).imag) > trace_tol:
        raise ValueError("density matrix trace is not 1")
    if np.linalg.eigvalsh(rho).min() < -eig_tol:
        raise ValueError("density matrix has a negative eigenvalue")


# ---------------------------------------------------------------------------
# operators along the passage

def _h_dimless(pair: SchedulePair, s: float) -> np.ndarray:
    """H * t_f at s, honoring the antedated switch for s > t_a / t_f."""
    wave = _waveform(pair)
    a = pair.switch_fraction
    if a is not None and s > a:
        d = wave.switch_delta()
        return np.array([[0.5 * d, 0.0], [0.0, -0.5 * d]], dtype=complex)
    om = wave.omega(s)
    dl = wave.delta(s)
    return np.array([[0.5 * dl, 0.5 * om], [0.5 * om, -0.5 * dl]], dtype=complex)


def hamiltonian_at(pair: SchedulePair, s: float) -> np.ndarray:
    """The 2x2 control Hamiltonian at s, in angular-frequency units."""
    return _h_dimless(pair, s) / pair.t_f


def invariant_at(pair: SchedulePair, s: float) -> np.ndarray:
    """The dynamical invariant (unit scale constant) of the design at s."""
    g = float(pair.gamma(s))
    b = float(pair.beta(s))
    off = 0.5 * math.sin(g) * complex(math.cos(b), math.sin(b))
    return np.array(
        [[0.5 * math.cos(g), off], [off.conjugate(), -0.5 * math.cos(g)]], dtype=complex
    )


def invariant_eigenstate(pair: SchedulePair, branch: int, s: float) -> np.ndarray:
    """Instantaneous eigenstate of the invariant, branch = +1 or -1."""
    g = float(pair.gamma(s))
    b = float(pair.beta(s))
    if branch == +1:
        return np.array(
            [math.cos(0.5 * g) * complex(math.cos(b), math.sin(b)), math.sin(0.5 * g)],
            dtype=complex,
        )
    if branch == -1:
        return np.array(
            [math.sin(0.5 * g), -math.cos(0.5 * g) * complex(math.cos(b), -math.sin(b))],
            dtype=complex,
        )
    raise ValueError("branch must be +1 or -1")


def invariant_residual(pair: SchedulePair, s: float) -> float:
    """Frobenius norm of i dI/dt - [H, I], times t_f (dimensionless).

    This is the self-consistency check of the whole inverse construction:
    the waveforms are derived exactly from the invariant equation, so the
    residual must vanish to floating-point accuracy. Past the antedated
    switch the invariant is frozen at its t_a value and checked against
    the switched (diagonal) Hamiltonian.
    """
    a = pair.switch_fraction
    if a is not None and s > a:
        inv = invariant_at(pair, a)
        h = _h_dimless(pair, s)
        return float(np.linalg.norm(h @ inv - inv @ h))
    g = float(pair.gamma(s))
    b = float(pair.beta(s))
    dg = float(pair.gamma.derivative()(s))
    db = float(pair.beta.derivative()(s))
    phase = complex(math.cos(b), math.sin(b))
    d_off = 0.5 * phase * complex(dg * math.cos(g), db * math.sin(g))
    d_inv = np.array(
        [[-0.5 * dg * math.sin(g), d_off], [d_off.conjugate(), 0.5 * dg * math.sin(g)]],
        dtype=complex,
    )
    inv = invariant_at(pair, s)
    h = _h_dimless(pair, s)
    return float(np.linalg.norm(1j * d_inv - (h @ inv - inv @ h)))


# ---------------------------------------------------------------------------
# states

def invariant_state(pair: SchedulePair, w: Weights, s: float) -> np.ndarray:
    """Mixed state carried by the invariant branches at s.

    For antedated schedules the state is frozen from t_a on (diagonal state
    under a diagonal Hamiltonian).
    """
    a = pair.switch_fraction
    if a is not None and s > a:
        s = a
    g = float(pair.gamma(s))
    b = float(pair.beta(s))
    dp = w.difference
    off = 0.5 * dp * math.sin(g) * complex(math.cos(b), math.sin(b))
    return np.array(
        [
            [0.5 * (1.0 + dp * math.cos(g)), off],
            [off.conjugate(), 0.5 * (1.0 - dp * math.cos(g))],
        ],
        dtype=complex,
    )


def adiabatic_state(pair: SchedulePair, w: Weights, s: float) -> np.ndarray:
    """Reference state that adiabatically follows the Hamiltonian eigenbasis.

    Mixing angle theta = arccos(delta / Omega); the Bloch vector stays in
    the xz-plane. Raises DegeneratePoint at a level crossing.
    """
    wave = _waveform(pair)
    a = pair.switch_fraction
    if a is not None and s > a:
        om, dl = 0.0, wave.switch_delta()
    else:
        om, dl = wave.omega(s), wave.delta(s)
    gen = math.hypot(om, dl)
    if gen < 1e-12:
        raise DegeneratePoint(f"level crossing at s = {s:.6g}: mixing angle undefined")
    theta = math.atan2(om, dl)
    dp = w.difference
    return 0.5 * IDENTITY + 0.5 * dp * (math.sin(theta) * SIGMA_X + math.cos(theta) * SIGMA_Z)


def fidelity(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Uhlmann fidelity of two qubit states: tr(rho sigma) + 2 sqrt(det rho det sigma)."""
    overlap = float(np.trace(rho @ sigma).real)
    det_r = max(float(np.linalg.det(rho).real), 0.0)
    det_s = max(float(np.linalg.det(sigma).real), 0.0)
    return min(max(overlap + 2.0 * math.sqrt(det_r * det_s), 0.0), 1.0)


# ---------------------------------------------------------------------------
# numerical integration (independent oracle)

def _legs(pair: SchedulePair, n_steps: int) -> list[tuple[float, float, int]]:
    a = pair.switch_fraction
    if a is None:
        return [(0.0, 1.0, n_steps)]
    n1 = min(max(int(round(n_steps * a)), 1), n_steps - 1)
    return [(0.0, a, n1), (a, 1.0, n_steps - n1)]


def _h_grid(pair: SchedulePair, s_lo: float, s_hi: float, n: int) -> np.ndarray:
    """H * t_f at the 2n+1 half-step grid points of [s_lo, s_hi]."""
    wave = _waveform(pair)
    s = s_lo + (s_hi - s_lo) * np.arange(2 * n + 1) / (2 * n)
    a = pair.switch_fraction
    h = np.zeros((2 * n + 1, 2, 2), dtype=complex)
    if a is not None and s_lo >= a - 1e-15 and s_lo > 0.0:
        d = wave.switch_delta()
        h[:, 0, 0] = 0.5 * d
        h[:, 1, 1] = -0.5 * d
        return h
    om = wave.omega_many(s)
    dl = wave.delta_many(s)
    h[:, 0, 0] = 0.5 * dl
    h[:, 1, 1] = -0.5 * dl
    h[:, 0, 1] = 0.5 * om
    h[:, 1, 0] = 0.5 * om
    return h


def evolve(
    pair: SchedulePair,
    rho0: np.ndarray,
    n_steps: int,
    *,
    target: np.ndarray | None = None,
) -> Trajectory:
    """Fixed-step RK4 integration of i drho/dt = [H(t), rho] over [0, t_f].

    The step grid honors the antedated switch exactly (separate legs before
    and after t_a). Global error is O(n_steps**-4). Raises StepTooCoarse if
    trace or Hermiticity drift exceeds 1e-8.
    """
    if n_steps < 100:
        raise ValueError("need n_steps >= 100")
    rho0 = np.asarray(rho0, dtype=complex)
    check_density_matrix(rho0, herm_tol=1e-9, trace_tol=1e-9)
    if target is None:
        target = SIGMA_X @ rho0 @ SIGMA_X
    times = [0.0]
    states = [rho0]
    rho = rho0
    for s_lo, s_hi, n in _legs(pair, n_steps):
        h_grid = _h_grid(pair, s_lo, s_hi, n)
        step = (s_hi - s_lo) / n
        for k in range(n):
            h0, hm, h1 = h_grid[2 * k], h_grid[2 * k + 1], h_grid[2 * k + 2]
            k1 = -1j * (h0 @ rho - rho @ h0)
            r = rho + 0.5 * step * k1
            k2 = -1j * (hm @ r - r @ hm)
            r = rho + 0.5 * step * k2
            k3 = -1j * (hm @ r - r @ hm)
            r = rho + step * k3
            k4 = -1j * (h1 @ r - r @ h1)
            rho = rho + (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            times.append(s_lo + (k + 1) * step)
            states.append(rho)
    rho_arr = np.array(states)
    trace_drift = np.abs(np.trace(rho_arr, axis1=1, axis2=2) - 1.0).max()
    herm_drift = np.abs(rho_arr - rho_arr.conj().transpose(0, 2, 1)).max()
    if trace_drift > 1e-8 or herm_drift > 1e-8:
        raise StepTooCoarse(
            f"integration drift (trace {trace_drift:.2e}, hermiticity {herm_drift:.2e}) "
            "exceeds 1e-8; increase n_steps"
        )
    bloch = np.stack([bloch_vector(r) for r in rho_arr])
    fid = np.array([fidelity(r, target) for r in rho_arr])
    return Trajectory(
        t=np.array(times) * pair.t_f,
        rho=rho_arr,
        bloch=bloch,
        fidelity_to_target=fid,
        target=target,
    )


def evolve_pure(
    pair: SchedulePair, branch: int, n_steps: int
) -> list[tuple[float, np.ndarray]]:
    """RK4 integration of the Schroedinger equation from an invariant eigenstate.

    Returns (t, state vector) samples. Along the exact dynamics the state
    stays on its invariant branch up to the accumulated phase, which is
    what the phase oracle tests verify.
    """
    if n_steps < 100:
        raise ValueError("need n_steps >= 100")
    psi = invariant_eigenstate(pair, branch, 0.0)
    out = [(0.0, psi)]
    for s_lo, s_hi, n in _legs(pair, n_steps):
        h_grid = _h_grid(pair, s_lo, s_hi, n)
        step = (s_hi - s_lo) / n
        for k in range(n):
            h0, hm, h1 = h_grid[2 * k], h_grid[2 * k + 1], h_grid[2 * k + 2]
            k1 = -1j * (h0 @ psi)
            k2 = -1j * (hm @ (psi + 0.5 * step * k1))
            k3 = -1j * (hm @ (psi + 0.5 * step * k2))
            k4 = -1j * (h1 @ (psi + step * k3))
            psi = psi + (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            out.append(((s_lo + (k + 1) * step) * pair.t_f, psi))
    norm_drift = max(abs(np.linalg.norm(p) - 1.0) for _, p in out)
    if norm_drift > 1e-8:
        raise StepTooCoarse(f"state norm drift {norm_drift:.2e} exceeds 1e-8; increase n_steps")
    return out
