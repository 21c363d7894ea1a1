"""Weak-drive model truncated at two phonons.

Provides the closed-form steady amplitudes, a direct integration of the
three amplitude equations, and the closed-form g2/g3 used as an
independent check on the master-equation solver.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import StepSizeError
from .fock import eigenenergy
from .params import SystemParams, sagnac_shift

# linewidth in the model's own units
GAMMA = 1.0


@dataclass(frozen=True)
class Amplitudes:
    c0: complex
    c1: complex
    c2: complex

    @property
    def populations(self) -> np.ndarray:
        return np.abs(np.array([self.c0, self.c1, self.c2])) ** 2

    def as_array(self) -> np.ndarray:
        return np.array([self.c0, self.c1, self.c2], dtype=complex)


def _energies(params: SystemParams) -> tuple[float, float, float]:
    shift = sagnac_shift(params)
    return tuple(eigenenergy(n, params.drive_detuning, shift, params.nonlinearity_u) for n in range(3))


def steady_amplitudes(params: SystemParams, normalized: bool = False) -> Amplitudes:
    """Long-time amplitudes of the weak-drive model with c0 = 1.

    With ``normalized=True`` the three amplitudes are rescaled to unit norm.
    """
    xi = params.drive_amp
    if xi > 0.5 * GAMMA:
        warnings.warn(f"drive {xi} gamma is outside the weak-drive regime", stacklevel=2)
    e0, e1, e2 = _energies(params)
    c1 = -xi / (e1 - e0 - 0.5j * GAMMA)
    c2 = -math.sqrt(2.0) * xi * c1 / (e2 - e0 - 1j * GAMMA)
    amps = np.array([1.0 + 0j, c1, c2])
    if normalized:
        amps = amps / np.linalg.norm(amps)
    return Amplitudes(*(complex(c) for c in amps))


def g2_from_amplitudes(amps: Amplitudes) -> float:
    """2 P2 / (P1 + 2 P2)^2 with P_n = |C_n|^2."""
    _, p1, p2 = amps.populations
    return float(2.0 * p2 / (p1 + 2.0 * p2) ** 2)


def _lorentz(x: float) -> float:
    return x * x + 0.25 * GAMMA * GAMMA


def g2_analytic(params: SystemParams) -> float:
    delta = params.detuning_diff
    return _lorentz(delta) / _lorentz(delta + params.nonlinearity_u)


def g3_analytic(params: SystemParams) -> float:
    delta = params.detuning_diff
    u = params.nonlinearity_u
    return _lorentz(delta) ** 2 / (_lorentz(delta + u) * _lorentz(delta + 2.0 * u))


def max_stable_step(params: SystemParams) -> float:
    return 0.1 / max(GAMMA, abs(params.detuning_diff), params.nonlinearity_u)


def amplitude_generator(params: SystemParams, drive: bool = True) -> np.ndarray:
    """Matrix M with dC/dt = M C for (C0, C1, C2)."""
    e0, e1, e2 = _energies(params)
    xi = params.drive_amp if drive else 0.0
    r2 = math.sqrt(2.0)
    return -1j * np.array(
        [
            [e0, xi, 0.0],
            [xi, e1 - 0.5j * GAMMA, r2 * xi],
            [0.0, r2 * xi, e2 - 1j * GAMMA],
        ],
        dtype=complex,
    )


def evolve_amplitudes(
    params: SystemParams,
    t_final: float,
    dt: float,
    drive_off: float | None = None,
    initial: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Integrate the amplitude equations with fixed-step RK4.

    Starts from the vacuum unless ``initial`` is given.  If ``drive_off`` is
    set, the drive is switched off from that time on.  Returns ``(times,
    amplitudes)`` with one row per step.
    """
    if dt <= 0 or dt >= max_stable_step(params):
        raise StepSizeError(f"dt={dt} must lie in (0, {max_stable_step(params):.3g})")
    n_steps = int(math.ceil(t_final / dt - 1e-9))
    times = np.arange(n_steps + 1) * dt
    out = np.empty((n_steps + 1, 3), dtype=complex)
    out[0] = np.array([1.0, 0.0, 0.0]) if initial is None else np.asarray(initial, dtype=complex)
    m_on = amplitude_generator(params, drive=True)
    m_off = amplitude_generator(params, drive=False)
    c = out[0].copy()
    for k in range(n_steps):
        m = m_off if drive_off is not None and times[k] >= drive_off else m_on
        k1 = m @ c
        k2 = m @ (c + 0.5 * dt * k1)
        k3 = m @ (c + 0.5 * dt * k2)
        k4 = m @ (c + dt * k3)
        c = c + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        out[k + 1] = c
    return times, out
