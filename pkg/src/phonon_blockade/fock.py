"""Truncated Fock-space operators and the rotating-frame Kerr Hamiltonian."""

from __future__ import annotations

import numpy as np

from .errors import DomainError
from .params import SystemParams, sagnac_shift


def annihilation(dim: int) -> np.ndarray:
    """Lowering operator on states |0>..|dim-1>, a|n> = sqrt(n)|n-1>."""
    if dim < 2:
        raise DomainError(f"Fock dimension must be >= 2, got {dim}")
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1).astype(complex)


def creation(dim: int) -> np.ndarray:
    return annihilation(dim).conj().T


def number_operator(dim: int) -> np.ndarray:
    if dim < 2:
        raise DomainError(f"Fock dimension must be >= 2, got {dim}")
    return np.diag(np.arange(dim, dtype=float)).astype(complex)


def eigenenergy(n: int, drive_detuning: float, sagnac: float, nonlinearity_u: float) -> float:
    """Bare energy of |n> in the drive frame: -n*Delta_L + n*Delta_F + (n^2 - n)*U."""
    if n < 0:
        raise DomainError(f"phonon number must be >= 0, got {n}")
    return -n * drive_detuning + n * sagnac + (n * n - n) * nonlinearity_u


def build_hamiltonian(params: SystemParams, dim: int) -> np.ndarray:
    """Rotating-frame Hamiltonian in gamma units (hbar = 1).

    H = (-Delta_L + Delta_F) a^dag a + U a^dag a^dag a a + xi (a^dag + a)
    """
    if dim < 2:
        raise DomainError(f"Fock dimension must be >= 2, got {dim}")
    shift = sagnac_shift(params)
    n = np.arange(dim)
    diag = np.array([eigenenergy(int(k), params.drive_detuning, shift, params.nonlinearity_u) for k in n])
    ham = np.diag(diag).astype(complex)
    off = params.drive_amp * np.sqrt(np.arange(1, dim, dtype=float))
    ham[np.arange(dim - 1), np.arange(1, dim)] = off
    ham[np.arange(1, dim), np.arange(dim - 1)] = off
    return ham
