"""Master-equation solver for the damped, driven Kerr cavity.

Density matrices are vectorized column-major (``rho.reshape(-1, order="F")``),
so ``vec(A X B) = (B^T kron A) vec(X)`` and the generator reads

    L = -i (I kron H - H^T kron I)
        + gamma/2 (2 conj(a) kron a - I kron a^dag a - (a^dag a)^T kron I).
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import (
    ConvergenceError,
    DomainError,
    PropagationError,
    SolverError,
    StepSizeError,
    TruncationError,
)
from .fock import annihilation, build_hamiltonian, eigenenergy
from .params import SystemParams, sagnac_shift

log = logging.getLogger(__name__)

DEFAULT_START_DIM = 10
DEFAULT_TRUNCATION_TOL = 1e-8
DEFAULT_MAX_DIM = 60
DIM_STEP = 5
TOP_LEVEL_BOUND = 1e-10
RESIDUAL_BOUND = 1e-8
SCALE_FLOOR = 1e-150
RESOLVED_POPULATION = 1e-10


def vec(rho: np.ndarray) -> np.ndarray:
    return np.asarray(rho).reshape(-1, order="F")


def unvec(v: np.ndarray, dim: int) -> np.ndarray:
    return np.asarray(v).reshape(dim, dim, order="F")


def trace_row(dim: int) -> np.ndarray:
    """Row vector t with t @ vec(rho) = tr(rho)."""
    return vec(np.eye(dim))


@dataclass(frozen=True)
class Liouvillian:
    dim: int
    matrix: sp.csr_matrix

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return unvec(self.matrix @ vec(rho), self.dim)

    def residual(self, rho: np.ndarray) -> float:
        """||L rho|| relative to the Frobenius norm of L."""
        return float(np.linalg.norm(self.matrix @ vec(rho)) / spla.norm(self.matrix))

    def triplets(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        coo = self.matrix.tocoo()
        return coo.row, coo.col, coo.data


def assemble_liouvillian(hamiltonian: np.ndarray, gamma: float = 1.0) -> Liouvillian:
    h = np.asarray(hamiltonian, dtype=complex)
    dim = h.shape[0]
    if h.shape != (dim, dim):
        raise DomainError(f"Hamiltonian must be square, got shape {h.shape}")
    scale = max(np.linalg.norm(h), 1.0)
    if np.linalg.norm(h - h.conj().T) > 1e-12 * scale:
        raise DomainError("Hamiltonian is not Hermitian")
    if not gamma > 0:
        raise DomainError(f"gamma must be positive, got {gamma}")
    a = sp.csr_matrix(annihilation(dim))
    num = (a.conj().T @ a).tocsr()
    eye = sp.identity(dim, dtype=complex, format="csr")
    hs = sp.csr_matrix(h)
    coherent = -1j * (sp.kron(eye, hs) - sp.kron(hs.T, eye))
    dissipator = 0.5 * gamma * (2.0 * sp.kron(a.conj(), a) - sp.kron(eye, num) - sp.kron(num.T, eye))
    mat = (coherent + dissipator).tocsr()
    mat.eliminate_zeros()
    return Liouvillian(dim, mat)


def amplitude_scale(params: SystemParams, dim: int, populations: np.ndarray | None = None) -> np.ndarray:
    """Expected size |c_n| of the Fock amplitudes, used to rescale the solve.

    Levels whose population is known above ``RESOLVED_POPULATION`` (relative
    to the largest) take sqrt(P(n)) directly.  Below that the weak-drive
    ratio |c_n / c_{n-1}| = sqrt(n) xi / |E_n - E_0 - i n gamma/2| is chained
    on.  Without populations the chain starts from c_0 = 1.
    """
    shift = sagnac_shift(params)
    resolved = np.zeros(dim, dtype=bool)
    d = np.ones(dim)
    if populations is not None:
        pops = np.abs(np.asarray(populations, dtype=float))
        resolved = pops > RESOLVED_POPULATION * pops.max()
        d = np.sqrt(pops)
    for n in range(1, dim):
        if resolved[n]:
            continue
        e_n = eigenenergy(n, params.drive_detuning, shift, params.nonlinearity_u)
        d[n] = d[n - 1] * math.sqrt(n) * params.drive_amp / abs(e_n - 0.5j * n)
    if not resolved[0] and populations is not None:
        d[0] = max(d[0], SCALE_FLOOR)
    d /= d.max()
    return np.maximum(d, SCALE_FLOOR)


def steady_state(
    liouvillian: Liouvillian,
    scale: np.ndarray | None = None,
    residual_bound: float = RESIDUAL_BOUND,
) -> np.ndarray:
    """Unit-trace null vector of L, from a direct sparse solve.

    The first row of L (the equation for rho_00) is replaced by the trace
    functional, which pins the normalization and removes the null space.

    With ``scale`` = d the solve runs on sigma, where rho = diag(d) sigma
    diag(d), i.e. on the similarity transform (D kron D)^-1 L (D kron D).
    Populations spanning many decades then come out with relative rather
    than absolute accuracy.
    """
    dim = liouvillian.dim
    if scale is None:
        scale = np.ones(dim)
    big_d = np.kron(np.asarray(scale, dtype=float), np.asarray(scale, dtype=float))
    lhs = (sp.diags(1.0 / big_d) @ liouvillian.matrix @ sp.diags(big_d)).tolil()
    lhs[0, :] = trace_row(dim) * big_d
    rhs = np.zeros(dim * dim, dtype=complex)
    rhs[0] = 1.0
    with warnings.catch_warnings():
        warnings.simplefilter("error", spla.MatrixRankWarning)
        try:
            x = spla.spsolve(lhs.tocsc(), rhs)
        except (spla.MatrixRankWarning, RuntimeError) as exc:
            raise SolverError(f"steady-state system is singular: {exc}") from exc
    if not np.all(np.isfinite(x)):
        raise SolverError("steady-state solve produced non-finite entries")
    rho = unvec(big_d * x, dim)
    res = liouvillian.residual(rho)
    if res > residual_bound:
        raise ConvergenceError(f"steady-state residual {res:.3g} exceeds {residual_bound:.1g}")
    return rho


def density_matrix_errors(rho: np.ndarray) -> dict[str, float]:
    """Deviations from a physical state: Hermiticity, trace, negativity."""
    rho = np.asarray(rho)
    norm = max(np.linalg.norm(rho), 1e-300)
    herm = float(np.linalg.norm(rho - rho.conj().T) / norm)
    eigs = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))
    return {
        "hermiticity": herm,
        "trace": float(abs(np.trace(rho) - 1.0)),
        "min_eigenvalue": float(eigs.min()),
    }


def validate_density_matrix(rho: np.ndarray) -> None:
    err = density_matrix_errors(rho)
    if err["hermiticity"] > 1e-10 or err["trace"] > 1e-10 or err["min_eigenvalue"] < -1e-8:
        raise DomainError(f"not a valid density matrix: {err}")


def vacuum(dim: int) -> np.ndarray:
    rho = np.zeros((dim, dim), dtype=complex)
    rho[0, 0] = 1.0
    return rho


def stable_step(liouvillian: Liouvillian) -> float:
    """A step size safely inside the RK4 stability region."""
    return 1.0 / spla.norm(liouvillian.matrix, 1)


def evolve_state(
    liouvillian: Liouvillian,
    rho0: np.ndarray,
    t_final: float,
    dt: float | None = None,
    store_every: int = 1,
    trace_tol: float = 1e-6,
) -> tuple[np.ndarray, np.ndarray]:
    """Propagate rho with fixed-step RK4 on the vectorized equation.

    Returns ``(times, states)``; ``states[k]`` is the density matrix at
    ``times[k]``.  Every ``store_every``-th step is kept, plus the endpoint.
    """
    validate_density_matrix(rho0)
    dim = liouvillian.dim
    mat = liouvillian.matrix
    # spectral radius <= induced 1-norm; RK4 real-axis stability ends near 2.78
    bound = spla.norm(mat, 1)
    if dt is None:
        dt = 1.0 / bound
    if dt <= 0 or dt * bound > 2.5:
        raise StepSizeError(f"dt={dt} unstable for ||L||_1={bound:.3g}")
    n_steps = int(math.ceil(t_final / dt - 1e-9))
    tr = trace_row(dim)
    v = vec(rho0).astype(complex)
    times = [0.0]
    states = [unvec(v, dim).copy()]
    for k in range(1, n_steps + 1):
        k1 = mat @ v
        k2 = mat @ (v + 0.5 * dt * k1)
        k3 = mat @ (v + 0.5 * dt * k2)
        k4 = mat @ (v + dt * k3)
        v = v + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        drift = abs(tr @ v - 1.0)
        if not drift <= trace_tol:
            raise PropagationError(f"trace drifted by {drift:.3g} at t={k * dt:.4g}")
        if k % store_every == 0 or k == n_steps:
            times.append(k * dt)
            states.append(unvec(v, dim).copy())
    return np.array(times), np.array(states)


@dataclass(frozen=True)
class PointSolution:
    params: SystemParams
    dim: int
    rho: np.ndarray
    residual: float


def solve_point(params: SystemParams, dim: int) -> PointSolution:
    """Steady state at a fixed truncation."""
    liou = assemble_liouvillian(build_hamiltonian(params, dim), 1.0)
    rho = steady_state(liou)
    residual = liou.residual(rho)
    # second pass on the rescaled system resolves populations far below machine epsilon
    scale = amplitude_scale(params, dim, np.real(np.diag(rho)))
    try:
        scaled = steady_state(liou, scale)
    except SolverError as exc:
        log.debug("rescaled solve rejected at dim %d: %s", dim, exc)
        return PointSolution(params, dim, rho, residual)
    scaled_residual = liou.residual(scaled)
    if scaled_residual > max(residual, RESIDUAL_BOUND * 1e-3):
        return PointSolution(params, dim, rho, residual)
    return PointSolution(params, dim, scaled, scaled_residual)


def _mean_n(rho: np.ndarray) -> float:
    pops = np.real(np.diag(rho))
    return float(np.dot(np.arange(len(pops)), pops))


def solve_converged(
    params: SystemParams,
    start_dim: int = DEFAULT_START_DIM,
    tol: float = DEFAULT_TRUNCATION_TOL,
    max_dim: int = DEFAULT_MAX_DIM,
) -> PointSolution:
    """Steady state at the smallest probed truncation that passes the convergence test.

    Probes dim = start, start+5, ...; dim is accepted when <n> moves by at
    most ``tol`` (relative) going to dim+5 and the top level holds less than
    1e-10 of the population.
    """
    if start_dim < 5:
        raise DomainError(f"start_dim must be >= 5, got {start_dim}")
    dim = start_dim
    current = solve_point(params, dim)
    while dim <= max_dim:
        bigger = solve_point(params, dim + DIM_STEP)
        n_now, n_next = _mean_n(current.rho), _mean_n(bigger.rho)
        top = float(np.real(current.rho[-1, -1]))
        if abs(n_now - n_next) <= tol * max(n_now, 1e-12) and top < TOP_LEVEL_BOUND:
            return current
        log.debug("dim %d not converged: <n>=%g vs %g, P(top)=%g", dim, n_now, n_next, top)
        dim += DIM_STEP
        current = bigger
    raise TruncationError(f"truncation did not converge below dim {max_dim}")


def converged_dimension(
    params: SystemParams,
    start_dim: int = DEFAULT_START_DIM,
    tol: float = DEFAULT_TRUNCATION_TOL,
    max_dim: int = DEFAULT_MAX_DIM,
) -> int:
    return solve_converged(params, start_dim, tol, max_dim).dim
