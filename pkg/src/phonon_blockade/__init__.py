"""Steady-state phonon statistics of a driven Kerr ring cavity with a Sagnac shift."""

from .analytic import Amplitudes, evolve_amplitudes, g2_analytic, g3_analytic, steady_amplitudes
from .errors import (
    BlockadeError,
    ConvergenceError,
    DomainError,
    PropagationError,
    SolverError,
    SpecError,
    StepSizeError,
    TruncationError,
    UndefinedCorrelationError,
)
from .fock import annihilation, build_hamiltonian, eigenenergy
from .lindblad import (
    Liouvillian,
    assemble_liouvillian,
    converged_dimension,
    evolve_state,
    solve_converged,
    steady_state,
)
from .params import DriveDirection, SystemParams, linewidth, nonlinearity_from_spin, sagnac_shift
from .statistics import (
    Classification,
    PhononStats,
    Verdict,
    classify,
    nonreciprocity_ratio,
    poisson_deviation,
    stats_from_state,
)
from .sweep import Directions, SweepAxis, SweepSpec, figure_recipe, run_sweep, solve_params

__version__ = "0.1.0"
