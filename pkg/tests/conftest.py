import numpy as np
import pytest

from phonon_blockade import SystemParams


@pytest.fixture
def fig6_params():
    """Weak drive at the nonreciprocal operating point Delta_F = Delta_L = U/2."""
    return SystemParams(nonlinearity_u=20.0, drive_amp=0.33, drive_detuning=10.0).with_shift(10.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
