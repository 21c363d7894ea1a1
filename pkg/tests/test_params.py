import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from phonon_blockade import params as P
from phonon_blockade.errors import DomainError
from phonon_blockade.params import DriveDirection, SystemParams


def test_nonlinearity_identity_case():
    assert P.nonlinearity_from_spin(1.0, 1.0, 1.0) == 1.0


def test_nonlinearity_hand_value():
    assert P.nonlinearity_from_spin(10.0, 100.0, 100.0) == pytest.approx(0.01, rel=1e-15)


@pytest.mark.parametrize("rabi,delta", [(0.0, 1.0), (1.0, 0.0)])
def test_nonlinearity_rejects_non_dispersive(rabi, delta):
    with pytest.raises(DomainError):
        P.nonlinearity_from_spin(1.0, rabi, delta)


def test_default_spin_parameters_land_in_reported_range():
    gamma = P.linewidth(P.DEFAULT_OMEGA, P.DEFAULT_QUALITY_FACTOR)
    u = P.nonlinearity_from_spin(P.DEFAULT_COUPLING_G, P.DEFAULT_RABI, P.DEFAULT_DETUNING_BIG)
    assert 0 <= u / P.TWO_PI <= 12e3
    assert u / gamma == pytest.approx(20.0, rel=1e-12)
    # dispersive regime: Delta >> g and Omega_s >> g^2/Delta
    assert P.DEFAULT_DETUNING_BIG >= 10 * P.DEFAULT_COUPLING_G
    assert P.DEFAULT_RABI >= 10 * P.DEFAULT_COUPLING_G**2 / P.DEFAULT_DETUNING_BIG


def test_linewidth_reported_value():
    gamma = P.linewidth(P.TWO_PI * 3e9, 1e7)
    assert gamma / P.TWO_PI == pytest.approx(300.0, rel=1e-12)


def test_linewidth_scaling_and_trivial():
    assert P.linewidth(5.0, 20.0) == pytest.approx(P.linewidth(5.0, 2.0) / 10)
    assert P.linewidth(7.5, 7.5) == 1.0


@pytest.mark.parametrize("q", [0.0, -1.0])
def test_linewidth_rejects_nonpositive_q(q):
    with pytest.raises(DomainError):
        P.linewidth(1.0, q)


@pytest.mark.parametrize("direction", list(DriveDirection))
def test_sagnac_zero_without_rotation(direction):
    shift = P.sagnac_shift(SystemParams(direction=direction))
    assert shift == 0.0 and math.copysign(1.0, shift) == 1.0


def test_sagnac_fig6_operating_point():
    p = SystemParams(rotation_omega=250.0 / 3.0, direction="left")
    assert P.sagnac_shift(p) == pytest.approx(10.0, rel=1e-14)
    assert P.sagnac_shift(p.with_direction("right")) == -P.sagnac_shift(p)


def test_with_shift_round_trip():
    p = SystemParams().with_shift(7.0)
    assert abs(P.sagnac_shift(p)) == pytest.approx(7.0)


def test_from_physical_converts_to_gamma_units():
    gamma = P.linewidth(P.DEFAULT_OMEGA, P.DEFAULT_QUALITY_FACTOR)
    p = SystemParams.from_physical(drive_amp=0.33 * gamma, drive_detuning=-2 * gamma)
    assert p.nonlinearity_u == pytest.approx(20.0)
    assert p.drive_amp == pytest.approx(0.33)
    assert p.drive_detuning == pytest.approx(-2.0)
    assert p.to_si()["drive_amp"] == pytest.approx(0.33 * gamma)


@pytest.mark.parametrize("bad", [dict(chirality_mag=0.0), dict(rotation_omega=-1.0), dict(quality_factor=0.0),
                                 dict(drive_amp=math.nan)])
def test_invalid_params_rejected(bad):
    with pytest.raises(DomainError):
        SystemParams(**bad)


def test_direction_parsing():
    assert DriveDirection.parse("LeftPort") is DriveDirection.LEFT
    assert DriveDirection.parse("R") is DriveDirection.RIGHT
    with pytest.raises(DomainError):
        DriveDirection.parse("up")


def test_direction_convention_is_centralized(monkeypatch):
    monkeypatch.setattr(P, "LEFT_PORT_SIGN", -1)
    assert P.sagnac_shift(SystemParams(rotation_omega=10.0, direction="left")) == pytest.approx(-1.2)


rates = st.floats(0.0, 1e3, allow_nan=False)


@given(rates, st.floats(0.01, 1.0))
def test_sagnac_antisymmetry(omega, chi):
    left = SystemParams(rotation_omega=omega, chirality_mag=chi, direction="left")
    assert P.sagnac_shift(left) == -P.sagnac_shift(left.with_direction("right"))
    assert abs(P.sagnac_shift(left)) == pytest.approx(chi * omega)


@given(st.floats(0.1, 1e3), st.floats(0.1, 1e3), st.floats(0.1, 1e3))
def test_nonlinearity_even_in_detuning(g, rabi, delta):
    u = P.nonlinearity_from_spin(g, rabi, delta)
    assert u == P.nonlinearity_from_spin(g, rabi, -delta)
    assert math.isfinite(u) and u >= 0
