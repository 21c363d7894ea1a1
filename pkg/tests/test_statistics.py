import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phonon_blockade.errors import UndefinedCorrelationError
from phonon_blockade.lindblad import solve_converged, solve_point
from phonon_blockade.params import SystemParams
from phonon_blockade.statistics import (
    PhononStats,
    Verdict,
    classify,
    correlation_by_trace,
    factorial_moment,
    nonreciprocity_ratio,
    poisson_deviation,
    poisson_distribution,
    stats_from_state,
)


def fock_state(n, dim):
    rho = np.zeros((dim, dim), dtype=complex)
    rho[n, n] = 1
    return rho


def coherent_state(alpha, dim):
    n = np.arange(dim)
    amps = np.exp(-abs(alpha) ** 2 / 2) * alpha**n / np.sqrt([float(math.factorial(k)) for k in n])
    return np.outer(amps, amps.conj())


def stats_at(**kw):
    return stats_from_state(solve_converged(SystemParams(**kw)).rho)


def test_coherent_state_is_poissonian():
    stats = stats_from_state(coherent_state(0.8 + 0.3j, 40))
    for mu in (2, 3, 4):
        assert stats.g[mu] == pytest.approx(1.0, abs=1e-12)


def test_linear_cavity_steady_state_is_coherent():
    stats = stats_at(nonlinearity_u=0.0, drive_amp=0.7, drive_detuning=1.0)
    for mu in (2, 3, 4):
        assert stats.g[mu] == pytest.approx(1.0, abs=1e-8)


def test_single_phonon_state_is_antibunched():
    stats = stats_from_state(fock_state(1, 5))
    assert stats.g[2] == 0.0 and stats.mean_n == 1.0


def test_weak_drive_minimum():
    assert stats_at(nonlinearity_u=20.0, drive_amp=0.01).g[2] == pytest.approx(6.25e-4, rel=0.05)


def test_vacuum_correlation_undefined():
    with pytest.raises(UndefinedCorrelationError):
        stats_from_state(fock_state(0, 4))


def test_factorial_moment_by_hand():
    pops = np.array([0.1, 0.2, 0.3, 0.4])
    # <a^dag^2 a^2> = 2*0.3 + 6*0.4
    assert factorial_moment(pops, 2) == pytest.approx(3.0)
    assert factorial_moment(pops, 5) == 0.0


def random_state(seed, dim):
    r = np.random.default_rng(seed)
    m = r.normal(size=(dim, dim)) + 1j * r.normal(size=(dim, dim))
    # geometric damping keeps high-order moments finite-looking
    m = m * (0.5 ** np.arange(dim))[:, None]
    rho = m @ m.conj().T
    return rho / np.trace(rho)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31), st.integers(3, 25))
def test_factorial_sum_matches_trace_path(seed, dim):
    rho = random_state(seed, dim)
    stats = stats_from_state(rho)
    for mu in (2, 3, 4):
        assert stats.g[mu] == pytest.approx(correlation_by_trace(rho, mu), rel=1e-10, abs=1e-300)


def test_poisson_deviation_zero_for_poisson():
    pops = poisson_distribution(0.7, 30)
    np.testing.assert_allclose(poisson_deviation(pops, 0.7), 0, atol=1e-12)


def test_poisson_deviation_underflow_is_nan():
    dev = poisson_deviation(np.full(400, 1e-3), 1e-3)
    assert np.isnan(dev[-1]) and np.isfinite(dev[0])


def test_poisson_deviation_vacuum_undefined():
    with pytest.raises(UndefinedCorrelationError):
        poisson_deviation(np.array([1.0, 0.0]), 0.0)


def test_one_pb_operating_point():
    stats = stats_at(nonlinearity_u=20.0, drive_amp=0.33, drive_detuning=0.0)
    cls = classify(stats)
    assert cls.verdict is Verdict.ONE_PB
    dev = cls.poisson_deviation
    assert dev[1] > 0 and dev[2] < 0 and dev[3] < 0


def test_pit_operating_point():
    stats = stats_at(nonlinearity_u=20.0, drive_amp=0.33, drive_detuning=20.0)
    cls = classify(stats)
    assert cls.verdict is Verdict.PIT
    assert stats.g[2] > stats.g[3] > stats.g[4] > 1
    assert cls.ordering == (2, 3, 4)


def test_two_pb_operating_point():
    stats = stats_at(nonlinearity_u=20.0, drive_amp=3.0, drive_detuning=20.0)
    cls = classify(stats)
    assert cls.verdict is Verdict.TWO_PB
    assert stats.g[3] < cls.f and stats.g[2] >= cls.f_n[2]
    dev = cls.poisson_deviation
    assert dev[2] > 0 and dev[3] < 0 and dev[4] < 0


def test_classification_boundary_tie_goes_to_blockade():
    m = 0.2
    f = math.exp(-m)
    g3 = 0.5 * f
    stats = PhononStats(m, np.array([1 - m, m]), {2: f + m * g3, 3: g3, 4: 0.0})
    assert classify(stats).verdict is Verdict.TWO_PB


def test_strict_inequality_on_higher_order():
    m = 0.2
    f = math.exp(-m)
    stats = PhononStats(m, np.array([1 - m, m]), {2: f, 3: 2.0, 4: 3.0})
    assert classify(stats).verdict is Verdict.UNCLASSIFIED


def test_verdicts_mutually_exclusive():
    # g^(n+1) < f <= 1 contradicts every g^(mu) > 1
    for m in (1e-4, 0.05, 0.5, 2.0):
        stats = PhononStats(m, np.array([1.0]), {2: 2.0, 3: 3.0, 4: 4.0})
        assert classify(stats).verdict is Verdict.PIT


@pytest.mark.parametrize("point,n", [
    (dict(drive_amp=0.33, drive_detuning=0.0), 1),
    (dict(drive_amp=3.0, drive_detuning=20.0), 2),
    (dict(drive_amp=3.0, drive_detuning=10.0, rotation_omega=250 / 3, direction="left"), 1),
    (dict(drive_amp=3.0, drive_detuning=10.0, rotation_omega=250 / 3, direction="right"), 2),
    (dict(drive_amp=3.0, drive_detuning=30.0, rotation_omega=250 / 3, direction="left"), 2),
])
def test_blockade_verdicts_agree_with_poisson_criterion(point, n):
    cls = classify(stats_at(nonlinearity_u=20.0, **point))
    assert cls.verdict.blockade_order == n
    dev = cls.poisson_deviation
    assert dev[n] >= 0
    assert all(dev[m] < 0 for m in range(n + 1, 5))


def test_pit_thresholds_agree_at_low_occupation():
    checked = 0
    flagged = []
    for dl in np.linspace(-40, 80, 49):
        stats = stats_at(nonlinearity_u=20.0, drive_amp=0.33, drive_detuning=dl)
        if stats.mean_n >= 0.1:
            continue
        checked += 1
        cls = classify(stats)
        simple = all(stats.g[mu] > 1 for mu in (2, 3, 4))
        if cls.pit_full != simple:
            # only possible when some g lies between exp(-<n>) and 1
            assert any(cls.f < stats.g[mu] <= 1 for mu in (2, 3, 4))
            flagged.append(dl)
    assert checked > 30
    assert len(flagged) <= 2, flagged


def test_verdict_stable_under_enlargement():
    p = SystemParams(nonlinearity_u=20.0, drive_amp=3.0, drive_detuning=20.0)
    sol = solve_converged(p)
    a = classify(stats_from_state(sol.rho)).verdict
    b = classify(stats_from_state(solve_point(p, sol.dim + 5).rho)).verdict
    assert a is b


def test_nonreciprocity_ratio(fig6_params):
    left = stats_from_state(solve_converged(fig6_params.with_direction("left")).rho)
    right = stats_from_state(solve_converged(fig6_params.with_direction("right")).rho)
    ratio = nonreciprocity_ratio(left, right)
    assert ratio >= 1e5
    assert nonreciprocity_ratio(right, left) == pytest.approx(1 / ratio, rel=1e-15)


def test_reciprocal_limit_ratio_is_one():
    p = SystemParams(nonlinearity_u=20.0, drive_amp=0.33, drive_detuning=10.0)
    left = stats_from_state(solve_converged(p.with_direction("left")).rho)
    right = stats_from_state(solve_converged(p.with_direction("right")).rho)
    assert nonreciprocity_ratio(left, right) == 1.0


def test_ratio_zero_denominator():
    zero = PhononStats(1.0, np.array([0, 1.0]), {2: 0.0})
    with pytest.raises(UndefinedCorrelationError):
        nonreciprocity_ratio(zero, zero)
