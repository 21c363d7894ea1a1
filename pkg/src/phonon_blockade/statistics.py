"""Phonon-number statistics and blockade / tunneling classification."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from .errors import UndefinedCorrelationError
from .fock import annihilation

MAX_ORDER = 5
MEAN_N_FLOOR = 1e-14
POISSON_FLOOR = 1e-300


@dataclass(frozen=True)
class PhononStats:
    mean_n: float
    populations: np.ndarray
    g: dict[int, float] = field(default_factory=dict)

    def population(self, n: int) -> float:
        return float(self.populations[n]) if n < len(self.populations) else 0.0


class Verdict(enum.Enum):
    ONE_PB = "OnePB"
    TWO_PB = "TwoPB"
    THREE_PB = "ThreePB"
    FOUR_PB = "FourPB"
    PIT = "PIT"
    UNCLASSIFIED = "Unclassified"

    @classmethod
    def blockade(cls, n: int) -> "Verdict":
        return (cls.ONE_PB, cls.TWO_PB, cls.THREE_PB, cls.FOUR_PB)[n - 1]

    @property
    def blockade_order(self) -> int | None:
        order = {Verdict.ONE_PB: 1, Verdict.TWO_PB: 2, Verdict.THREE_PB: 3, Verdict.FOUR_PB: 4}
        return order.get(self)


@dataclass(frozen=True)
class Classification:
    """Verdict plus every threshold that went into it.

    ``f`` is exp(-<n>), ``f_n[n]`` is exp(-<n>) + <n> g^(n+1), and
    ``ordering`` lists the orders 2..4 by decreasing g^(mu).
    ``pit_full`` is the PIT test with the exp(-<n>) threshold instead of 1.
    """

    verdict: Verdict
    f: float
    f_n: dict[int, float]
    g: dict[int, float]
    poisson_deviation: np.ndarray
    ordering: tuple[int, ...]
    pit_full: bool


def factorial_moment(populations: np.ndarray, mu: int) -> float:
    """<a^dag^mu a^mu> = sum_n n!/(n-mu)! P(n)."""
    n = np.arange(len(populations))
    mask = n >= mu
    if not mask.any():
        return 0.0
    falling = np.exp(gammaln(n[mask] + 1) - gammaln(n[mask] - mu + 1))
    return float(np.dot(falling, populations[mask]))


def stats_from_state(rho: np.ndarray, max_order: int = MAX_ORDER) -> PhononStats:
    pops = np.real(np.diag(np.asarray(rho))).copy()
    mean_n = float(np.dot(np.arange(len(pops)), pops))
    if mean_n < MEAN_N_FLOOR:
        raise UndefinedCorrelationError(f"<n> = {mean_n:.3g}: correlations undefined for the vacuum")
    g = {mu: factorial_moment(pops, mu) / mean_n**mu for mu in range(1, max_order + 1)}
    return PhononStats(mean_n, pops, g)


def correlation_by_trace(rho: np.ndarray, mu: int) -> float:
    """tr(rho a^dag^mu a^mu) / tr(rho a^dag a)^mu via explicit operator products."""
    rho = np.asarray(rho)
    a = annihilation(rho.shape[0])
    ad = a.conj().T
    a_mu = np.linalg.matrix_power(a, mu)
    num = np.trace(rho @ np.linalg.matrix_power(ad, mu) @ a_mu).real
    mean_n = np.trace(rho @ ad @ a).real
    return float(num / mean_n**mu)


def poisson_distribution(mean_n: float, n_max: int) -> np.ndarray:
    n = np.arange(n_max)
    if mean_n == 0:
        return (n == 0).astype(float)
    return np.exp(n * math.log(mean_n) - mean_n - gammaln(n + 1))


def poisson_deviation(populations: np.ndarray, mean_n: float) -> np.ndarray:
    """Relative deviation (P(n) - Pois(n)) / Pois(n); NaN where Pois(n) underflows."""
    if not mean_n > 0:
        raise UndefinedCorrelationError("Poisson deviation undefined for <n> = 0")
    pops = np.asarray(populations, dtype=float)
    ref = poisson_distribution(mean_n, len(pops))
    out = np.full(len(pops), np.nan)
    ok = ref > POISSON_FLOOR
    out[ok] = (pops[ok] - ref[ok]) / ref[ok]
    return out


def classify(stats: PhononStats, max_n: int = 4) -> Classification:
    """nPB for the smallest n whose two inequalities hold, else PIT, else Unclassified.

    nPB: g^(n+1) < exp(-<n>)  and  g^(n) >= exp(-<n>) + <n> g^(n+1).
    PIT: g^(mu) > 1 for mu = 2..4.
    Orders above those present in ``stats.g`` are skipped.
    """
    m = stats.mean_n
    g = dict(stats.g)
    g.setdefault(1, 1.0)
    f = math.exp(-m)
    f_n = {n: f + m * g[n + 1] for n in range(1, max_n + 1) if n + 1 in g}
    verdict = None
    for n in sorted(f_n):
        if g[n + 1] < f and g[n] >= f_n[n]:
            verdict = Verdict.blockade(n)
            break
    orders = [mu for mu in (2, 3, 4) if mu in g]
    pit = bool(orders) and all(g[mu] > 1.0 for mu in orders)
    pit_full = bool(orders) and all(g[mu] > f for mu in orders)
    if verdict is None:
        verdict = Verdict.PIT if pit else Verdict.UNCLASSIFIED
    ordering = tuple(sorted(orders, key=lambda mu: -g[mu]))
    return Classification(
        verdict=verdict,
        f=f,
        f_n=f_n,
        g=g,
        poisson_deviation=poisson_deviation(stats.populations, m),
        ordering=ordering,
        pit_full=pit_full,
    )


def nonreciprocity_ratio(stats_left: PhononStats, stats_right: PhononStats, mu: int = 2) -> float:
    """g^(mu) for a right-port drive over g^(mu) for a left-port drive."""
    denom = stats_left.g[mu]
    if denom == 0:
        raise UndefinedCorrelationError(f"g^({mu}) vanishes for the left-port drive")
    return stats_right.g[mu] / denom
