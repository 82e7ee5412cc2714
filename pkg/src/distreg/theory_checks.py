"""Monte Carlo and exact-arithmetic checks of the nearest-member theory.

Covers: the m^(-1/d) scaling of the expected distance from a fixed member
to the nearest of m drawn members, the constant-(2/(e-2)+1) upper bound on
that expectation, the small-ball lower bound mass(B(s, 2^-i)) >= 2^(-id),
the dyadic-sum upper bound on the expectation, and the telescoping identity
behind it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Sequence

import numpy as np

from .meta_world import DistributionHandle, MetaDistribution, ball_mass, draw_thetas, sup_distances

__all__ = [
    "ScalingReport",
    "SmallBallReport",
    "Lemma1Result",
    "expected_min_distance",
    "scaling_report",
    "fit_scaling_exponent",
    "theorem1_rhs_bound",
    "check_small_ball_bound",
    "lemma1_rhs",
    "lemma1_sums",
    "dyadic_weights",
    "dyadic_expectation_check",
    "telescoping_sums",
]

# Trial blocks are capped so scratch arrays stay around ~100 MB.
_CHUNK_ELEMENTS = 8_000_000


@dataclass(frozen=True)
class ScalingReport:
    """Mean nearest-member distance per m, with the fitted log-log slope."""

    m_values: tuple[int, ...]
    means: tuple[float, ...]
    stderrs: tuple[float, ...]
    slope: float
    d: float

    def __post_init__(self):
        if not (len(self.m_values) == len(self.means) == len(self.stderrs)) or len(self.means) < 2:
            raise ValueError("report needs equal-length sequences of length >= 2")
        if any(s < 0 for s in self.stderrs):
            raise ValueError("stderrs must be nonnegative")


@dataclass(frozen=True)
class SmallBallReport:
    """Empirical vs guaranteed mass of shrinking dyadic balls around s."""

    radii: tuple[float, ...]
    empirical_mass: tuple[float, ...]
    bound: tuple[float, ...]
    exact_mass: tuple[float, ...]
    stderr: tuple[float, ...]
    holds: tuple[bool, ...]


class Lemma1Result(NamedTuple):
    lhs: float
    rhs: float
    stderr: float
    holds: bool


def _min_distances(
    meta: MetaDistribution,
    s: DistributionHandle,
    m: int,
    trials: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Per-trial distance from s to the nearest of m freshly drawn members."""
    out = np.empty(trials)
    block = max(1, _CHUNK_ELEMENTS // max(1, m * meta.dim))
    done = 0
    while done < trials:
        take = min(block, trials - done)
        thetas = draw_thetas(meta, (take, m), rng)
        out[done : done + take] = sup_distances(meta, thetas, s).min(axis=1)
        done += take
    return out


def expected_min_distance(
    meta: MetaDistribution,
    s: DistributionHandle,
    m: int,
    trials: int,
    rng: np.random.Generator,
) -> tuple[float, float]:
    """Monte Carlo mean and stderr of the distance from s to the nearest of m draws."""
    if m < 1 or trials < 1:
        raise ValueError("m and trials must be >= 1")
    dists = _min_distances(meta, s, m, trials, rng)
    mean = float(dists.mean())
    stderr = float(dists.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    return mean, stderr


def fit_scaling_exponent(m_values: Sequence[int], means: Sequence[float]) -> float:
    """Least-squares slope of log(mean) against log(m)."""
    m_values = np.asarray(m_values, dtype=float)
    means = np.asarray(means, dtype=float)
    if len(m_values) != len(means) or len(means) < 2:
        raise ValueError("need equal-length sequences of length >= 2")
    if np.any(means <= 0):
        raise ValueError("means must be positive for a log-log fit")
    return float(np.polyfit(np.log(m_values), np.log(means), 1)[0])


def scaling_report(
    meta: MetaDistribution,
    s: DistributionHandle,
    m_values: Sequence[int],
    trials: int,
    rng: np.random.Generator,
) -> ScalingReport:
    means, stderrs = [], []
    for m in m_values:
        mean, stderr = expected_min_distance(meta, s, m, trials, rng)
        means.append(mean)
        stderrs.append(stderr)
    return ScalingReport(
        m_values=tuple(int(m) for m in m_values),
        means=tuple(means),
        stderrs=tuple(stderrs),
        slope=fit_scaling_exponent(m_values, means),
        d=float(meta.dim),
    )


def theorem1_rhs_bound(d: float, m: int) -> float:
    """Upper bound (2/(e-2) + 1) * m^(-1/d) on the expected nearest-draw distance."""
    if d < 1:
        raise ValueError("d must be >= 1")
    if m < 1:
        raise ValueError("m must be >= 1")
    return (2.0 / (math.e - 2.0) + 1.0) * m ** (-1.0 / d)


def check_small_ball_bound(
    meta: MetaDistribution,
    s: DistributionHandle,
    i_max: int,
    trials: int,
    rng: np.random.Generator,
) -> SmallBallReport:
    """Empirical mass of B(s, 2^-i) for i = 0..i_max vs the 2^(-id) guarantee.

    holds[i] allows a 3-sigma binomial band around the exact mass, which the
    box geometry provides in closed form.
    """
    if i_max < 1 or trials < 1:
        raise ValueError("i_max and trials must be >= 1")
    d = meta.dim
    dists = sup_distances(meta, draw_thetas(meta, trials, rng), s)
    radii, empirical, bound, exact, stderr, holds = [], [], [], [], [], []
    for i in range(i_max + 1):
        r = 2.0**-i
        p_emp = float(np.mean(dists <= r))
        p_exact = ball_mass(meta, s, r)
        sig = math.sqrt(p_exact * (1.0 - p_exact) / trials)
        b = 2.0 ** (-i * d)
        radii.append(r)
        empirical.append(p_emp)
        bound.append(b)
        exact.append(p_exact)
        stderr.append(sig)
        holds.append(p_emp >= b - 3.0 * sig)
    return SmallBallReport(
        radii=tuple(radii),
        empirical_mass=tuple(empirical),
        bound=tuple(bound),
        exact_mass=tuple(exact),
        stderr=tuple(stderr),
        holds=tuple(holds),
    )


def lemma1_rhs(d: float, m: int, i_max: int) -> float:
    """Sum of 2^-i * ((1 - 2^(-(i+1)d))^m - (1 - 2^(-id))^m) for i = 0..i_max."""
    if d < 1:
        raise ValueError("d must be >= 1")
    total = 0.0
    for i in range(i_max + 1):
        inner = (1.0 - 2.0 ** (-(i + 1) * d)) ** m - (1.0 - 2.0 ** (-i * d)) ** m
        total += 2.0**-i * inner
    return total


def dyadic_weights(t: np.ndarray, i_max: int | None = None) -> np.ndarray:
    """Map each t in [0, 1] to 2^-i where t lies in (2^-(i+1), 2^-i]; zero at t = 0.

    frexp gives the bucket exactly, including right endpoints and subnormal
    inputs, so weight >= t holds without floating slop.  Buckets past i_max
    (when given) get weight zero, matching a truncated dyadic sum.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < 0) or np.any(t > 1):
        raise ValueError("samples must lie in [0, 1]")
    mant, expo = np.frexp(t)
    idx = np.where(mant == 0.5, 1 - expo, -expo)
    weights = np.ldexp(1.0, -idx)
    weights = np.where(t == 0.0, 0.0, weights)
    if i_max is not None:
        weights = np.where(idx > i_max, 0.0, weights)
    return weights


def lemma1_sums(
    d: float,
    m: int,
    i_max: int,
    trials: int,
    meta: MetaDistribution,
    s: DistributionHandle,
    rng: np.random.Generator,
) -> Lemma1Result:
    """Monte Carlo dyadic sum of nearest-draw distances vs its exact upper bound.

    lhs averages the dyadic bucket weight of each trial's min distance; rhs
    is the closed-form dominating sum.  holds allows 3 sigma of Monte Carlo
    noise on the lhs.  The caller should pick i_max with 2^-i_max below the
    tolerance it cares about (the truncated tail is that small).
    """
    if m < 1 or trials < 1:
        raise ValueError("m and trials must be >= 1")
    if d < meta.dim:
        raise ValueError("d must be at least the meta-distribution's dimension")
    dists = _min_distances(meta, s, m, trials, rng)
    weights = dyadic_weights(np.clip(dists, 0.0, 1.0), i_max=i_max)
    lhs = float(weights.mean())
    stderr = float(weights.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    rhs = lemma1_rhs(d, m, i_max)
    return Lemma1Result(lhs=lhs, rhs=rhs, stderr=stderr, holds=lhs <= rhs + 3.0 * stderr)


def dyadic_expectation_check(samples: Sequence[float]) -> tuple[float, float]:
    """Sample mean alongside the dyadic-bucket weighted sum that dominates it.

    For samples in [0, 1]: mean <= dyadic_sum <= 2 * mean, since each t in
    bucket i satisfies 2^-(i+1) < t <= 2^-i (zeros carry weight zero).
    """
    t = np.asarray(samples, dtype=float)
    weights = dyadic_weights(t)
    return float(t.mean()), float(weights.mean())


def telescoping_sums(d: int, m: int, i: int) -> tuple[Fraction, Fraction]:
    """Partial telescoping sum and its closed form, in exact rationals.

    Returns (sum over j=1..i of ((1 - 2^(-jd))^m - (1 - 2^(-(j-1)d))^m),
    (1 - 2^(-id))^m); the two are equal exactly.
    """
    if d < 1 or m < 1 or i < 1:
        raise ValueError("d, m, i must be >= 1")
    if d != int(d):
        raise ValueError("exact telescoping check requires integer d")
    d = int(d)

    def term(j: int) -> Fraction:
        return (1 - Fraction(1, 2 ** (j * d))) ** m

    partial = sum((term(j) - term(j - 1) for j in range(1, i + 1)), Fraction(0))
    return partial, term(i)
