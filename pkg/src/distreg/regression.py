"""Regression over sampled distributions.

Two estimators:

  - kernel_kernel_estimate: the static two-stage baseline.  Every training
    distribution is represented by a density estimate; the prediction is a
    kernel-weighted average of training labels, weighted by the L1 distance
    from each training estimate to the query estimate.

  - adaptive_closest_point: draws fresh candidate distributions until one's
    estimated density lands within epsilon/(3L) of the target's, then asks
    the oracle for that candidate's label.  A max_iter guard returns the
    closest candidate seen so far when the threshold is never met.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from .density_distance import (
    GridSpec,
    _l1_from_values,
    default_points_per_axis,
    grid_values,
    l1_distance,
)
from .kernels import (
    EPANECHNIKOV,
    DensityEstimate,
    KernelSpec,
    kde_build,
    kernel_value,
    select_bandwidth,
)
from .meta_world import (
    DistributionHandle,
    MetaDistribution,
    draw_distribution,
    draw_samples,
    oracle_label,
)

__all__ = [
    "LabeledEstimate",
    "AdaptiveResult",
    "CalibrationResult",
    "UnreachableTargetError",
    "kernel_kernel_estimate",
    "adaptive_closest_point",
    "calibrate_sample_size",
    "default_max_iter",
    "family_grid",
    "draw_labeled_dataset",
]

CALIBRATION_N_MIN = 2**4
CALIBRATION_N_MAX = 2**16


class UnreachableTargetError(ValueError):
    """Calibration target below what the quadrature grid can resolve."""


@dataclass(frozen=True)
class LabeledEstimate:
    """A training pair: estimated distribution plus its oracle label."""

    estimate: DensityEstimate
    label: float
    handle: DistributionHandle | None = None


@dataclass(frozen=True)
class AdaptiveResult:
    """Outcome of the adaptive closest-point loop."""

    label: float
    iterations: int
    accepted_distance: float
    converged: bool
    samples_drawn: int


@dataclass(frozen=True)
class CalibrationResult:
    """Chosen per-distribution sample size with the doubling-search trace."""

    n: int
    capped: bool
    # (candidate n, mean L1 to the 16n reference, stderr, passed)
    history: tuple[tuple[int, float, float, bool], ...]


def kernel_kernel_estimate(
    dataset: list[LabeledEstimate],
    query: DensityEstimate,
    h: float,
    kernel: KernelSpec,
    grid: GridSpec,
) -> float:
    """Kernel-weighted average of training labels by distance to the query.

    Returns sum_i Y_i K(D_i/h) / sum_i K(D_i/h) when the denominator is
    positive and exactly 0.0 otherwise, with D_i the L1 distance between
    training estimate i and the query on the given grid.
    """
    if not dataset:
        raise ValueError("dataset must be non-empty")
    if not h > 0:
        raise ValueError("h must be positive")
    if any(item.estimate.dim != query.dim for item in dataset):
        raise ValueError("dataset and query estimates must share a dimension")
    num = 0.0
    den = 0.0
    for item in dataset:
        w = kernel_value(kernel, l1_distance(item.estimate, query, grid) / h)
        num += item.label * w
        den += w
    return num / den if den > 0 else 0.0


def default_max_iter(epsilon: float, lipschitz: float, dim: int) -> int:
    """Draw budget heuristic: 10 times the (6L/epsilon)^d coverage scale."""
    return math.ceil(10.0 * (6.0 * lipschitz / epsilon) ** dim)


def _member_bandwidth_cap(meta: MetaDistribution, n: int) -> float:
    # Hard spread bound for uniform members; generous tail bound for gaussian.
    sigma_cap = meta.base_width / 2.0 if meta.family == "uniform_location" else 3.0 * meta.base_width
    return max(sigma_cap * n ** (-1.0 / (4 + meta.dim)), 1e-3)


def family_grid(
    meta: MetaDistribution, n: int, points_per_axis: int | None = None
) -> GridSpec:
    """Quadrature grid covering every member's samples at sample size n.

    Uniform members are contained exactly; gaussian members are covered out
    to eight standard deviations, ample for any realistic draw count.
    """
    lo = np.asarray(meta.lo)
    hi = np.asarray(meta.hi)
    reach = meta.base_width / 2.0 if meta.family == "uniform_location" else 8.0 * meta.base_width
    pad = reach + 3.0 * _member_bandwidth_cap(meta, n)
    if points_per_axis is None:
        points_per_axis = default_points_per_axis(meta.dim)
    return GridSpec(lo=tuple(lo - pad), hi=tuple(hi + pad), points_per_axis=points_per_axis)


def _estimate_member(
    meta: MetaDistribution,
    handle: DistributionHandle,
    n: int,
    rng: np.random.Generator,
    kernel: KernelSpec,
) -> DensityEstimate:
    samples = draw_samples(meta, handle, n, rng)
    return kde_build(samples, select_bandwidth(samples), kernel)


def draw_labeled_dataset(
    meta: MetaDistribution,
    m: int,
    n: int,
    rng: np.random.Generator,
    kernel: KernelSpec = EPANECHNIKOV,
) -> list[LabeledEstimate]:
    """m labeled members, each estimated from n fresh samples."""
    dataset = []
    for _ in range(m):
        handle = draw_distribution(meta, rng)
        dataset.append(
            LabeledEstimate(
                estimate=_estimate_member(meta, handle, n, rng, kernel),
                label=oracle_label(meta, handle),
                handle=handle,
            )
        )
    return dataset


def adaptive_closest_point(
    meta: MetaDistribution,
    target_samples,
    epsilon: float,
    lipschitz: float,
    n: int,
    max_iter: int,
    rng: np.random.Generator,
    grid: GridSpec,
    kernel: KernelSpec = EPANECHNIKOV,
) -> AdaptiveResult:
    """Draw members until one's density estimate is epsilon/(3L)-close to the target's.

    The target estimate is built once from target_samples.  Each iteration
    draws a member, samples n points, estimates it, and accepts on the first
    distance at or below the threshold, returning that member's oracle label.
    Hitting max_iter returns the closest candidate seen with converged False.
    """
    if not epsilon > 0 or not lipschitz > 0:
        raise ValueError("epsilon and lipschitz must be positive")
    if n < 1 or max_iter < 1:
        raise ValueError("n and max_iter must be >= 1")
    target = kde_build(target_samples, select_bandwidth(target_samples), kernel)
    if target.dim != meta.dim:
        raise ValueError("target samples must match the meta-distribution dimension")
    threshold = epsilon / (3.0 * lipschitz)
    weights = grid.quadrature_weights()
    target_values = grid_values(target, grid)

    best_label = math.nan
    best_distance = math.inf
    for i in range(1, max_iter + 1):
        handle = draw_distribution(meta, rng)
        candidate = _estimate_member(meta, handle, n, rng, kernel)
        distance = _l1_from_values(grid_values(candidate, grid), target_values, weights)
        if distance <= threshold:
            return AdaptiveResult(
                label=oracle_label(meta, handle),
                iterations=i,
                accepted_distance=distance,
                converged=True,
                samples_drawn=n * i,
            )
        if distance < best_distance:
            best_distance = distance
            best_label = oracle_label(meta, handle)
    return AdaptiveResult(
        label=best_label,
        iterations=max_iter,
        accepted_distance=best_distance,
        converged=False,
        samples_drawn=n * max_iter,
    )


def quadrature_resolution(grid: GridSpec) -> float:
    """Smallest L1 separation the grid can meaningfully certify."""
    return 2.0 / (grid.points_per_axis - 1)


def calibrate_sample_size(
    meta: MetaDistribution,
    target_err: float,
    confidence: float,
    rng: np.random.Generator,
    grid: GridSpec,
    trials: int = 50,
    kernel: KernelSpec = EPANECHNIKOV,
) -> CalibrationResult:
    """Smallest power-of-two sample size whose estimates track a 16x reference.

    Doubling search over n in {16, ..., 65536}: accept the first n whose mean
    L1 distance between an n-sample estimate and a 16n-sample reference of
    the same member stays below target_err with the requested one-sided
    confidence.  Returns the cap flagged as capped when nothing passes.
    """
    if not 0 < target_err <= 2:
        raise ValueError("target_err must lie in (0, 2]")
    if not 0 < confidence < 1:
        raise ValueError("confidence must lie in (0, 1)")
    if trials < 2:
        raise ValueError("trials must be >= 2")
    if target_err < quadrature_resolution(grid):
        raise UnreachableTargetError(
            f"target_err {target_err:.3g} is below the grid resolution "
            f"{quadrature_resolution(grid):.3g}"
        )
    z = float(norm.ppf(confidence))
    history = []
    n = CALIBRATION_N_MIN
    while True:
        dists = np.empty(trials)
        for t in range(trials):
            handle = draw_distribution(meta, rng)
            est = _estimate_member(meta, handle, n, rng, kernel)
            ref = _estimate_member(meta, handle, 16 * n, rng, kernel)
            dists[t] = l1_distance(est, ref, grid)
        mean = float(dists.mean())
        stderr = float(dists.std(ddof=1) / math.sqrt(trials))
        passed = mean + z * stderr <= target_err
        history.append((n, mean, stderr, passed))
        if passed:
            return CalibrationResult(n=n, capped=False, history=tuple(history))
        if n >= CALIBRATION_N_MAX:
            return CalibrationResult(n=n, capped=True, history=tuple(history))
        n *= 2
