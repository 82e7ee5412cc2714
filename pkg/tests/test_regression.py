import numpy as np
import pytest

import distreg as dr
from distreg.density_distance import l1_distance
from distreg.regression import (
    UnreachableTargetError,
    calibrate_sample_size,
    default_max_iter,
    draw_labeled_dataset,
    family_grid,
)
from distreg.kernels import kernel_value


META_1D = dr.make_box_meta(1)
GRID_1D = family_grid(META_1D, 16)


def _labeled(samples, label, bandwidth=1.0, kernel=dr.BOXCAR):
    return dr.LabeledEstimate(estimate=dr.kde_build(samples, bandwidth, kernel), label=label)


def test_kernel_kernel_zero_when_boxcar_weights_vanish():
    dataset = [_labeled([[0.0]], 5.0), _labeled([[0.3]], -2.0)]
    query = dr.kde_build([[10.0]], 1.0, dr.BOXCAR)
    grid = dr.GridSpec(lo=(-5.0,), hi=(15.0,), points_per_axis=2048)
    # distances are ~2 (disjoint supports); h = 0.5 pushes every D/h past 1
    assert dr.kernel_kernel_estimate(dataset, query, 0.5, dr.BOXCAR, grid) == 0.0


def test_kernel_kernel_exact_hit_returns_its_label():
    est = dr.kde_build([[0.0]], 1.0, dr.BOXCAR)
    dataset = [dr.LabeledEstimate(estimate=est, label=7.5)]
    grid = dr.GridSpec(lo=(-3.0,), hi=(3.0,), points_per_axis=2048)
    assert dr.kernel_kernel_estimate(dataset, est, 1.0, dr.BOXCAR, grid) == 7.5


def test_kernel_kernel_equal_weights_average():
    est = dr.kde_build([[0.0]], 1.0, dr.BOXCAR)
    dataset = [
        dr.LabeledEstimate(estimate=est, label=1.0),
        dr.LabeledEstimate(estimate=est, label=3.0),
    ]
    grid = dr.GridSpec(lo=(-3.0,), hi=(3.0,), points_per_axis=2048)
    assert dr.kernel_kernel_estimate(dataset, est, 1.0, dr.GAUSSIAN, grid) == 2.0


def test_kernel_kernel_validation():
    est = dr.kde_build([[0.0]], 1.0, dr.BOXCAR)
    grid = dr.GridSpec(lo=(-3.0,), hi=(3.0,), points_per_axis=64)
    with pytest.raises(ValueError):
        dr.kernel_kernel_estimate([], est, 1.0, dr.BOXCAR, grid)
    other = dr.kde_build([[0.0, 0.0]], 1.0, dr.BOXCAR)
    with pytest.raises(ValueError):
        dr.kernel_kernel_estimate([dr.LabeledEstimate(estimate=other, label=0.0)], est, 1.0, dr.BOXCAR, grid)


def test_kernel_kernel_output_bounded_by_labels():
    rng = np.random.default_rng(30)
    for _ in range(60):
        m = int(rng.integers(1, 6))
        dataset = draw_labeled_dataset(META_1D, m, 64, rng)
        handle = dr.draw_distribution(META_1D, rng)
        samples = dr.draw_samples(META_1D, handle, 64, rng)
        query = dr.kde_build(samples, dr.select_bandwidth(samples), dr.EPANECHNIKOV)
        h = float(rng.uniform(0.05, 1.0))
        pred = dr.kernel_kernel_estimate(dataset, query, h, dr.GAUSSIAN, GRID_1D)
        labels = [item.label for item in dataset]
        assert min(labels) - 1e-12 <= pred <= max(labels) + 1e-12


def test_adaptive_atom_meta_converges_immediately():
    meta = dr.make_box_meta(1, lo=0.3, hi=0.3)
    rng = np.random.default_rng(31)
    target = dr.draw_samples(meta, dr.DistributionHandle((0.3,)), 4096, rng)
    result = dr.adaptive_closest_point(
        meta, target, epsilon=0.6, lipschitz=1.0, n=4096, max_iter=50,
        rng=rng, grid=family_grid(meta, 16),
    )
    assert result.converged
    assert result.iterations == 1
    assert result.label == pytest.approx(0.3)


def test_adaptive_huge_epsilon_accepts_first_draw():
    rng = np.random.default_rng(32)
    target = dr.draw_samples(META_1D, dr.draw_distribution(META_1D, rng), 64, rng)
    result = dr.adaptive_closest_point(
        META_1D, target, epsilon=6.0, lipschitz=1.0, n=64, max_iter=10,
        rng=rng, grid=GRID_1D,
    )
    assert result.converged and result.iterations == 1
    assert result.samples_drawn == 64


def test_adaptive_invariants_and_budget_identity():
    rng = np.random.default_rng(33)
    eps, lip, n = 0.5, 1.0, 256
    for t in range(8):
        trial_rng = np.random.default_rng([33, t])
        handle = dr.draw_distribution(META_1D, trial_rng)
        target = dr.draw_samples(META_1D, handle, n, trial_rng)
        result = dr.adaptive_closest_point(
            META_1D, target, eps, lip, n, max_iter=default_max_iter(eps, lip, 1),
            rng=trial_rng, grid=GRID_1D,
        )
        assert result.samples_drawn == n * result.iterations
        if result.converged:
            assert result.accepted_distance <= eps / (3.0 * lip)


def test_adaptive_determinism():
    def run():
        rng = np.random.default_rng([34, 0])
        handle = dr.draw_distribution(META_1D, rng)
        target = dr.draw_samples(META_1D, handle, 128, rng)
        return dr.adaptive_closest_point(
            META_1D, target, 0.4, 1.0, 128, 60, rng, GRID_1D
        )

    assert run() == run()


def test_adaptive_max_iter_fallback_returns_best_seen():
    rng = np.random.default_rng(35)
    handle = dr.draw_distribution(META_1D, rng)
    target = dr.draw_samples(META_1D, handle, 64, rng)
    # impossible threshold: estimation noise floor sits far above eps/(3L)
    result = dr.adaptive_closest_point(
        META_1D, target, epsilon=1e-6, lipschitz=1.0, n=64, max_iter=5,
        rng=rng, grid=GRID_1D,
    )
    assert not result.converged
    assert result.iterations == 5
    assert result.samples_drawn == 320
    assert np.isfinite(result.label) and np.isfinite(result.accepted_distance)


def test_adaptive_parameter_validation():
    target = [[0.5]]
    with pytest.raises(ValueError):
        dr.adaptive_closest_point(META_1D, target, 0.0, 1.0, 8, 8, np.random.default_rng(0), GRID_1D)
    with pytest.raises(ValueError):
        dr.adaptive_closest_point(META_1D, target, 0.1, -1.0, 8, 8, np.random.default_rng(0), GRID_1D)
    with pytest.raises(ValueError):
        dr.adaptive_closest_point(META_1D, [[0.5]] * 4, 0.1, 1.0, 0, 8, np.random.default_rng(0), GRID_1D)
    with pytest.raises(ValueError):
        dr.adaptive_closest_point(META_1D, [[0.5]] * 4, 0.1, 1.0, 8, 0, np.random.default_rng(0), GRID_1D)


def test_default_max_iter_heuristic():
    assert default_max_iter(0.2, 1.0, 1) == 300
    assert default_max_iter(0.2, 1.0, 2) == 9000


def test_family_grid_covers_member_estimates():
    rng = np.random.default_rng(36)
    for n in (16, 64, 256):
        grid = family_grid(META_1D, n)
        for _ in range(5):
            handle = dr.draw_distribution(META_1D, rng)
            samples = dr.draw_samples(META_1D, handle, n, rng)
            est = dr.kde_build(samples, dr.select_bandwidth(samples), dr.EPANECHNIKOV)
            l1_distance(est, est, grid)  # raises GridCoverageError on escape


def test_calibrate_trivial_target_takes_first_candidate():
    result = calibrate_sample_size(META_1D, 2.0, 0.9, np.random.default_rng([100, 0]), GRID_1D)
    assert result.n == 16
    assert not result.capped
    assert len(result.history) == 1


def test_calibrate_monotone_in_target():
    loose = calibrate_sample_size(META_1D, 0.4, 0.9, np.random.default_rng([100, 0]), GRID_1D)
    tight = calibrate_sample_size(META_1D, 0.1, 0.9, np.random.default_rng([100, 0]), GRID_1D)
    assert loose.n <= tight.n


def test_calibrate_gaussian_snapshot():
    """Regression snapshot: gaussian members, unit spread, target 0.1."""
    meta = dr.make_box_meta(1, family="gaussian_location", base_width=1.0, distance_scale=0.79)
    result = calibrate_sample_size(meta, 0.1, 0.9, np.random.default_rng([100, 0]), family_grid(meta, 16))
    assert result.n == 1024
    assert not result.capped


def test_calibrate_validation():
    rng = np.random.default_rng(0)
    with pytest.raises(ValueError):
        calibrate_sample_size(META_1D, 0.0, 0.9, rng, GRID_1D)
    with pytest.raises(ValueError):
        calibrate_sample_size(META_1D, 2.5, 0.9, rng, GRID_1D)
    with pytest.raises(ValueError):
        calibrate_sample_size(META_1D, 0.5, 1.5, rng, GRID_1D)
    with pytest.raises(UnreachableTargetError):
        calibrate_sample_size(META_1D, 1e-4, 0.9, rng, GRID_1D)


def test_draw_labeled_dataset_shapes_and_labels():
    rng = np.random.default_rng(37)
    dataset = draw_labeled_dataset(META_1D, 5, 32, rng)
    assert len(dataset) == 5
    for item in dataset:
        assert item.estimate.count == 32
        assert item.label == pytest.approx(dr.oracle_label(META_1D, item.handle))


def test_boxcar_weight_zero_case_consistency():
    # kernel_value drives the two-case formula: weight zero exactly past u = 1
    assert kernel_value(dr.BOXCAR, 1.0) == 0.5
    assert kernel_value(dr.BOXCAR, 1.0 + 1e-12) == 0.0
