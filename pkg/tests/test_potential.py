import math

import mpmath
import numpy as np
import pytest

from nocollide.geometry import Configuration
from nocollide.potential import (
    BarrierDomainError,
    BarrierSpec,
    ball_exit_survival_bound,
    barrier_value,
    certify_subharmonic,
    fd_laplacian,
    laplacian_ratio_analytic,
    log_scale_invariance_bound,
    pair_log_product,
    sample_configurations,
)
from nocollide.spectral import correlation_lower_bound

E = math.e


def _barrier_field(spec):
    return lambda pts: barrier_value(spec, Configuration(pts, "continuous"))


def _pairs_field():
    return lambda pts: pair_log_product(Configuration(pts, "continuous"))


def test_barrier_value_euler_configuration():
    # centers at (+-e, 0): scaled distances are (2e, e, e), so only the pair
    # factor differs from 1
    spec = BarrierSpec(2)
    cfg = Configuration(np.array([[E, 0.0], [-E, 0.0]]))
    expected = math.log(2 * E) ** (1.0 / correlation_lower_bound(2))
    assert barrier_value(spec, cfg) == pytest.approx(expected, rel=1e-12)


def test_barrier_domain_error_reports_index():
    spec = BarrierSpec(2)
    cfg = Configuration(np.array([[0.5, 0.0], [-0.5, 0.0]]))  # pair distance 1
    with pytest.raises(BarrierDomainError) as err:
        barrier_value(spec, cfg)
    assert err.value.index.kind == "pair"


def test_barrier_scaling_monotone(rng):
    spec = BarrierSpec(3)
    for _ in range(20):
        cfg = sample_configurations(3, 1, min_clearance=2.0, seed=int(rng.integers(1 << 30)))[0]
        v1 = barrier_value(spec, cfg)
        v2 = barrier_value(spec, Configuration(1.7 * cfg.points))
        assert v2 > v1


def test_pair_log_product_examples():
    cfg = Configuration(np.array([[0.0, 0.0], [7.0, 0.0]]))
    assert pair_log_product(cfg) == pytest.approx(math.log(7.0), rel=1e-12)
    cfg_e = Configuration(np.array([[0.0, 0.0], [E, 0.0]]))
    assert pair_log_product(cfg_e) == pytest.approx(1.0, rel=1e-12)
    s = 5.0
    eq = Configuration(np.array([[0.0, 0.0], [s, 0.0], [s / 2, s * math.sqrt(3) / 2]]))
    assert pair_log_product(eq) == pytest.approx(math.log(s) ** 3, rel=1e-9)


def test_fd_laplacian_quadratic_exact():
    for n in (2, 3):
        f = lambda pts: float(np.sum(pts * pts))  # noqa: E731
        z = np.arange(2.0 * n).reshape(n, 2)
        assert fd_laplacian(f, z, 1e-3) == pytest.approx(2.0 * 2 * n, rel=1e-8)


def test_fd_laplacian_affine_zero():
    f = lambda pts: float(1.5 + pts[0, 0] - 2.0 * pts[1, 1])  # noqa: E731
    z = np.array([[0.3, 0.4], [1.2, -0.7]])
    assert abs(fd_laplacian(f, z, 1e-4)) < 1e-6


def test_fd_laplacian_harmonic_log_converges():
    # n=2 pair log product is harmonic off the diagonal: FD Laplacian ~ C h^2
    f = _pairs_field()
    z = np.array([[0.0, 0.0], [3.0, 1.0]])
    errs = [abs(fd_laplacian(f, z, h)) for h in (2e-2, 1e-2, 5e-3)]
    assert errs[0] < 1e-4
    assert errs[1] < errs[0] / 3.0
    assert errs[2] < errs[1] / 3.0


def test_fd_laplacian_second_order_on_smooth_field():
    f = lambda pts: math.sin(pts[0, 0]) * math.cos(pts[1, 1]) + pts[0, 1] ** 3  # noqa: E731
    z = np.array([[0.4, 0.9], [-0.3, 1.1]])
    exact = -2.0 * math.sin(0.4) * math.cos(1.1) + 6.0 * 0.9
    e1 = abs(fd_laplacian(f, z, 4e-2) - exact)
    e2 = abs(fd_laplacian(f, z, 2e-2) - exact)
    assert 2.5 <= e1 / e2 <= 6.0


def test_single_log_factor_subharmonic(rng):
    # each codimension-two log factor on its own has vanishing Laplacian
    for _ in range(10):
        cfg = sample_configurations(2, 1, min_clearance=2.5, seed=int(rng.integers(1 << 30)))[0]
        f = lambda pts: math.log(  # noqa: E731
            math.sqrt(2.0) * (math.hypot(pts[0, 0] - pts[1, 0], pts[0, 1] - pts[1, 1]) / math.sqrt(2.0))
        )
        lap = fd_laplacian(f, cfg.points, 1e-3)
        assert lap >= -1e-5


def test_laplacian_decomposition_identity(rng):
    # FD Laplacian of the product equals the analytic own-term plus
    # correlation cross-term decomposition
    for n in (2, 3):
        spec = BarrierSpec(n)
        for seed in range(4):
            cfg = sample_configurations(n, 1, min_clearance=2.5, box=8.0, seed=seed + 50)[0]
            g = barrier_value(spec, cfg)
            lap_fd = fd_laplacian(_barrier_field(spec), cfg.points, 1e-4)
            ratio = laplacian_ratio_analytic(spec, cfg)
            assert lap_fd / g == pytest.approx(ratio, rel=2e-3, abs=2e-4)


def test_certify_barrier_small_run():
    samples = sample_configurations(2, 200, min_clearance=2.0, seed=7)
    report = certify_subharmonic(_barrier_field(BarrierSpec(2)), samples, h=1e-3)
    assert report.n_samples == 200
    assert report.n_violations == 0


def test_certify_finds_pair_product_witness():
    samples = sample_configurations(3, 300, min_clearance=2.0, seed=11)
    report = certify_subharmonic(_pairs_field(), samples, h=1e-3)
    assert report.n_violations >= 1
    # witnesses are genuine: analytic cross-term is negative there
    i = report.violations[0]
    spec = BarrierSpec(3, gamma=1.0, include_origin=False)
    assert laplacian_ratio_analytic(spec, samples[i]) < 0


def test_certify_inflated_gamma_reports_without_raising():
    spec = BarrierSpec(2, gamma=10.0 * correlation_lower_bound(2))
    samples = sample_configurations(2, 100, min_clearance=2.0, seed=3)
    report = certify_subharmonic(_barrier_field(spec), samples, h=1e-3)
    assert report.n_samples == 100  # violations, if any, are data not errors


def test_exit_bound_limits_and_monotonicity():
    assert ball_exit_survival_bound(4.0, 0.0, 2) == pytest.approx(1.0)
    grid = [ball_exit_survival_bound(4.0, t, 2) for t in (0.5, 1, 5, 50, 500, 5000)]
    assert all(a > b for a, b in zip(grid, grid[1:]))
    assert all(0 < v <= 1 for v in grid)
    a_grid = [ball_exit_survival_bound(a, 50.0, 2) for a in (2, 3, 4, 8, 16)]
    assert all(a < b for a, b in zip(a_grid, a_grid[1:]))
    with pytest.raises(ValueError):
        ball_exit_survival_bound(1.5, 10.0, 2)


def test_exit_bound_against_high_precision_reimplementation():
    # independent route: evaluate the product formula directly in mpmath
    for (a, T, n) in [(2.0, 100.0, 2), (4.0, 50.0, 2), (3.0, 7.0, 4), (2.5, 1e4, 3)]:
        with mpmath.workdps(60):
            gamma = 1 - mpmath.cos(mpmath.pi / (2 * n))
            val = (
                (mpmath.log(a) / mpmath.log(a + T)) ** n
                * (mpmath.log(a) / mpmath.log(a + mpmath.sqrt(2) * T)) ** (n * (n - 1) / 2)
            ) ** (1 / gamma)
            expected = float(val)
        assert ball_exit_survival_bound(a, T, n) == pytest.approx(expected, rel=1e-12)


def test_log_scale_invariance_bound():
    assert log_scale_invariance_bound(2.0, 2.0, 5, 3.0) == 1.0
    assert log_scale_invariance_bound(2.0, 4.0, 2, 1.0) == pytest.approx(2.0**-16, rel=1e-12)
    with pytest.raises(ValueError):
        log_scale_invariance_bound(4.0, 2.0, 2, 1.0)


def test_sample_configurations_respects_clearance():
    for cfg in sample_configurations(3, 50, min_clearance=2.0, seed=5):
        from nocollide.geometry import center_clearance

        assert center_clearance(cfg) >= 2.0
