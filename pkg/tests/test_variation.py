import numpy as np
import pytest
from scipy.stats import spearmanr

from sramdpe.errors import InvalidInputError
from sramdpe.variation import (
    MonteCarloPoint,
    StdVsCurrentFit,
    VariationSpec,
    fit_std_vs_current,
    monte_carlo_stats,
    sample_vt,
    sample_vt_offsets,
    surrogate_noise,
)


class TestSampling:
    def test_zero_sigma_gives_zero_offsets(self):
        spec = VariationSpec(sigma_min=0.0, seed=1)
        assert np.all(sample_vt_offsets(spec, np.array([1, 8, 4]), 0) == 0.0)

    def test_width_scaling_formula(self):
        spec = VariationSpec(sigma_min=0.030)
        assert spec.sigma_for_multiplier(8) == pytest.approx(
            0.030 / np.sqrt(8), rel=1e-12
        )
        assert float(spec.sigma_for_multiplier(8)) == pytest.approx(
            0.0106066, abs=1e-6
        )

    def test_empirical_sigma_matches_parameter(self):
        spec = VariationSpec(sigma_min=0.030, seed=77)
        draws = np.concatenate(
            [sample_vt_offsets(spec, np.ones(100), t) for t in range(1000)]
        )
        assert draws.std(ddof=1) == pytest.approx(0.030, rel=0.02)

    def test_width_law_sigma_ratio(self):
        spec = VariationSpec(sigma_min=0.030, seed=5)
        d1 = np.concatenate(
            [sample_vt_offsets(spec, np.ones(50), t) for t in range(2000)]
        )
        spec8 = VariationSpec(sigma_min=0.030, seed=6)
        d8 = np.concatenate(
            [sample_vt_offsets(spec8, np.full(50, 8), t) for t in range(2000)]
        )
        ratio = d1.std(ddof=1) / d8.std(ddof=1)
        assert ratio == pytest.approx(np.sqrt(8), rel=0.03)

    def test_scalar_view_matches_vector(self):
        spec = VariationSpec(seed=3)
        vec = sample_vt_offsets(spec, np.array([1.0, 8.0, 4.0]), 9)
        for idx, m in enumerate((1, 8, 4)):
            assert sample_vt(spec, m, 9, idx) == pytest.approx(
                vec[idx], rel=1e-15
            )

    def test_deterministic_per_key(self):
        spec = VariationSpec(seed=3)
        a = sample_vt_offsets(spec, np.ones(10), 4)
        b = sample_vt_offsets(spec, np.ones(10), 4)
        c = sample_vt_offsets(spec, np.ones(10), 5)
        assert np.array_equal(a, b)
        assert not np.array_equal(a, c)


class TestMonteCarloStats:
    def test_zero_sigma_identically_zero_std(self):
        spec = VariationSpec(sigma_min=0.0, trials=25, seed=2)
        pts = monte_carlo_stats([0.5, 0.675], [3, 15], spec)
        assert all(p.std_current == 0.0 for p in pts)

    def test_std_rank_correlates_with_mean(self):
        spec = VariationSpec(sigma_min=0.030, trials=300, seed=12)
        pts = monte_carlo_stats([0.5, 0.6, 0.675], [3, 9, 15], spec)
        rho = spearmanr([p.mean_current for p in pts],
                        [p.std_current for p in pts]).statistic
        assert rho >= 0.9

    def test_mean_consistency_in_linear_regime(self):
        spec = VariationSpec(sigma_min=0.005, trials=400, seed=21)
        pts = monte_carlo_stats([0.675], [5, 15], spec)
        for p in pts:
            bound = 3 * p.std_current / np.sqrt(spec.trials)
            assert abs(p.mean_current - p.nominal_current) <= bound

    def test_reproducible_bit_identical(self):
        spec = VariationSpec(sigma_min=0.030, trials=50, seed=9)
        a = monte_carlo_stats([0.6], [7], spec)
        b = monte_carlo_stats([0.6], [7], spec)
        assert a[0].mean_current == b[0].mean_current
        assert a[0].std_current == b[0].std_current


class TestStdFit:
    def test_recovers_exact_quadratic(self):
        cur = np.linspace(1e-6, 1e-4, 20)
        std = 0.01 * cur + 30.0 * cur**2
        fit = fit_std_vs_current(list(zip(cur, std)))
        assert fit.coeff_linear == pytest.approx(0.01, rel=1e-9)
        assert fit.coeff_quadratic == pytest.approx(30.0, rel=1e-9)
        assert fit.residual_rms < 1e-15

    def test_zero_points_give_zero_fit(self):
        fit = fit_std_vs_current([(c, 0.0) for c in np.linspace(0, 1e-4, 12)])
        assert fit.coeff_linear == 0.0 and fit.coeff_quadratic == 0.0
        assert fit(5e-5) == 0.0

    def test_fit_evaluates_zero_at_zero(self):
        cur = np.linspace(0.0, 1e-4, 15)
        fit = fit_std_vs_current(list(zip(cur, 0.05 * cur)))
        assert fit(0.0) == 0.0

    def test_fit_nonnegative_over_domain(self):
        rng = np.random.default_rng(0)
        cur = np.linspace(1e-6, 1e-4, 30)
        std = np.abs(0.02 * cur + rng.normal(0, 1e-7, 30))
        fit = fit_std_vs_current(list(zip(cur, std)))
        probe = np.linspace(fit.domain[0], fit.domain[1], 100)
        assert np.all(fit(probe) >= 0.0)

    def test_requires_ten_points(self):
        with pytest.raises(InvalidInputError):
            fit_std_vs_current([(1e-6, 1e-8)] * 9)

    def test_residual_small_on_monte_carlo_output(self):
        spec = VariationSpec(sigma_min=0.030, trials=300, seed=4)
        pts = monte_carlo_stats([0.5, 0.55, 0.6, 0.675], [3, 7, 11, 15], spec)
        fit = fit_std_vs_current([(p.mean_current, p.std_current) for p in pts])
        assert fit.residual_rms <= 0.2 * max(p.std_current for p in pts)


class TestSurrogate:
    def test_zero_fit_is_identity(self):
        fit = StdVsCurrentFit(0.0, 0.0, (0.0, 1e-3), 0.0)
        rng = np.random.default_rng(0)
        assert surrogate_noise(3e-5, fit, rng) == 3e-5

    def test_draw_statistics_match_fit(self):
        fit = StdVsCurrentFit(0.05, 0.0, (0.0, 1e-3), 0.0)
        rng = np.random.default_rng(8)
        current = 2e-4
        draws = np.array([surrogate_noise(current, fit, rng)
                          for _ in range(10000)])
        sigma = float(fit(current))
        assert draws.std(ddof=1) == pytest.approx(sigma, rel=0.03)
        assert abs(draws.mean() - current) <= 3 * sigma / 100.0

    def test_surrogate_consistent_with_direct_monte_carlo(self):
        """The fitted Gaussian reproduces the direct tile distribution."""
        spec = VariationSpec(sigma_min=0.030, trials=400, seed=13)
        grid = monte_carlo_stats([0.5, 0.55, 0.6, 0.65, 0.675],
                                 [3, 7, 11, 15], spec)
        fit = fit_std_vs_current([(p.mean_current, p.std_current)
                                  for p in grid])
        probe = [p for p in grid if p.v_in == 0.6 and p.weight_level == 11][0]
        rng = np.random.default_rng(99)
        draws = np.array([
            surrogate_noise(probe.mean_current, fit, rng) for _ in range(5000)
        ])
        se = probe.std_current * np.sqrt(1 / 5000 + 1 / spec.trials)
        assert abs(draws.mean() - probe.mean_current) <= se
        assert draws.std(ddof=1) == pytest.approx(probe.std_current, rel=0.15)


def test_monte_carlo_point_fields():
    p = MonteCarloPoint(0.5, 7, 1e-5, 1e-7, 1e-5)
    assert p.weight_level == 7
