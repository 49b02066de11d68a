"""Tests for the closed-form bounds."""

import math

import pytest

from irl_core.bounds import (
    bound_report,
    centroid_dot_check,
    centroid_dot_lower_bound,
    code_size_lower_bound,
    default_eps,
    ensemble_size_lower_bound,
    facet_count_lower_bound,
    fano_error_lower_bound,
    fano_expression,
    format_bound_report,
    kl_column_bound,
    kl_trajectory_bound,
    sample_threshold_beta,
    sample_threshold_simplex_eq,
    theta_trig,
)
from irl_core.ensemble import theta_from_beta_eps
from irl_core.exceptions import (
    BetaTooLarge,
    DegenerateDenominator,
    EpsTooLarge,
    VacuousBound,
)
from irl_core.geometry import icosahedron_code, simplex_code

TOL = 1e-9


class TestCodeAndFacetCounts:

    def test_code_size_icosahedron_angle(self):
        value = code_size_lower_bound(4, math.acos(1 / math.sqrt(5)))
        assert value == pytest.approx(math.sqrt(6 * math.pi) / math.sqrt(5) / 0.8, abs=TOL)
        assert value == pytest.approx(2.42703, abs=1e-5)

    def test_code_size_right_angle_is_zero(self):
        assert code_size_lower_bound(5, math.pi / 2) == pytest.approx(0.0, abs=TOL)

    @pytest.mark.parametrize("n,N,expected", [(4, 12, 21), (7, 7, 11), (3, 9, 9), (3, 40, 40)])
    def test_facet_count(self, n, N, expected):
        assert facet_count_lower_bound(n, N) == expected

    def test_theta_trig_matches_angle(self):
        for eps in (0.03, 0.1, 0.2):
            sin_t, cos_t = theta_trig(5, eps, 0.01)
            theta = theta_from_beta_eps(5, 0.01, eps)
            assert sin_t == pytest.approx(math.sin(theta), abs=TOL)
            assert cos_t == pytest.approx(math.cos(theta), abs=TOL)

    def test_ensemble_size_grows_as_beta_shrinks(self):
        sizes = [ensemble_size_lower_bound(6, 0.1, beta) for beta in (0.02, 0.01, 0.005)]
        assert sizes[0] < sizes[1] < sizes[2]


class TestCentroidDot:

    def test_closed_form(self):
        assert centroid_dot_lower_bound(3, math.pi / 3) == pytest.approx(1 / math.sqrt(3), abs=TOL)

    def test_degenerate_denominator(self):
        with pytest.raises(DegenerateDenominator):
            centroid_dot_lower_bound(3, math.pi)

    @pytest.mark.parametrize("n", [4, 5, 8])
    def test_simplex_measured_against_formula(self, n):
        result = centroid_dot_check(simplex_code(n - 1))
        assert result["measured"] == pytest.approx(math.sqrt(n / (2 * (n - 1))), abs=TOL)
        assert result["bound"] == pytest.approx(math.sqrt(n / (n - 2)), abs=TOL)
        assert result["slack"] < 0

    def test_icosahedron_measured_against_formula(self):
        result = centroid_dot_check(icosahedron_code())
        assert result["measured"] == pytest.approx(0.35683, abs=1e-5)
        assert result["bound"] == pytest.approx(0.38197, abs=1e-5)


class TestKlBounds:

    def test_column_bound(self):
        assert kl_column_bound(5, 0.05) == pytest.approx(1 / 30, abs=TOL)

    def test_column_bound_at_default_eps(self):
        assert kl_column_bound(7, 1 / math.sqrt(84)) == pytest.approx(0.70551, abs=1e-5)

    def test_eps_too_large(self):
        with pytest.raises(EpsTooLarge):
            kl_column_bound(5, 0.2)

    def test_trajectory_bound_is_linear_in_m(self):
        assert kl_trajectory_bound(5, 0.05, 1) == 0.0
        assert kl_trajectory_bound(5, 0.05, 31) == pytest.approx(1.0, abs=TOL)
        with pytest.raises(ValueError):
            kl_trajectory_bound(5, 0.05, 0)


class TestFano:

    @pytest.mark.parametrize("n", [4, 5, 7, 10, 20, 100])
    def test_simplex_threshold_gives_one_half(self, n):
        eps = 1 / math.sqrt(2 * n * (n - 1))
        m = sample_threshold_simplex_eq(n)
        assert fano_expression(n, eps, 0.001, m, ensemble_size_override=n) == pytest.approx(0.5, abs=TOL)

    @pytest.mark.parametrize("n,beta", [(5, 0.01), (7, 0.0032), (8, 0.002), (20, 1e-4), (100, 1e-5)])
    def test_beta_threshold_gives_one_half(self, n, beta):
        eps = math.sqrt(n - 2) * beta
        m = sample_threshold_beta(n, beta)
        assert fano_expression(n, eps, beta, m, ensemble_size_override=n) == pytest.approx(0.5, abs=TOL)

    def test_clamped(self):
        assert fano_error_lower_bound(5, 0.05, 0.01, 10**6, ensemble_size_override=5) == 0.0
        value = fano_error_lower_bound(5, 0.05, 0.01, 1, ensemble_size_override=100)
        assert value == pytest.approx(1 - math.log(2) / math.log(100), abs=TOL)

    def test_vacuous_ensemble(self):
        with pytest.raises(VacuousBound):
            fano_expression(5, 0.05, 0.01, 10, ensemble_size_override=1.0)

    def test_threshold_beta_too_large(self):
        with pytest.raises(BetaTooLarge):
            sample_threshold_beta(5, 0.2)

    def test_threshold_decreases_with_beta(self):
        assert sample_threshold_beta(5, 0.005) > sample_threshold_beta(5, 0.01) > 1


class TestBoundReport:

    def test_default_point(self):
        report = bound_report(5, 0.01, m=100)
        assert report.eps == pytest.approx(default_eps(5, 0.01))
        assert report.kl_traj == pytest.approx(99 * report.kl_col)
        assert report.m_threshold_simplex == pytest.approx(sample_threshold_simplex_eq(5))
        assert report.m_threshold_beta == pytest.approx(sample_threshold_beta(5, 0.01))
        assert report.vacuous["kl"] is False

    def test_upper_eps_makes_kl_vacuous(self):
        eps = 1 / math.sqrt(20)
        report = bound_report(5, 0.01, eps=eps, m=10)
        assert report.vacuous["kl"] is True
        assert math.isinf(report.kl_col)
        assert report.fano_error_lb is None

    def test_supplied_ensemble_size(self):
        report = bound_report(5, 0.01, m=1, ensemble_size=100.0)
        assert report.eta == 100.0
        assert report.fano_error_lb == pytest.approx(1 - math.log(2) / math.log(100), abs=TOL)

    def test_format(self):
        text = format_bound_report(bound_report(5, 0.01, m=10))
        assert "kl_traj" in text
        assert text.splitlines()[-1].startswith("vacuous")
