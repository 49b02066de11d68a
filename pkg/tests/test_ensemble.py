"""Tests for hard ensemble construction and verification."""

import math

import numpy as np
import pytest
from pydantic import ValidationError

from irl_core.ensemble import (
    build_ensemble,
    certified_eps,
    eps_bounds,
    theta_from_beta_eps,
    unit_margin,
    verify_ensemble,
)
from irl_core.exceptions import BetaTooLarge, InfeasibleSeparation
from irl_core.geometry import facets_of_code, simplex_code
from irl_core.mdp import separability_margin
from irl_core.schemas import EnsembleConfig

TOL = 1e-9


def simplex_margin(n, eps):
    return eps * n / (2 * math.sqrt(2) * (n - 1))


class TestAdmissibleRange:

    def test_eps_bounds(self):
        lower, upper = eps_bounds(5, 0.01)
        assert lower == pytest.approx(math.sqrt(3) * 0.01)
        assert upper == pytest.approx(1 / math.sqrt(20))

    def test_beta_too_large(self):
        with pytest.raises(BetaTooLarge):
            eps_bounds(5, 0.2)

    def test_bad_n_or_beta(self):
        with pytest.raises(ValueError):
            eps_bounds(2, 0.01)
        with pytest.raises(ValueError):
            eps_bounds(5, 0.0)

    @pytest.mark.parametrize("n", [3, 5, 9])
    def test_lower_eps_gives_simplex_angle(self, n):
        beta = 0.001
        theta = theta_from_beta_eps(n, beta, math.sqrt(n - 2) * beta)
        assert math.cos(theta) == pytest.approx(-1 / (n - 1), abs=1e-9)

    def test_theta_shrinks_as_eps_grows(self):
        thetas = [theta_from_beta_eps(5, 0.01, eps) for eps in (0.02, 0.05, 0.1, 0.2)]
        assert all(a > b for a, b in zip(thetas, thetas[1:]))

    def test_theta_needs_positive_eps(self):
        with pytest.raises(ValueError):
            theta_from_beta_eps(5, 0.01, 0.0)


class TestEnsembleConfig:

    def test_default_regime(self, simplex_cfg):
        assert simplex_cfg.eps == pytest.approx(1 / math.sqrt(40))
        assert simplex_cfg.theta == pytest.approx(theta_from_beta_eps(5, 0.01, simplex_cfg.eps))

    def test_simplex_and_certified_regimes(self):
        assert EnsembleConfig.from_regime(5, 0.01, regime="simplex").eps == pytest.approx(math.sqrt(3) * 0.01)
        certified = EnsembleConfig.from_regime(5, 0.01, regime="certified")
        assert certified.eps == pytest.approx(0.01 * 2 * math.sqrt(2) * 4 / 5)
        assert certified.eps == pytest.approx(0.022627, abs=1e-6)

    def test_explicit_eps_wins(self):
        assert EnsembleConfig.from_regime(5, 0.01, eps=0.1, regime="simplex").eps == 0.1

    def test_unknown_regime(self):
        with pytest.raises(ValueError):
            EnsembleConfig.from_regime(5, 0.01, regime="greedy")

    def test_eps_outside_range(self):
        with pytest.raises(ValidationError):
            EnsembleConfig(n=5, beta=0.01, eps=0.5)
        with pytest.raises(ValidationError):
            EnsembleConfig(n=5, beta=0.01, eps=0.001)

    def test_icosahedron_needs_four_states(self):
        with pytest.raises(ValidationError):
            EnsembleConfig(n=5, beta=0.01, eps=0.1, code_kind="icosahedron")


class TestSimplexEnsemble:

    def test_size_and_order(self, simplex_ensemble):
        assert len(simplex_ensemble) == 5
        assert [h.facet_index for h in simplex_ensemble] == list(range(5))

    def test_transitions_are_stochastic(self, simplex_ensemble):
        for member in simplex_ensemble:
            second = member.instance.stacked[1]
            assert second.min() >= 0.0
            assert np.allclose(second.sum(axis=1), 1.0)
            assert np.allclose(member.instance.stacked[0], 0.2)

    def test_last_state_reuses_first_row(self, simplex_ensemble):
        for member in simplex_ensemble:
            second = member.instance.stacked[1]
            assert np.allclose(second[-1], second[0])

    def test_margin_closed_form(self, simplex_ensemble, simplex_cfg):
        expected = simplex_margin(5, simplex_cfg.eps)
        for member in simplex_ensemble:
            assert member.margin == pytest.approx(expected, abs=TOL)
            assert member.meets_beta
            assert np.abs(member.reward).sum() == pytest.approx(1.0)

    def test_verification_passes(self, simplex_ensemble):
        report = verify_ensemble(simplex_ensemble)
        assert report.passed
        assert report.size == 5
        assert report.max_cross_margin < 0

    def test_cross_rewards_are_excluded(self, simplex_ensemble):
        for i, member in enumerate(simplex_ensemble):
            for j, other in enumerate(simplex_ensemble):
                margin = separability_margin(member.instance, other.reward)
                assert (margin > 0) == (i == j)

    def test_unit_margin_and_certified_eps(self):
        code = simplex_code(4)
        for facet in facets_of_code(code):
            assert unit_margin(code, facet) == pytest.approx(5 / (2 * math.sqrt(2) * 4), abs=TOL)
        assert certified_eps(5, 0.01) == pytest.approx(0.022627, abs=1e-6)


class TestRegimes:

    def test_simplex_regime_falls_short(self):
        ensemble = build_ensemble(EnsembleConfig.from_regime(5, 0.01, regime="simplex"))
        report = verify_ensemble(ensemble)
        assert not report.passed
        assert report.margin_shortfalls == list(range(5))
        assert report.cross_failures == []

    def test_certified_regime_reaches_beta(self):
        ensemble = build_ensemble(EnsembleConfig.from_regime(5, 0.01, regime="certified"))
        report = verify_ensemble(ensemble)
        assert report.passed
        assert report.min_own_margin == pytest.approx(0.01, abs=1e-9)

    @pytest.mark.parametrize("n", [4, 5, 7, 10])
    @pytest.mark.parametrize("beta", [1e-3, 3.2e-3])
    def test_regime_grid(self, n, beta):
        default = EnsembleConfig.from_regime(n, beta)
        assert default.eps == pytest.approx(1 / math.sqrt(2 * n * (n - 1)))
        assert verify_ensemble(build_ensemble(default)).passed

        tight = EnsembleConfig.from_regime(n, beta, regime="simplex")
        report = verify_ensemble(build_ensemble(tight))
        assert report.cross_failures == []
        if simplex_margin(n, tight.eps) < beta - TOL:
            assert report.margin_shortfalls == list(range(n))
        else:
            assert report.passed

    def test_icosahedron_ensemble(self):
        ensemble = build_ensemble(EnsembleConfig.from_regime(4, 0.01, code_kind="icosahedron"))
        assert len(ensemble) == 20
        assert verify_ensemble(ensemble).passed

    def test_icosahedron_angle_too_small(self):
        cfg = EnsembleConfig(n=4, beta=0.05, eps=math.sqrt(2) * 0.05, code_kind="icosahedron")
        with pytest.raises(InfeasibleSeparation):
            build_ensemble(cfg)


class TestPerturbation:

    def test_rows_of_the_perturbation_sum_to_zero(self, simplex_ensemble):
        for member in simplex_ensemble:
            P1, P2 = member.instance.stacked
            U = P2 - P1
            assert np.allclose(U.sum(axis=1), 0.0, atol=TOL)
            assert np.allclose(U @ P1, 0.0, atol=TOL)


class TestVerifyEnsemble:

    def test_empty(self):
        with pytest.raises(ValueError):
            verify_ensemble([])

    def test_mixed_configurations(self, simplex_ensemble):
        other = build_ensemble(EnsembleConfig.from_regime(5, 0.01, regime="certified"))
        with pytest.raises(ValueError):
            verify_ensemble([simplex_ensemble[0], other[1]])

    def test_duplicate_member_fails_cross_exclusion(self, simplex_ensemble):
        report = verify_ensemble([simplex_ensemble[0], simplex_ensemble[0]])
        assert report.cross_failures == [(0, 1), (1, 0)]
        assert not report.passed
