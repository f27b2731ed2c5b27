import numpy as np
import pytest

from rtpgame.errors import ConfigurationError, InvalidParameterError, InvalidPriorError
from rtpgame.model import (
    Behavior,
    Info,
    PreferencePrior,
    PricingPolicy,
    RenewableForecast,
    Scenario,
    SigmaCorrelation,
    behavior_constants,
    price,
    system_metrics,
    utility,
)
from rtpgame.network import CommunicationGraph


class TestBehaviorConstants:
    def test_selfish_example(self):
        c = behavior_constants("S", 1.2, 1.0, 1.0, 3)
        assert c.lam == pytest.approx(0.4) and c.mu == pytest.approx(0.4) and c.tau == pytest.approx(0.4)
        assert c.rho == pytest.approx(1 / 2.8)

    def test_welfare_example(self):
        c = behavior_constants(Behavior.WELFARE, 1.2, 1.0, 1.0, 3)
        assert (c.lam, c.mu, c.tau) == pytest.approx((2 / 3, 0.0, 1 / 3))

    def test_altruistic(self):
        c = behavior_constants("U", 1.2, 1.0, 1.0, 4)
        assert (c.lam, c.mu, c.tau) == pytest.approx((0.6, 0.3, 0.3))

    def test_altruistic_matches_welfare_when_gamma_equals_kappa(self):
        u = behavior_constants("U", 0.7, 0.7, 2.0, 6)
        w = behavior_constants("W", 0.7, 0.7, 2.0, 6)
        assert (u.lam, u.tau, u.rho) == pytest.approx((w.lam, w.tau, w.rho))

    @pytest.mark.parametrize("bad", [(0, 1, 1, 2), (1, -1, 1, 2), (1, 1, 0, 2), (1, 1, 1, 0)])
    def test_rejects_bad_parameters(self, bad):
        with pytest.raises(InvalidParameterError):
            behavior_constants("S", *bad)

    def test_rejects_unknown_model(self):
        with pytest.raises(ValueError):
            behavior_constants("X", 1, 1, 1, 2)


class TestPrimitives:
    def test_price_examples(self):
        assert price(0, 0, 1.7, 4) == 0
        assert price(30, 0, 1.2, 3) == pytest.approx(12.0)
        assert price(10, -10, 2, 5) == 0

    def test_price_rejects_empty_population(self):
        with pytest.raises(InvalidParameterError):
            price(1, 0, 1, 0)

    def test_utility_examples(self):
        assert utility(0, 5, 3, 1, 1, 1, 2) == 0
        assert utility(1, 1, 3, 0, 1, 1, 1) == pytest.approx(1.0)

    def test_single_agent_free_energy_maximizer(self):
        grid = np.linspace(0, 10, 100001)
        best = grid[np.argmax(utility(grid, grid, 6.0, 0.0, 1e-300, 1.5, 1))]
        assert best == pytest.approx(6.0 / 3.0, abs=1e-4)

    def test_system_metrics_example(self):
        m = system_metrics([1, 1], 0.0, PricingPolicy(1, 1, 1), [3, 3])
        assert m.utility == pytest.approx(2) and m.cost == pytest.approx(2)
        assert m.net_revenue == pytest.approx(0) and m.welfare == pytest.approx(2)

    def test_system_metrics_zero_consumption(self):
        m = system_metrics(np.zeros(4), -3.0, PricingPolicy(1.2, 1, 1), np.full(4, 30.0))
        assert m == (0, 0, 0, 0)

    def test_system_metrics_needs_single_slot_policy(self):
        with pytest.raises(InvalidParameterError):
            system_metrics([1, 1], 0, PricingPolicy((1, 2), 1, 1), [3, 3])

    def test_system_metrics_shape_mismatch(self):
        with pytest.raises(InvalidParameterError):
            system_metrics([1, 1], 0, PricingPolicy(1, 1, 1), [3, 3, 3])


class TestTypes:
    def test_policy_rejects_nonpositive(self):
        with pytest.raises(InvalidParameterError):
            PricingPolicy(1.2, (1, 0), 1)

    def test_policy_per_slot(self):
        p = PricingPolicy((1, 2, 3), 1, 0.5)
        assert p.at(2).gamma == 3 and p.at(2).alpha == 0.5
        assert p.slot_counts() == [3]

    def test_forecast_rejects_negative_std(self):
        with pytest.raises(InvalidParameterError):
            RenewableForecast(0, -1)

    def test_sigma_correlation(self):
        np.testing.assert_array_equal(SigmaCorrelation(0.5, 2).matrix(2), [[2, 1], [1, 2]])
        with pytest.raises(InvalidParameterError):
            SigmaCorrelation(1.5)

    def test_prior_validation(self):
        with pytest.raises(InvalidPriorError):
            PreferencePrior(30, [[1, 2], [2, 1]])
        with pytest.raises(InvalidPriorError):
            PreferencePrior(30, [[1, 0.5], [0.4, 1]])
        with pytest.raises(InvalidPriorError):
            PreferencePrior(-1, np.eye(2))
        with pytest.raises(InvalidPriorError):
            PreferencePrior(30, [[0.0]])

    def test_prior_is_immutable(self):
        prior = PreferencePrior(30, np.eye(3))
        with pytest.raises(ValueError):
            prior.covariance[0, 0] = 5

    def test_homogeneous_detection(self):
        assert PreferencePrior.sigma_correlated(4, 30, 0.3, 4).homogeneous == SigmaCorrelation(0.3, 4)
        assert PreferencePrior(30, np.diag([1.0, 2.0])).homogeneous is None

    def test_factor_reproduces_covariance(self):
        for sigma in (0.0, 0.4, 1.0):
            prior = PreferencePrior.sigma_correlated(5, 30, sigma, 4)
            f = prior.factor
            np.testing.assert_allclose(f @ f.T, prior.covariance, atol=1e-12)

    def test_scenario_graph_iff_action_sharing(self):
        prior = PreferencePrior.sigma_correlated(3, 30, 0, 1)
        policy = PricingPolicy(1.2, 1, 1)
        with pytest.raises(ConfigurationError):
            Scenario(prior, policy, info="AS")
        with pytest.raises(ConfigurationError):
            Scenario(prior, policy, info="B", graph=CommunicationGraph.complete(3))
        with pytest.raises(ConfigurationError):
            Scenario(prior, policy, info="AS", graph=CommunicationGraph.complete(4))
        s = Scenario(prior, policy, info="AS", graph=CommunicationGraph.complete(3))
        assert s.info is Info.ACTION_SHARING

    def test_scenario_horizon_and_sequences(self):
        prior = PreferencePrior.sigma_correlated(3, 30, 0, 1)
        with pytest.raises(ConfigurationError):
            Scenario(prior, PricingPolicy(1.2, 1, 1), horizon=0)
        with pytest.raises(ConfigurationError):
            Scenario(prior, PricingPolicy((1.2, 1.0), 1, 1), horizon=3)
        s = Scenario(prior, PricingPolicy(1.2, 1, 1), horizon=2).replace(behavior="W")
        assert s.behavior is Behavior.WELFARE and s.horizon == 2
