import math

import numpy as np
import pytest

from angiodelay import (
    HAHNFELDT_PARAMS,
    LOG_GROWTH,
    DomainError,
    GrowthFunction,
    ModelParams,
    NoPositiveSteadyStateError,
    derived_rates,
    params_from_json,
    params_to_json,
    rhs_original,
    rhs_rescaled,
    steady_state,
)


def make_params(**overrides):
    data = HAHNFELDT_PARAMS.to_dict()
    data.update(overrides)
    return ModelParams(**data)


class TestParams:
    def test_sign_validation(self):
        with pytest.raises(ValueError):
            ModelParams(r=-1.0, b=1.0, a_H=1.0)
        with pytest.raises(ValueError):
            ModelParams(r=1.0, b=1.0, a_H=1.0, mu=-0.1)
        with pytest.raises(ValueError):
            ModelParams(r=1.0, b=1.0, a_H=1.0, alpha=1.5)

    def test_json_round_trip(self):
        params, h = params_from_json(params_to_json(HAHNFELDT_PARAMS))
        assert params == HAHNFELDT_PARAMS
        assert h.label == "log"

    def test_json_field_names(self):
        params, _ = params_from_json(
            '{"r": 0.192, "b": 5.85, "a_H": 0.00873, "mu": 0, "alpha": 1, "h": "log"}'
        )
        assert params == HAHNFELDT_PARAMS


class TestGrowthFunction:
    def test_log_normalisation(self):
        assert LOG_GROWTH(1.0) == 0.0
        assert LOG_GROWTH.deriv(1.0) == -1.0

    def test_rejects_wrong_normalisation(self):
        with pytest.raises(ValueError):
            GrowthFunction(eval=lambda t: 2.0 - t, deriv=lambda t: -1.0, label="affine-shift")
        with pytest.raises(ValueError):
            GrowthFunction(eval=lambda t: 2.0 * (1.0 - t), deriv=lambda t: -2.0, label="steep")

    def test_rejects_increasing(self):
        with pytest.raises(ValueError):
            GrowthFunction(eval=lambda t: t - 1.0, deriv=lambda t: 1.0, label="up")

    def test_decreasing_on_log_grid(self):
        # strictly decreasing and normalised over [1e-3, 1e3]
        grid = np.logspace(-3, 3, 121)
        values = np.array([LOG_GROWTH(t) for t in grid])
        assert np.all(np.diff(values) < 0.0)


class TestSteadyState:
    def test_reference_value(self):
        # oracle: direct arithmetic ((b-mu)/a_H)**1.5
        eq = steady_state(HAHNFELDT_PARAMS)
        expected = (5.85 / 8.73e-3) ** 1.5
        assert eq.p_e == pytest.approx(expected, rel=1e-14)
        assert eq.p_e == pytest.approx(17346.6, rel=1e-4)
        assert eq.q_e == eq.p_e

    def test_substitution_into_rhs(self):
        # cross-check: the steady state zeroes the original right-hand side
        eq = steady_state(HAHNFELDT_PARAMS)
        dp, dq = rhs_original(HAHNFELDT_PARAMS, LOG_GROWTH, 1.0, 1.0, eq.p_e, eq.q_e)
        assert abs(dp) < 1e-9 * eq.p_e
        assert abs(dq) < 1e-9 * eq.q_e

    def test_balance_identity(self):
        eq = steady_state(HAHNFELDT_PARAMS)
        p = HAHNFELDT_PARAMS
        residual = p.b - p.a_H * eq.p_e ** (2.0 / 3.0) - p.mu
        assert abs(residual) < 1e-12 * p.b

    def test_no_steady_state_at_equality(self):
        with pytest.raises(NoPositiveSteadyStateError):
            steady_state(ModelParams(r=1.0, b=2.0, a_H=1.0, mu=2.0))

    def test_identity_case(self):
        params = ModelParams(r=1.0, b=2.0, a_H=1.0, mu=1.0)
        assert steady_state(params).p_e == pytest.approx(1.0)


class TestDerivedRates:
    def test_reference_values(self):
        rates = derived_rates(HAHNFELDT_PARAMS)
        assert rates.beta == pytest.approx(6.042, rel=1e-12)
        assert rates.gamma == pytest.approx(0.7488, rel=1e-12)

    def test_alpha_zero(self):
        rates = derived_rates(make_params(alpha=0.0))
        assert rates.beta == pytest.approx(0.192)
        assert rates.gamma == pytest.approx(0.7488)

    def test_degenerate_treatment(self):
        rates = derived_rates(ModelParams(r=0.5, b=2.0, a_H=1.0, mu=2.0, alpha=0.0))
        assert rates.gamma == 0.0
        assert rates.beta == 0.5


class TestRescaledRhs:
    def test_equilibrium(self):
        dx, dy = rhs_rescaled(HAHNFELDT_PARAMS, LOG_GROWTH, 1.0, 1.0, 0.0, 0.0)
        assert dx == 0.0
        assert dy == pytest.approx(0.0, abs=1e-15)

    def test_log_unit(self):
        dx, dy = rhs_rescaled(HAHNFELDT_PARAMS, LOG_GROWTH, math.e, 1.0, 0.0, 0.0)
        assert dx == pytest.approx(-HAHNFELDT_PARAMS.r)
        assert dy == pytest.approx(-HAHNFELDT_PARAMS.r)

    def test_stimulation_excess(self):
        # second convolution doubled: the extra -b*(conv2 - 1) survives
        _, dy = rhs_rescaled(HAHNFELDT_PARAMS, LOG_GROWTH, 1.0, 2.0, 0.0, 0.0)
        assert dy == pytest.approx(-HAHNFELDT_PARAMS.b)

    def test_domain_error(self):
        with pytest.raises(DomainError):
            rhs_rescaled(HAHNFELDT_PARAMS, LOG_GROWTH, 0.0, 1.0, 0.0, 0.0)

    @pytest.mark.parametrize("alpha,mu", [(1.0, 0.0), (0.5, 2.0), (0.0, 4.0)])
    def test_equilibrium_for_any_params(self, alpha, mu):
        params = make_params(alpha=alpha, mu=mu)
        dx, dy = rhs_rescaled(params, LOG_GROWTH, 1.0, 1.0, 0.0, 0.0)
        assert dx == 0.0 and abs(dy) < 1e-14 * params.b


class TestOriginalRhs:
    def test_equilibrium(self):
        eq = steady_state(HAHNFELDT_PARAMS)
        dp, dq = rhs_original(HAHNFELDT_PARAMS, LOG_GROWTH, 1.0, 1.0, eq.p_e, eq.q_e)
        assert abs(dp) < 1e-9 * eq.p_e and abs(dq) < 1e-9 * eq.q_e

    def test_no_stimulation_limit(self):
        dp, dq = rhs_original(HAHNFELDT_PARAMS, LOG_GROWTH, 1.0, 0.0, 4.0, 3.0)
        assert dq == pytest.approx(3.0 * (-HAHNFELDT_PARAMS.a_H * 4.0 ** (2.0 / 3.0)))

    def test_unit_point(self):
        dp, dq = rhs_original(HAHNFELDT_PARAMS, LOG_GROWTH, 1.0, 1.0, 1.0, 1.0)
        assert dp == 0.0
        assert dq == pytest.approx(5.85 - 8.73e-3)

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            rhs_original(HAHNFELDT_PARAMS, LOG_GROWTH, 1.0, 1.0, -1.0, 1.0)
        with pytest.raises(DomainError):
            rhs_original(HAHNFELDT_PARAMS, LOG_GROWTH, 0.0, 1.0, 1.0, 1.0)


class TestEquivariance:
    def test_chain_rule_between_coordinate_systems(self):
        # dx = dp/p and dy = dp/p - dq/q when both sides see the same convolutions
        rng = np.random.RandomState(7)
        eq = steady_state(HAHNFELDT_PARAMS)
        for _ in range(25):
            p = eq.p_e * math.exp(rng.uniform(-1, 1))
            q = eq.q_e * math.exp(rng.uniform(-1, 1))
            conv1 = math.exp(rng.uniform(-0.5, 0.5))
            conv2 = math.exp(rng.uniform(-0.5, 0.5))
            x = math.log(p / eq.p_e)
            y = math.log(p * eq.q_e / (q * eq.p_e))
            dp, dq = rhs_original(HAHNFELDT_PARAMS, LOG_GROWTH, conv1, conv2, p, q)
            dx, dy = rhs_rescaled(HAHNFELDT_PARAMS, LOG_GROWTH, conv1, conv2, x, y)
            assert dx == pytest.approx(dp / p, rel=1e-10, abs=1e-12)
            assert dy == pytest.approx(dp / p - dq / q, rel=1e-10, abs=1e-12)
