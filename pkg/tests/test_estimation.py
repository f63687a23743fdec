import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sleephmm import estimation
from sleephmm.estimation import (
    NATURAL_NAMES,
    SIZE_CAP,
    FitConfig,
    FitError,
    LogLikelihood,
    central_gradient,
    central_hessian,
    fd_step,
    fit,
    hessian_standard_errors,
    inverse_information,
    inverse_transform,
    link_derivatives,
    natural_vector,
    params_from_natural,
    relative_gradient,
    standard_errors,
    starting_values,
    transform,
)
from sleephmm.inference import log_likelihood
from sleephmm.model import EmissionParams, ModelParams, ObservationSeries
from sleephmm.simulation import (
    REFERENCE_SUBJECT_1,
    SIMULATION_PARAMS,
    make_scenario,
    simulate_observations,
)


@pytest.fixture(scope="module")
def week():
    return simulate_observations(make_scenario(2).pattern, SIMULATION_PARAMS.emission, seed=21)


@pytest.fixture(scope="module")
def fitted(week):
    return fit(week, FitConfig())


def random_natural(rng):
    emission = EmissionParams(
        mu0=math.exp(rng.uniform(-5, 5)), mu1=math.exp(rng.uniform(-5, 5)),
        s0=math.exp(rng.uniform(-5, 15)), s1=math.exp(rng.uniform(-5, 15)),
        pi0=rng.uniform(1e-6, 1 - 1e-6), pi1=rng.uniform(1e-6, 1 - 1e-6),
    )
    return ModelParams(emission, *rng.normal(0, 10, 6), delta1=rng.uniform(1e-6, 1 - 1e-6))


class TestTransform:
    def test_examples(self):
        p = REFERENCE_SUBJECT_1
        theta = transform(replace(p, emission=replace(p.emission, pi0=0.5), delta1=0.099))
        assert theta[4] == 0.0
        assert theta[0] == pytest.approx(math.log(5.19), rel=1e-15)
        assert theta[6] == pytest.approx(math.log(0.099 / 0.901), rel=1e-14)
        np.testing.assert_array_equal(theta[7:], [8.54, -6.21, -5.49, 7.31, 3.36, 1.06])

    def test_round_trip(self, rng):
        worst = 0.0
        for _ in range(1000):
            p = random_natural(rng)
            back = natural_vector(inverse_transform(transform(p)))
            nat = natural_vector(p)
            worst = max(worst, float(np.max(np.abs(back - nat) / np.maximum(1.0, np.abs(nat)))))
        assert worst <= 1e-12

    def test_boundary_is_an_error(self):
        # EmissionParams rejects pi on the boundary, so bypass its validation
        e = replace(REFERENCE_SUBJECT_1.emission)
        object.__setattr__(e, "pi1", 1.0)
        with pytest.raises(ValueError, match="pi1"):
            transform(replace(REFERENCE_SUBJECT_1, emission=e))

    def test_inverse_validates(self):
        with pytest.raises(ValueError):
            inverse_transform(np.zeros(12))
        bad = np.zeros(13)
        bad[3] = np.nan
        with pytest.raises(ValueError, match="log_s1"):
            inverse_transform(bad)

    def test_link_derivatives(self, rng):
        theta = transform(random_natural(rng))
        theta[:4] = np.clip(theta[:4], -3, 3)
        for i in range(13):
            def nat(v, i=i):
                t = theta.copy()
                t[i] = v[0]
                return natural_vector(inverse_transform(t))[i]
            d = central_gradient(nat, theta[i:i + 1])[0]
            assert link_derivatives(theta)[i] == pytest.approx(d, rel=1e-7, abs=1e-12)

    def test_natural_round_trip(self):
        p = REFERENCE_SUBJECT_1
        assert params_from_natural(natural_vector(p)) == p
        with pytest.raises(ValueError):
            params_from_natural([1.0] * 12)


class TestFiniteDifferences:
    @settings(max_examples=30, deadline=None)
    @given(st.lists(st.floats(-3, 3), min_size=3, max_size=3))
    def test_gradient_of_smooth_function(self, x):
        x = np.array(x)

        def f(v):
            return math.sin(v[0]) * v[1] ** 2 + math.exp(0.3 * v[2])

        exact = [math.cos(x[0]) * x[1] ** 2, 2 * math.sin(x[0]) * x[1], 0.3 * math.exp(0.3 * x[2])]
        np.testing.assert_allclose(central_gradient(f, x), exact, rtol=1e-7, atol=1e-8)

    def test_hessian_of_quadratic(self, rng):
        a = rng.normal(size=(5, 5))
        A = a @ a.T + 5 * np.eye(5)
        x0 = rng.normal(size=5)
        H = central_hessian(lambda v: 0.5 * (v - 1) @ A @ (v - 1), x0)
        np.testing.assert_allclose(H, A, rtol=1e-6, atol=1e-6)

    def test_two_stencils_agree_on_loglik(self, week, rng):
        objective = LogLikelihood(week)
        base = transform(SIMULATION_PARAMS)
        for _ in range(3):
            x = base + rng.normal(0, 0.1, 13)
            g1 = central_gradient(objective, x, fd_step(x, np.finfo(float).eps ** (1 / 3)))
            g2 = central_gradient(objective, x, fd_step(x, 1e-4))
            assert np.max(np.abs(g1 - g2)) <= 1e-4 * max(1.0, np.max(np.abs(g1)))

    def test_relative_gradient_ignores_active_bounds(self):
        g = np.array([1e-3, -2.0, 3.0])
        x = np.array([10.0, 0.0, 5.0])
        lo = np.array([-np.inf, 0.0, -np.inf])
        hi = np.array([np.inf, np.inf, 5.0])
        assert relative_gradient(g, x, 1e4, lo, hi) == pytest.approx(1e-6)
        assert relative_gradient(g, x, 1e4) == pytest.approx(1.5e-3)


class TestStandardErrors:
    def test_quadratic_oracle(self, rng):
        a = rng.normal(size=(4, 4))
        A = a @ a.T + np.eye(4)
        x0 = rng.normal(size=4)
        result = hessian_standard_errors(lambda v: 0.5 * (v - x0) @ A @ (v - x0) + 7.0, x0)
        np.testing.assert_allclose(result.se, np.sqrt(np.diag(np.linalg.inv(A))), rtol=1e-6)
        assert result.positive_definite and result.available.all()

    def test_non_positive_definite_is_flagged(self):
        H = np.diag([4.0, 1.0, -2.0])
        result = inverse_information(H)
        assert not result.positive_definite
        np.testing.assert_array_equal(result.available, [True, True, False])
        np.testing.assert_allclose(result.se[:2], [0.5, 1.0])
        assert np.isnan(result.se[2])

    def test_singular_direction_flags_both_coordinates(self):
        H = np.array([[1.0, 1.0, 0.0], [1.0, 1.0, 0.0], [0.0, 0.0, 9.0]])
        result = inverse_information(H)
        np.testing.assert_array_equal(result.available, [False, False, True])
        assert result.se[2] == pytest.approx(1 / 3)

    def test_delta_method_near_boundary(self):
        # logit-scale SE of 1 maps to p(1 - p) on the natural scale
        theta = transform(REFERENCE_SUBJECT_1)
        theta[5] = 20.0
        p = 1 / (1 + math.exp(-20.0))
        assert link_derivatives(theta)[5] == pytest.approx(p * (1 - p))
        assert link_derivatives(theta)[5] < 1e-8

    def test_fixed_delta_has_twelve_entries(self, week):
        se = standard_errors(week, SIMULATION_PARAMS, fix_delta1=0.9)
        assert len(se.se) == 12 and "delta1" not in se.names


class TestStartingValues:
    @staticmethod
    def constructed(night_counts, day_counts, night_report=1.0, day_report=0.0, days=2):
        activity = np.full(days * 1440, 3.0)
        report = np.full(days * 1440, np.nan)
        clock = np.arange(days * 1440) % 1440
        night = (clock >= 60) & (clock < 360)
        day = (clock >= 780) & (clock < 1080)
        activity[night] = np.resize(night_counts, night.sum())
        activity[day] = np.resize(day_counts, day.sum())
        report[night] = night_report
        report[day] = day_report
        return ObservationSeries(activity, report)

    def test_moment_oracle(self):
        night = np.array([0, 0, 1, 5, 0, 2])
        day = np.array([4, 6, 5, 9, 2, 5])
        s = starting_values(self.constructed(night, day))
        n = np.resize(night, 600)
        d = np.resize(day, 600)
        assert s.emission.mu1 == pytest.approx(n.mean())
        assert s.emission.mu0 == pytest.approx(d.mean())
        v = n.var(ddof=1)
        assert s.emission.s1 == pytest.approx(n.mean() ** 2 / (v - n.mean()))
        assert s.alpha == (8.0, -5.0, -3.0) and s.beta == (7.5, 4.0, 2.0)
        assert s.delta1 == 0.9

    def test_underdispersed_window_caps_size(self):
        s = starting_values(self.constructed(np.array([1, 2]), np.array([5, 5, 6])))
        assert s.emission.s1 == SIZE_CAP and s.emission.s0 == SIZE_CAP

    def test_report_rates_are_clamped(self):
        s = starting_values(self.constructed(np.array([0, 3]), np.array([5, 9])))
        assert s.emission.pi1 == 0.99 and s.emission.pi0 == 0.01

    def test_missing_reports_fall_back(self):
        s = starting_values(self.constructed(np.array([0, 3]), np.array([5, 9]), np.nan, np.nan))
        assert (s.emission.pi0, s.emission.pi1) == (0.1, 0.9)

    def test_phase_sets_initial_probability(self):
        series = simulate_observations(make_scenario(1).pattern[:2880], seed=1)
        shifted = ObservationSeries(series.activity, series.self_report, start_phase=300)
        assert starting_values(shifted).delta1 == 0.5

    def test_empty_window_is_an_error(self):
        series = self.constructed(np.array([0, 3]), np.array([5, 9]))
        activity = series.activity.copy()
        activity[(series.clock_minute >= 60) & (series.clock_minute < 360)] = np.nan
        with pytest.raises(FitError, match="night"):
            starting_values(ObservationSeries(activity, series.self_report))

    def test_short_series_is_an_error(self):
        with pytest.raises(FitError, match="full day"):
            starting_values(ObservationSeries(np.zeros(100), np.zeros(100)))


class TestFitConfig:
    @pytest.mark.parametrize("kwargs", [
        {"gradient_tolerance": 0.0}, {"step_tolerance": -1.0}, {"max_iterations": 0},
        {"multistart": 0}, {"fix_delta1": 1.0}, {"fd_relative_step": 0.0},
    ])
    def test_validation(self, kwargs):
        with pytest.raises(ValueError):
            FitConfig(**kwargs)


class TestFit:
    def test_converges_and_recovers(self, fitted):
        assert fitted.converged
        assert fitted.gradient_norm <= 1e-6
        e = fitted.params_hat.emission
        assert e.mu0 == pytest.approx(5.19, rel=0.1)
        assert e.mu1 == pytest.approx(1.31, rel=0.1)
        assert abs(e.pi1 - 0.95) <= 0.05 and abs(e.pi0 - 0.05) <= 0.05

    def test_ascent_and_dominance(self, week, fitted):
        assert fitted.log_likelihood >= fitted.start_log_likelihood - 1e-8
        assert fitted.log_likelihood >= log_likelihood(week, SIMULATION_PARAMS)
        assert fitted.log_likelihood == pytest.approx(log_likelihood(week, fitted.params_hat), rel=1e-12)

    def test_standard_errors(self, fitted):
        se = fitted.se
        assert se.names == NATURAL_NAMES
        assert np.all(se.se[se.available] >= 0)
        assert np.all(np.isnan(se.se[~se.available]))
        if not se.positive_definite:
            assert any("not positive definite" in n for n in fitted.notes)

    def test_deterministic(self, week, fitted):
        again = fit(week, FitConfig())
        assert again.log_likelihood == fitted.log_likelihood
        assert again.params_hat == fitted.params_hat

    def test_start_at_truth_does_not_descend(self, week):
        result = fit(week, FitConfig(start=SIMULATION_PARAMS, compute_se=False))
        assert result.log_likelihood >= log_likelihood(week, SIMULATION_PARAMS) - 1e-8

    def test_multistart_agrees(self, week, fitted):
        result = fit(week, FitConfig(multistart=2, seed=3, compute_se=False))
        assert result.log_likelihood >= fitted.log_likelihood - 1e-6
        np.testing.assert_allclose(natural_vector(result.params_hat)[[0, 1, 4, 5]],
                                   natural_vector(fitted.params_hat)[[0, 1, 4, 5]], rtol=1e-3)

    def test_fixed_delta(self, week):
        result = fit(week, FitConfig(fix_delta1=0.9))
        assert result.params_hat.delta1 == pytest.approx(0.9, abs=1e-15)
        assert len(result.se.se) == 12

    def test_iteration_cap_reports_non_convergence(self, week, caplog):
        result = fit(week, FitConfig(max_iterations=2, compute_se=False))
        assert not result.converged
        assert "did not converge" in caplog.text

    def test_non_finite_start_names_parameter(self, week, monkeypatch):
        monkeypatch.setattr(estimation, "forward_loglik_circadian", lambda *a: -np.inf)
        with pytest.raises(FitError, match="offending parameter"):
            fit(week, FitConfig(compute_se=False))
