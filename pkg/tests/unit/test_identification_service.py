import math

import numpy as np
import pytest

from domain.entities.stable_spline_kernel import StableSplineKernel
from domain.entities.sysid_dataset import SysIdDataset
from domain.value_objects.hyperparams import Hyperparams, ImpulseEstimate
from infrastructure.exceptions import (
    CholeskyFailureException,
    DimensionMismatchException,
    OverflowGuardException,
    ValidationException,
)
from services.identification_service import LikelihoodProblem


def identity_problem(y) -> LikelihoodProblem:
    """Likelihood terms for G = I, which no causal dataset produces."""
    y = np.asarray(y, dtype=float)
    G = np.eye(y.shape[0])
    return LikelihoodProblem(G=G, GU=np.cumsum(G, axis=1), GtG=G.T @ G, Gty=G.T @ y, y=y, yty=float(y @ y))


def impulse_data(y) -> SysIdDataset:
    u = np.zeros(len(y))
    u[0] = 1.0
    return SysIdDataset(u, y)


class TestSysIdDataset:

    def test_sizes(self):
        data = SysIdDataset([1.0, 2.0, 3.0, 4.0], [0.0, 1.0, 2.0])
        assert data.N == 3
        assert data.default_fir_order() == 1
        assert SysIdDataset(np.ones(400), np.ones(400)).default_fir_order() == 100

    def test_input_shorter_than_output(self):
        with pytest.raises(DimensionMismatchException):
            SysIdDataset([1.0], [0.0, 1.0])

    def test_non_finite(self):
        with pytest.raises(ValidationException):
            SysIdDataset([1.0, np.nan], [0.0, 1.0])

    def test_degenerate_input(self):
        assert SysIdDataset([0.0, 0.0, 5.0], [0.0, 0.0, 0.0]).is_degenerate()
        assert not SysIdDataset([1.0, 0.0, 0.0], [0.0, 0.0, 0.0]).is_degenerate()


class TestHyperparams:

    def test_unconstrained_round_trip(self):
        h = Hyperparams(0.8, 2.5, 0.01)
        restored = Hyperparams.from_unconstrained(h.to_unconstrained())
        assert restored.alpha == pytest.approx(0.8)
        assert restored.lam == pytest.approx(2.5)
        assert restored.sigma2 == pytest.approx(0.01)

    def test_extreme_coordinates_stay_valid(self):
        h = Hyperparams.from_unconstrained([1e4, -1e4, 1e4])
        assert 0.0 < h.alpha < 1.0
        assert h.lam > 0.0 and math.isfinite(h.sigma2)

    @pytest.mark.parametrize("field, values", [
        ("alpha", (1.0, 1.0, 1.0)),
        ("lambda", (0.5, 0.0, 1.0)),
        ("sigma2", (0.5, 1.0, -1.0)),
    ])
    def test_domain(self, field, values):
        with pytest.raises(ValidationException) as exc_info:
            Hyperparams(*values)
        assert exc_info.value.field == field

    def test_estimate_to_dict(self):
        estimate = ImpulseEstimate([1.0, 0.5], Hyperparams(0.5, 1.0, 0.1), 3.0)
        assert estimate.n == 2
        assert estimate.to_dict() == {"alpha": 0.5, "lambda": 1.0, "sigma2": 0.1, "objective": 3.0,
                                      "f_hat": [1.0, 0.5]}


class TestConvolutionOperator:

    def test_impulse_input_shifts(self, identification_service):
        G = identification_service.build_convolution_operator([1.0, 0.0, 0.0], 3, 3)
        np.testing.assert_array_equal(G, [[0, 0, 0], [1, 0, 0], [0, 1, 0]])

    def test_zero_input(self, identification_service):
        np.testing.assert_array_equal(identification_service.build_convolution_operator(np.zeros(5), 5, 2), 0.0)

    def test_lag_table(self, identification_service):
        G = identification_service.build_convolution_operator([1.0, 1.0, 1.0], 3, 2)
        np.testing.assert_array_equal(G, [[0, 0], [1, 0], [1, 1]])

    def test_general_entries(self, identification_service):
        u = np.arange(1.0, 8.0)
        G = identification_service.build_convolution_operator(u, 7, 4)
        for t in range(1, 8):
            for k in range(1, 5):
                expected = u[t - k - 1] if t - k >= 1 else 0.0
                assert G[t - 1, k - 1] == expected

    def test_dimension_checks(self, identification_service):
        with pytest.raises(ValidationException):
            identification_service.build_convolution_operator([1.0], 0, 2)
        with pytest.raises(ValidationException):
            identification_service.build_convolution_operator([1.0], 1, 0)
        with pytest.raises(DimensionMismatchException):
            identification_service.build_convolution_operator([1.0], 4, 2)


class TestOutputCovariance:

    def test_zero_operator(self, identification_service):
        covariance = identification_service.output_covariance(Hyperparams(0.5, 1.0, 0.3), np.zeros((4, 2)))
        np.testing.assert_allclose(covariance, 0.3 * np.eye(4))

    def test_identity_operator(self, identification_service):
        h = Hyperparams(0.6, 2.0, 0.1)
        covariance = identification_service.output_covariance(h, np.eye(5))
        np.testing.assert_allclose(covariance, h.kernel(5).to_dense() + 0.1 * np.eye(5), rtol=1e-14)

    def test_impulse_operator(self, identification_service):
        G = identification_service.build_convolution_operator([1.0, 0.0, 0.0], 3, 3)
        covariance = identification_service.output_covariance(Hyperparams(0.5, 1.0, 0.1), G)
        assert covariance[1, 1] == pytest.approx(0.6)
        assert covariance[0, 0] == pytest.approx(0.1)
        assert covariance[1, 2] == pytest.approx(0.25)
        np.testing.assert_array_equal(covariance, covariance.T)


class TestMarginalLikelihood:

    def test_zero_data_unit_noise(self, identification_service):
        data = SysIdDataset(np.zeros(4), np.zeros(4))
        assert identification_service.marginal_likelihood(Hyperparams(0.5, 1.0, 1.0), data, 2) == pytest.approx(0.0)

    def test_zero_output_is_log_det(self, identification_service, simulation_service):
        h = Hyperparams(0.7, 2.0, 0.3)
        u = simulation_service.white_noise_input(12, seed=1)
        data = SysIdDataset(u, np.zeros(12))
        covariance = identification_service.output_covariance(
            h, identification_service.build_convolution_operator(u, 12, 4))
        expected = np.linalg.slogdet(covariance)[1]
        assert identification_service.marginal_likelihood(h, data, 4) == pytest.approx(expected, rel=1e-12)

    def test_identity_operator_oracle(self, identification_service):
        h = Hyperparams(0.5, 1.0, 0.5)
        sigma_y = np.array([[1.0, 0.25], [0.25, 0.75]])
        expected = math.log(np.linalg.det(sigma_y)) + np.linalg.inv(sigma_y)[0, 0]
        problem = identity_problem([1.0, 0.0])
        assert identification_service.objective(h, problem, "data") == pytest.approx(expected, rel=1e-12)
        assert identification_service.objective(h, problem, "weight") == pytest.approx(expected, rel=1e-12)

    def test_forms_agree(self, identification_service, white_noise_problem):
        data, n, h, _ = white_noise_problem
        problem = identification_service.prepare(data, n)
        data_space = identification_service.objective(h, problem, "data")
        weight_space = identification_service.objective(h, problem, "weight")
        auto = identification_service.objective(h, problem, "auto")
        assert weight_space == pytest.approx(data_space, rel=1e-6)
        assert auto == weight_space

    @pytest.mark.parametrize("failure", [
        OverflowGuardException("alpha^-(n-1)/lambda", 800.0),
        CholeskyFailureException("K^-1 + G^T G / sigma2"),
    ])
    def test_auto_falls_back_to_data_space(self, identification_service, white_noise_problem, mocker, failure):
        data, n, h, _ = white_noise_problem
        problem = identification_service.prepare(data, n)
        mocker.patch.object(identification_service, "_weight_space_objective", side_effect=failure)
        assert identification_service.objective(h, problem, "auto") == identification_service.objective(
            h, problem, "data")

    def test_auto_uses_data_space_when_underdetermined(self, identification_service, mocker):
        data = SysIdDataset(np.random.default_rng(5).standard_normal(6), np.ones(6))
        problem = identification_service.prepare(data, 8)
        weight = mocker.spy(identification_service, "_weight_space_objective")
        identification_service.objective(Hyperparams(0.5, 1.0, 0.1), problem, "auto")
        weight.assert_not_called()

    def test_unknown_method(self, identification_service, impulse_dataset):
        with pytest.raises(ValidationException):
            identification_service.marginal_likelihood(Hyperparams(0.5, 1.0, 1.0), impulse_dataset, 2, "exact")


class TestEstimate:

    def test_zero_output(self, identification_service):
        data = SysIdDataset(np.random.default_rng(0).standard_normal(20), np.zeros(20))
        estimate = identification_service.estimate_impulse_response(data, 5, Hyperparams(0.5, 1.0, 0.1))
        np.testing.assert_array_equal(estimate.f_hat, 0.0)
        assert estimate.n == 5

    def test_two_lag_oracle(self, identification_service):
        h = Hyperparams(0.5, 1.0, 0.5)
        K = StableSplineKernel(2, 0.5).to_dense()
        expected = K @ np.linalg.solve(K + 0.5 * np.eye(2), [1.0, 1.0])
        # Impulse input: the first output sees no input, the rest see G = I
        estimate = identification_service.estimate_impulse_response(impulse_data([0.0, 1.0, 1.0]), 2, h)
        np.testing.assert_allclose(estimate.f_hat, expected, rtol=1e-13)
        assert estimate.hyperparams_used == h

    def test_objective_matches_likelihood(self, identification_service, white_noise_problem):
        data, n, h, _ = white_noise_problem
        estimate = identification_service.estimate_impulse_response(data, n, h)
        assert estimate.objective_value == pytest.approx(identification_service.marginal_likelihood(h, data, n))

    def test_dual_forms(self, identification_service, white_noise_problem):
        data, n, h, _ = white_noise_problem
        assert identification_service.dual_form_discrepancy(data, n, h) < 1e-6

    def test_dense_formula(self, identification_service, white_noise_problem):
        data, n, h, _ = white_noise_problem
        G = identification_service.build_convolution_operator(data.u, data.N, n)
        K = h.kernel(n).to_dense()
        expected = K @ G.T @ np.linalg.solve(G @ K @ G.T + h.sigma2 * np.eye(data.N), data.y)
        np.testing.assert_allclose(identification_service.estimate_impulse_response(data, n, h).f_hat,
                                   expected, rtol=1e-8, atol=1e-10)

    def test_shrinkage_limit(self, identification_service):
        data = impulse_data([0.0, 1.0, -0.5, 0.25])
        small = identification_service.estimate_impulse_response(data, 3, Hyperparams(0.5, 1.0, 1.0)).f_hat
        large = identification_service.estimate_impulse_response(data, 3, Hyperparams(0.5, 1.0, 1e6)).f_hat
        assert np.linalg.norm(large) / np.linalg.norm(small) < 1e-3

    def test_shrinkage_is_monotone(self, identification_service):
        data = impulse_data([0.0, 1.0, 0.8, 0.3, -0.2, 0.1])
        norms = [np.linalg.norm(identification_service.estimate_impulse_response(
            data, 5, Hyperparams(0.7, 1.0, s)).f_hat) for s in np.geomspace(1e-4, 1e4, 17)]
        assert all(later <= earlier * (1 + 1e-12) for earlier, later in zip(norms, norms[1:]))

    def test_noiseless_consistency(self, identification_service, simulation_service):
        n, N = 12, 60
        h = Hyperparams(0.8, 1.0, 1e-8)
        f_true = simulation_service.sample_prior_impulse_response(h.kernel(n), seed=21)
        u = simulation_service.white_noise_input(N, seed=22)
        data = simulation_service.simulate_dataset(f_true, u, N, h.sigma2, seed=23)
        f_hat = identification_service.estimate_impulse_response(data, n, h).f_hat
        assert np.linalg.norm(f_hat - f_true) / np.linalg.norm(f_true) < 0.05

    def test_posterior_covariance(self, identification_service, white_noise_problem):
        data, n, h, _ = white_noise_problem
        G = identification_service.build_convolution_operator(data.u, data.N, n)
        K = h.kernel(n).to_dense()
        gain = K @ G.T @ np.linalg.inv(G @ K @ G.T + h.sigma2 * np.eye(data.N))
        expected = K - gain @ G @ K
        covariance = identification_service.posterior_covariance(data, n, h)
        np.testing.assert_allclose(covariance, expected, atol=1e-8 * np.abs(K).max())
        assert np.linalg.eigvalsh(covariance)[0] > 0


class TestFitPercentage:

    def test_perfect_fit(self, identification_service):
        assert identification_service.fit_percentage([1.0, 0.5], [1.0, 0.5]) == 100.0

    def test_zero_estimate(self, identification_service):
        assert identification_service.fit_percentage([0.0, 0.0], [3.0, 4.0]) == pytest.approx(0.0)

    def test_partial_fit(self, identification_service):
        assert identification_service.fit_percentage([3.0, 3.0], [3.0, 4.0]) == pytest.approx(80.0)

    def test_errors(self, identification_service):
        with pytest.raises(DimensionMismatchException):
            identification_service.fit_percentage([1.0], [1.0, 2.0])
        with pytest.raises(ValidationException):
            identification_service.fit_percentage([1.0, 2.0], [0.0, 0.0])
