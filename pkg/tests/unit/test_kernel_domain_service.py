import math

import numpy as np
import pytest

from domain.entities.stable_spline_kernel import StableSplineKernel
from domain.value_objects.kernel_factors import TriFactor, TridiagInverse
from infrastructure.exceptions import (
    DimensionMismatchException,
    OverflowGuardException,
    ValidationException,
)


class TestStableSplineKernel:

    def test_dense_matrix_n3(self):
        expected = [[0.5, 0.25, 0.125], [0.25, 0.25, 0.125], [0.125, 0.125, 0.125]]
        np.testing.assert_array_equal(StableSplineKernel(3, 0.5).to_dense(), expected)

    def test_single_entry(self):
        np.testing.assert_allclose(StableSplineKernel(1, 0.3, 2.0).to_dense(), [[0.6]])

    def test_entry_uses_one_based_indices(self):
        kernel = StableSplineKernel(4, 0.5, 2.0)
        assert kernel.entry(1, 1) == 1.0
        assert kernel.entry(2, 4) == 2.0 * 0.5 ** 4
        with pytest.raises(ValidationException):
            kernel.entry(0, 1)

    @pytest.mark.parametrize("alpha", [0.0, 1.0, -0.1, 1.5, float("nan")])
    def test_rejects_alpha_outside_open_interval(self, alpha):
        with pytest.raises(ValidationException) as exc_info:
            StableSplineKernel(3, alpha)
        assert exc_info.value.field == "alpha"

    @pytest.mark.parametrize("lam", [0.0, -1.0, float("inf")])
    def test_rejects_non_positive_lambda(self, lam):
        with pytest.raises(ValidationException) as exc_info:
            StableSplineKernel(3, 0.5, lam)
        assert exc_info.value.field == "lambda"

    @pytest.mark.parametrize("n", [0, -2, 2.5, True])
    def test_rejects_bad_order(self, n):
        with pytest.raises(ValidationException):
            StableSplineKernel(n, 0.5)

    def test_scaling_law_is_exact(self):
        base = StableSplineKernel(6, 0.7).to_dense()
        np.testing.assert_array_equal(StableSplineKernel(6, 0.7, 4.0).to_dense(), 4.0 * base)

    def test_is_immutable(self):
        kernel = StableSplineKernel(2, 0.5)
        with pytest.raises(AttributeError):
            kernel.alpha = 0.4


class TestBuildKernel:

    def test_symmetric_positive_definite(self, kernel_service):
        K = kernel_service.build_kernel(15, 0.9, 3.0)
        np.testing.assert_array_equal(K, K.T)
        assert np.linalg.eigvalsh(K)[0] > 0

    def test_n2(self, kernel_service):
        np.testing.assert_array_equal(kernel_service.build_kernel(2, 0.5, 1.0), [[0.5, 0.25], [0.25, 0.25]])

    def test_domain_error(self, kernel_service):
        with pytest.raises(ValidationException):
            kernel_service.build_kernel(0, 0.5, 1.0)


class TestFactorize:

    def test_weights_n3(self, kernel_service):
        factor = kernel_service.factorize(StableSplineKernel(3, 0.5))
        np.testing.assert_allclose(factor.w, [0.25, 0.125, 0.125], rtol=1e-15)

    def test_weights_n1(self, kernel_service):
        np.testing.assert_allclose(kernel_service.factorize(StableSplineKernel(1, 0.3, 2.0)).w, [0.6])

    def test_weights_scale_with_lambda(self, kernel_service):
        factor = kernel_service.factorize(StableSplineKernel(2, 0.5, 2.0))
        np.testing.assert_allclose(factor.w, [0.5, 0.5])
        np.testing.assert_allclose(factor.reconstruct(), [[1.0, 0.5], [0.5, 0.5]])

    @pytest.mark.parametrize("alpha", [0.1, 0.5, 0.9])
    @pytest.mark.parametrize("lam", [0.5, 1.0, 10.0])
    def test_reconstruction(self, kernel_service, alpha, lam):
        kernel = StableSplineKernel(25, alpha, lam)
        factor = kernel_service.factorize(kernel)
        np.testing.assert_allclose(factor.reconstruct(), kernel.to_dense(), rtol=1e-12, atol=0)

    def test_dict_holds_only_weights(self, kernel_service):
        assert set(kernel_service.factorize(StableSplineKernel(4, 0.2, 0.5)).to_dict()) == {"n", "w"}

    def test_dense_product_with_upper_factor(self, kernel_service):
        kernel = StableSplineKernel(5, 0.6, 1.5)
        factor = kernel_service.factorize(kernel)
        U = np.triu(np.ones((5, 5)))
        np.testing.assert_allclose(U @ np.diag(factor.w) @ U.T, kernel.to_dense(), rtol=1e-13)

    def test_log_det_of_factor(self, kernel_service):
        kernel = StableSplineKernel(8, 0.4, 3.0)
        assert kernel_service.factorize(kernel).log_det() == pytest.approx(kernel_service.log_det(kernel), rel=1e-13)

    def test_underflow_guard(self, kernel_service):
        with pytest.raises(OverflowGuardException):
            kernel_service.factorize(StableSplineKernel(2000, 0.5))

    def test_factor_validation(self):
        with pytest.raises(ValidationException):
            TriFactor(2, [0.5, 0.0])
        with pytest.raises(DimensionMismatchException):
            TriFactor(3, [0.5, 0.5])


class TestInverseClosedForm:

    def test_n2(self, kernel_service):
        inverse = kernel_service.inverse_closed_form(StableSplineKernel(2, 0.5))
        np.testing.assert_allclose(inverse.diag, [4.0, 8.0])
        np.testing.assert_allclose(inverse.offdiag, [-4.0])

    def test_n1(self, kernel_service):
        inverse = kernel_service.inverse_closed_form(StableSplineKernel(1, 0.3, 2.0))
        np.testing.assert_allclose(inverse.diag, [1 / 0.6])
        assert inverse.offdiag.shape == (0,)

    def test_n3_matches_dense_solve(self, kernel_service):
        kernel = StableSplineKernel(3, 0.5)
        inverse = kernel_service.inverse_closed_form(kernel)
        np.testing.assert_allclose(inverse.diag, [4.0, 12.0, 16.0])
        np.testing.assert_allclose(inverse.offdiag, [-4.0, -8.0])
        np.testing.assert_allclose(inverse.to_dense(), np.linalg.inv(kernel.to_dense()), rtol=1e-12)

    def test_matches_scaled_pattern(self, kernel_service):
        alpha, lam, n = 0.7, 2.0, 5
        inverse = kernel_service.inverse_closed_form(StableSplineKernel(n, alpha, lam))
        c = 1.0 / (lam * (alpha - alpha ** 2))
        expected_diag = [1.0] + [alpha ** -(j - 1) + alpha ** -j for j in range(1, n - 1)] \
            + [alpha ** -(n - 2) + (1 - alpha) / alpha ** (n - 1)]
        expected_off = [-alpha ** -j for j in range(n - 1)]
        np.testing.assert_allclose(inverse.diag, c * np.array(expected_diag), rtol=1e-13)
        np.testing.assert_allclose(inverse.offdiag, c * np.array(expected_off), rtol=1e-13)

    @pytest.mark.parametrize("alpha", [0.2, 0.5, 0.8])
    @pytest.mark.parametrize("lam", [0.5, 1.0, 10.0])
    def test_inverse_identity(self, kernel_service, alpha, lam):
        kernel = StableSplineKernel(30, alpha, lam)
        product = kernel_service.inverse_closed_form(kernel).matvec(kernel.to_dense())
        assert np.abs(product - np.eye(30)).max() < 1e-8

    def test_sign_pattern(self, kernel_service):
        inverse = kernel_service.inverse_closed_form(StableSplineKernel(10, 0.3, 0.5))
        assert np.all(inverse.diag > 0)
        assert np.all(inverse.offdiag < 0)

    def test_overflow_guard(self, kernel_service):
        with pytest.raises(OverflowGuardException) as exc_info:
            kernel_service.inverse_closed_form(StableSplineKernel(800, 0.3))
        assert exc_info.value.error_code == "OVERFLOW_GUARD"

    def test_banded_storage_solves(self, kernel_service):
        from scipy.linalg import solveh_banded
        kernel = StableSplineKernel(6, 0.6, 2.0)
        inverse = kernel_service.inverse_closed_form(kernel)
        v = np.arange(1.0, 7.0)
        # Solving with K^-1 applies K
        np.testing.assert_allclose(solveh_banded(inverse.to_banded(), v), kernel.to_dense() @ v, rtol=1e-10)

    def test_tridiag_shape_validation(self):
        with pytest.raises(DimensionMismatchException):
            TridiagInverse(3, [1.0, 2.0, 3.0], [1.0])


class TestLogDet:

    def test_n2(self, kernel_service):
        assert kernel_service.log_det(StableSplineKernel(2, 0.5)) == pytest.approx(math.log(0.0625), abs=1e-14)

    def test_n1(self, kernel_service):
        assert kernel_service.log_det(StableSplineKernel(1, 0.3, 2.0)) == pytest.approx(math.log(0.6), abs=1e-14)

    def test_n3(self, kernel_service):
        assert kernel_service.log_det(StableSplineKernel(3, 0.5)) == pytest.approx(math.log(0.00390625), abs=1e-14)

    @pytest.mark.parametrize("n", [1, 5, 12])
    def test_matches_dense_determinant(self, kernel_service, n):
        kernel = StableSplineKernel(n, 0.8, 10.0)
        sign, dense = np.linalg.slogdet(kernel.to_dense())
        assert sign > 0
        assert abs(kernel_service.log_det(kernel) - dense) < 1e-8

    def test_large_order_stays_finite(self, kernel_service):
        value = kernel_service.log_det(StableSplineKernel(200, 0.2, 0.5))
        assert math.isfinite(value)
        assert value == pytest.approx(200 * math.log(0.5) + 199 * math.log(0.8) + 20100 * math.log(0.2))


class TestFastProducts:

    def test_solve_inverse_first_column(self, kernel_service):
        kernel = StableSplineKernel(2, 0.5)
        np.testing.assert_allclose(kernel_service.solve_inverse(kernel, [1.0, 0.0]), [4.0, -4.0])

    def test_solve_inverse_of_kernel_column(self, kernel_service):
        kernel = StableSplineKernel(2, 0.5)
        np.testing.assert_allclose(kernel_service.solve_inverse(kernel, [0.5, 0.25]), [1.0, 0.0], atol=1e-15)

    def test_solve_inverse_zero(self, kernel_service):
        np.testing.assert_array_equal(kernel_service.solve_inverse(StableSplineKernel(7, 0.4), np.zeros(7)), 0.0)

    def test_solve_inverse_matches_dense(self, kernel_service):
        kernel = StableSplineKernel(30, 0.8, 10.0)
        v = np.random.default_rng(0).standard_normal(30)
        expected = np.linalg.solve(kernel.to_dense(), v)
        np.testing.assert_allclose(kernel_service.solve_inverse(kernel, v), expected, rtol=1e-8,
                                   atol=1e-8 * np.abs(expected).max())

    def test_solve_inverse_dimension_mismatch(self, kernel_service):
        with pytest.raises(DimensionMismatchException):
            kernel_service.solve_inverse(StableSplineKernel(3, 0.5), [1.0, 2.0])

    def test_apply_kernel(self, kernel_service):
        kernel = StableSplineKernel(9, 0.6, 2.0)
        v = np.random.default_rng(1).standard_normal((9, 2))
        np.testing.assert_allclose(kernel_service.apply_kernel(kernel, v), kernel.to_dense() @ v, rtol=1e-12)
        np.testing.assert_allclose(kernel_service.apply_kernel(kernel, v[:, 0]), kernel.to_dense() @ v[:, 0],
                                   rtol=1e-12)

    def test_apply_then_solve_round_trip(self, kernel_service):
        kernel = StableSplineKernel(12, 0.5)
        v = np.linspace(-1.0, 1.0, 12)
        np.testing.assert_allclose(kernel_service.solve_inverse(kernel, kernel_service.apply_kernel(kernel, v)),
                                   v, atol=1e-10)


class TestColumnSums:

    @pytest.mark.parametrize("n", [1, 2, 3, 20])
    def test_first_columns_sum_to_zero(self, kernel_service, n):
        assert kernel_service.columns_sum_check(StableSplineKernel(n, 0.5))

    def test_n3_second_column(self, kernel_service):
        sums = kernel_service.inverse_closed_form(StableSplineKernel(3, 0.5)).column_sums()
        np.testing.assert_allclose(sums[:2], [0.0, 0.0], atol=1e-12)
        # The last column keeps the boundary weight: -8 + 16
        assert sums[2] == pytest.approx(8.0)

    def test_column_max_reads_three_diagonals(self):
        inverse = TridiagInverse(3, [1.0, 2.0, 1.0], [-5.0, 3.0])
        np.testing.assert_array_equal(inverse.column_max_abs(), [5.0, 5.0, 3.0])
        np.testing.assert_array_equal(TridiagInverse(1, [-2.0], []).column_max_abs(), [2.0])

    def test_check_never_materializes_the_inverse(self, kernel_service, mocker):
        mocker.patch.object(TridiagInverse, "to_dense", side_effect=AssertionError("dense inverse built"))
        assert kernel_service.columns_sum_check(StableSplineKernel(150, 0.9))
