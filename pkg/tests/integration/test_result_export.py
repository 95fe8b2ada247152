import json
from io import StringIO

import numpy as np
import pandas as pd
import pytest

from domain.entities.stable_spline_kernel import StableSplineKernel
from domain.value_objects.hyperparams import Hyperparams, ImpulseEstimate
from infrastructure.mappers.result_mapper import ResultMapper
from services.export_service import export_to_csv, export_to_json, write_output


@pytest.fixture
def mapper() -> ResultMapper:
    return ResultMapper()


@pytest.fixture
def kernel_report(kernel_service):
    kernel = StableSplineKernel(6, 0.37, 2.3)
    return (kernel, kernel_service.factorize(kernel), kernel_service.inverse_closed_form(kernel),
            kernel_service.log_det(kernel))


class TestKernelExport:

    def test_json_round_trip_is_exact(self, mapper, kernel_report):
        document = mapper.kernel_document(*kernel_report)
        restored = json.loads(export_to_json(document))
        np.testing.assert_array_equal(mapper.kernel_matrix_from_document(restored), kernel_report[0].to_dense())
        assert restored["logdet"] == kernel_report[3]
        assert restored["W"] == kernel_report[1].w.tolist()

    def test_csv_round_trip_is_exact(self, mapper, kernel_report):
        table = mapper.kernel_table(*kernel_report)
        restored = pd.read_csv(StringIO(export_to_csv(table)), float_precision="round_trip")
        np.testing.assert_array_equal(mapper.kernel_matrix_from_table(restored), kernel_report[0].to_dense())

    def test_table_layout(self, mapper, kernel_report):
        table = mapper.kernel_table(*kernel_report)
        assert list(table.columns) == ["quantity", "i", "j", "value"]
        counts = table["quantity"].value_counts()
        assert (counts["K"], counts["W"], counts["inverse"], counts["logdet"]) == (36, 6, 11, 1)

    def test_small_document(self, mapper, kernel_service):
        kernel = StableSplineKernel(3, 0.5)
        document = mapper.kernel_document(kernel, kernel_service.factorize(kernel),
                                          kernel_service.inverse_closed_form(kernel), kernel_service.log_det(kernel))
        assert document["K"] == [[0.5, 0.25, 0.125], [0.25, 0.25, 0.125], [0.125, 0.125, 0.125]]
        assert document["inverse"]["diag"] == pytest.approx([4.0, 12.0, 16.0])
        assert document["inverse"]["offdiag"] == pytest.approx([-4.0, -8.0])


class TestOutputFiles:

    def test_write_to_file(self, data_dir):
        path = write_output(export_to_json({"logdet": -5.545177444479562}), data_dir / "out" / "k.json")
        assert json.loads(path.read_text(encoding="utf-8")) == {"logdet": -5.545177444479562}

    def test_write_to_stdout(self, capsys):
        assert write_output("a,b\n1,2\n") is None
        assert capsys.readouterr().out == "a,b\n1,2\n"

    def test_csv_file(self, data_dir):
        frame = pd.DataFrame({"k": [1, 2], "f": [0.1, 1.0 / 3.0]})
        path = write_output(export_to_csv(frame), data_dir / "f.csv")
        pd.testing.assert_frame_equal(pd.read_csv(path, float_precision="round_trip"), frame)


class TestCompletionAndEstimateDocuments:

    def test_completion_document(self, mapper, maxent_service, tc_band):
        partial = tc_band(3, 0.5, 1)
        extension = maxent_service.central_extension(partial)
        document = mapper.completion_document(extension, maxent_service.factored_extension(partial),
                                              extension.log_det())
        assert (document["n"], document["m"]) == (3, 1)
        assert document["V"] == pytest.approx([4.0, 8.0, 8.0])
        assert document["matrix"][0][2] == pytest.approx(0.125)

    def test_estimate_document_and_bands(self, mapper, identification_service, white_noise_problem):
        data, n, h, f_true = white_noise_problem
        estimate = identification_service.estimate_impulse_response(data, n, h)
        fit = identification_service.fit_percentage(estimate.f_hat, f_true)
        document = json.loads(export_to_json(mapper.estimate_document(estimate, data.N, fit)))
        assert set(document) >= {"alpha", "lambda", "sigma2", "objective", "f_hat", "n", "N", "fit"}
        assert document["f_hat"] == estimate.f_hat.tolist()
        assert (document["n"], document["N"]) == (n, data.N)

        bands = mapper.credible_bands_table(estimate, identification_service.posterior_covariance(data, n, h))
        assert list(bands["k"]) == list(range(1, n + 1))
        assert np.all(bands["lower"] <= bands["f_hat"]) and np.all(bands["f_hat"] <= bands["upper"])

    def test_estimate_document_without_truth(self, mapper):
        estimate = ImpulseEstimate(np.array([0.5, 0.25]), Hyperparams(0.5, 1.0, 0.1), 3.0)
        document = mapper.estimate_document(estimate, 4)
        assert "fit" not in document
        assert document["lambda"] == 1.0
