"""
Result mapper for converting domain results to serializable formats.

This module flattens kernel reports, central extensions and impulse-response
estimates into JSON documents and plot-ready tables, and parses the kernel
document back for round-trip checks.
"""

from typing import Any, Dict, Optional

import numpy as np
import pandas as pd

from domain.entities.stable_spline_kernel import StableSplineKernel
from domain.value_objects.band_extension import BandFactorization, CentralExtension
from domain.value_objects.hyperparams import ImpulseEstimate
from domain.value_objects.kernel_factors import TriFactor, TridiagInverse


class ResultMapper:
    """
    Maps domain results to JSON documents and pandas tables.
    """

    def kernel_document(self, kernel: StableSplineKernel, factor: TriFactor,
                        inverse: TridiagInverse, log_det: float) -> Dict[str, Any]:
        """
        Kernel report: K, W, the tridiagonal inverse and the log-determinant.
        """
        return {
            "n": kernel.n,
            "alpha": kernel.alpha,
            "lambda": kernel.lam,
            "K": kernel.to_dense().tolist(),
            "W": factor.w.tolist(),
            "inverse": {"diag": inverse.diag.tolist(), "offdiag": inverse.offdiag.tolist()},
            "logdet": log_det,
        }

    def kernel_table(self, kernel: StableSplineKernel, factor: TriFactor,
                     inverse: TridiagInverse, log_det: float) -> pd.DataFrame:
        """
        The kernel report in long format with columns ``quantity,i,j,value``
        (1-based indices; 0 where an index does not apply).
        """
        n = kernel.n
        rows, cols = np.meshgrid(np.arange(1, n + 1), np.arange(1, n + 1), indexing="ij")
        lags = np.arange(1, n + 1)
        parts = [
            pd.DataFrame({"quantity": "K", "i": rows.ravel(), "j": cols.ravel(),
                          "value": kernel.to_dense().ravel()}),
            pd.DataFrame({"quantity": "W", "i": lags, "j": lags, "value": factor.w}),
            pd.DataFrame({"quantity": "inverse", "i": lags, "j": lags, "value": inverse.diag}),
            pd.DataFrame({"quantity": "inverse", "i": lags[:-1], "j": lags[1:], "value": inverse.offdiag}),
            pd.DataFrame({"quantity": ["logdet"], "i": [0], "j": [0], "value": [log_det]}),
        ]
        return pd.concat(parts, ignore_index=True)

    @staticmethod
    def kernel_matrix_from_document(document: Dict[str, Any]) -> np.ndarray:
        return np.asarray(document["K"], dtype=float)

    @staticmethod
    def kernel_matrix_from_table(table: pd.DataFrame) -> np.ndarray:
        entries = table[table["quantity"] == "K"]
        n = int(entries["i"].max())
        matrix = np.empty((n, n))
        matrix[entries["i"].to_numpy() - 1, entries["j"].to_numpy() - 1] = entries["value"].to_numpy(dtype=float)
        return matrix

    def completion_document(self, extension: CentralExtension, factorization: BandFactorization,
                            log_det: float) -> Dict[str, Any]:
        """Central extension, its inverse factor pair (L, V) and attained log-det."""
        return {
            "n": extension.n,
            "m": extension.m,
            "matrix": extension.matrix.tolist(),
            "L": factorization.lower.tolist(),
            "V": factorization.v.tolist(),
            "logdet": log_det,
        }

    def estimate_document(self, estimate: ImpulseEstimate, n_samples: int,
                          fit: Optional[float] = None,
                          extra: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
        """
        ImpulseEstimate JSON ``{"alpha", "lambda", "sigma2", "objective", "f_hat"}``
        plus the problem sizes and, when the truth is known, the fit.
        """
        document = estimate.to_dict()
        document["n"] = estimate.n
        document["N"] = n_samples
        if fit is not None:
            document["fit"] = fit
        if extra:
            document.update(extra)
        return document

    def credible_bands_table(self, estimate: ImpulseEstimate, posterior_covariance: np.ndarray,
                             width: float = 2.0) -> pd.DataFrame:
        """Plot-ready ``f_hat +/- width * std`` per lag."""
        std = np.sqrt(np.clip(np.diag(posterior_covariance), 0.0, None))
        return pd.DataFrame({
            "k": np.arange(1, estimate.n + 1),
            "f_hat": estimate.f_hat,
            "lower": estimate.f_hat - width * std,
            "upper": estimate.f_hat + width * std,
        })
