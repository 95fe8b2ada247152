"""
Subcommand handlers.

Each handler validates its inputs through the pydantic run models, resolves
its services from the container and returns a process exit code. Errors are
turned into exit codes by ``handle_cli_errors``.
"""

from argparse import Namespace
from typing import Optional
import logging
import sys

import numpy as np
from pydantic import BaseModel, ValidationError

from config.solver_config import solver_config
from domain.entities.stable_spline_kernel import StableSplineKernel
from domain.entities.sysid_dataset import SysIdDataset
from domain.services.kernel_domain_service import KernelDomainService
from domain.services.maxent_domain_service import MaxEntropyDomainService
from infrastructure.container import SimpleContainer
from infrastructure.error_handler import handle_cli_errors
from infrastructure.exceptions import EXIT_INPUT, EXIT_OK, ApplicationException, ValidationException
from infrastructure.mappers.result_mapper import ResultMapper
from models.run_config import RunConfig, TuningSettings, VerificationSettings
from repositories.band_matrix_repository import BandMatrixRepository
from repositories.dataset_repository import DatasetRepository, ImpulseResponseRepository
from services.export_service import export_to_csv, export_to_json, write_output
from services.identification_service import IdentificationService
from services.simulation_service import SimulationService
from services.tuning_service import TuningService
from services.verification_service import VerificationService


logger = logging.getLogger(__name__)

PATH_FIELDS = {"input_path", "output_path", "truth_path"}


def build_model(factory, **values) -> BaseModel:
    """
    Build a run model from the values that were given.

    Pydantic errors on numeric settings become domain errors naming the
    setting; errors on paths become input errors.

    Raises:
        ValidationException: For an out-of-domain numeric setting (exit 2)
        ApplicationException: For an unusable path or missing input (exit 1)
    """
    try:
        return factory(**{k: v for k, v in values.items() if v is not None})
    except ValidationError as e:
        error = e.errors()[0]
        field = str(error["loc"][0]) if error.get("loc") else ""
        if not field or field in PATH_FIELDS:
            raise ApplicationException(error["msg"], "INVALID_RUN_CONFIG", e)
        raise ValidationException(field, error["msg"], error.get("input"))


@handle_cli_errors("kernel")
def cmd_kernel(args: Namespace, container: SimpleContainer) -> int:
    """Write K, W, the tridiagonal inverse and the log-determinant."""
    config = build_model(RunConfig, subcommand="kernel", n=args.n, output_path=args.output,
                         output_format=args.format)
    kernel = StableSplineKernel(config.n, args.alpha, args.lam)

    kernel_service = container.resolve(KernelDomainService)
    mapper = container.resolve(ResultMapper)
    factor = kernel_service.factorize(kernel)
    inverse = kernel_service.inverse_closed_form(kernel)
    log_det = kernel_service.log_det(kernel)

    if config.output_format == "csv":
        text = export_to_csv(mapper.kernel_table(kernel, factor, inverse, log_det))
    else:
        text = export_to_json(mapper.kernel_document(kernel, factor, inverse, log_det))
    write_output(text, config.output_path)

    logger.info(f"Kernel n={kernel.n}, alpha={kernel.alpha}, lambda={kernel.lam}: log det {log_det:.17g}")
    return EXIT_OK


@handle_cli_errors("complete")
def cmd_complete(args: Namespace, container: SimpleContainer) -> int:
    """Write the central extension, its (L, V) factor pair and attained log-det."""
    config = build_model(RunConfig, subcommand="complete", input_path=args.input, output_path=args.output)
    partial = container.resolve(BandMatrixRepository).load(config.input_path)

    maxent_service = container.resolve(MaxEntropyDomainService)
    extension = maxent_service.central_extension(partial)
    factorization = maxent_service.factored_extension(partial)
    log_det = extension.log_det()

    document = container.resolve(ResultMapper).completion_document(extension, factorization, log_det)
    write_output(export_to_json(document), config.output_path)

    logger.info(f"Completed n={partial.n}, m={partial.m}: {len(partial.free_pairs())} entries, log det {log_det:.6g}")
    return EXIT_OK


@handle_cli_errors("simulate")
def cmd_simulate(args: Namespace, container: SimpleContainer) -> int:
    """Simulate ``f_k = decay^k`` driven by white noise or an impulse."""
    config = build_model(RunConfig, subcommand="simulate", n=args.n, seed=args.seed,
                         output_path=args.output)
    if args.N < 1:
        raise ValidationException("N", "number of samples must be at least 1", args.N)

    simulation = container.resolve(SimulationService)
    f_true = simulation.exponential_impulse_response(config.n, args.decay)
    input_seed, noise_seed = (int(s) for s in np.random.SeedSequence(config.seed).generate_state(2))
    if args.input == "impulse":
        u = simulation.impulse_input(args.N)
    else:
        u = simulation.white_noise_input(args.N, input_seed)

    if args.sigma2 is not None:
        sigma2 = args.sigma2
    else:
        sigma2 = simulation.noise_variance_for_snr(f_true, u, args.N, args.snr)
    simulated = simulation.simulate_dataset(f_true, u, args.N, sigma2, noise_seed)
    dataset = SysIdDataset(simulated.u, simulated.y, seed=config.seed)

    container.resolve(DatasetRepository).save(dataset, config.output_path)
    if args.truth:
        container.resolve(ImpulseResponseRepository).save(f_true, args.truth)

    logger.info(f"Simulated N={args.N} samples with sigma2={sigma2:.6g} (seed {config.seed})")
    return EXIT_OK


@handle_cli_errors("identify")
def cmd_identify(args: Namespace, container: SimpleContainer) -> int:
    """Tune the hyperparameters, then write the minimum-variance estimate."""
    tuning = build_model(
        TuningSettings.from_config,
        grid_size=args.grid_size,
        max_evals=args.max_evals,
        grid_workers=args.workers,
        fixed_sigma2=args.fix_sigma2,
        likelihood_method=args.likelihood,
        alpha_bounds=_bounds("alpha", args.alpha_min, args.alpha_max,
                             TuningSettings.model_fields["alpha_bounds"].default),
        lambda_bounds=_bounds("lambda", args.lambda_min, args.lambda_max),
        sigma2_bounds=_bounds("sigma2", args.sigma2_min, args.sigma2_max),
    )
    config = build_model(RunConfig, subcommand="identify", input_path=args.data, output_path=args.output,
                         truth_path=args.truth, n=args.n, seed=args.seed, tuning=tuning)

    dataset = container.resolve(DatasetRepository).load(config.input_path)
    n = config.n or dataset.default_fir_order(solver_config.DEFAULT_FIR_ORDER)

    result = container.resolve(TuningService).tune(dataset, n, config.tuning)
    identification = container.resolve(IdentificationService)
    estimate = identification.estimate_impulse_response(dataset, n, result.hyperparams)

    fit = None
    if config.truth_path is not None:
        f_true = container.resolve(ImpulseResponseRepository).load(config.truth_path)
        fit = identification.fit_percentage(estimate.f_hat, _align(f_true, n))

    mapper = container.resolve(ResultMapper)
    document = mapper.estimate_document(estimate, dataset.N, fit, {
        "seed": config.seed,
        "data_seed": dataset.seed,
        "evaluations": result.evaluations,
        "grid_objective": result.grid_objective,
    })
    write_output(export_to_json(document), config.output_path)

    if args.bands_csv:
        covariance = identification.posterior_covariance(dataset, n, result.hyperparams)
        write_output(export_to_csv(mapper.credible_bands_table(estimate, covariance)), args.bands_csv)

    logger.info(f"Identified n={n} lags from N={dataset.N} samples"
                + (f", fit {fit:.2f}%" if fit is not None else ""))
    return EXIT_OK


@handle_cli_errors("verify")
def cmd_verify(args: Namespace, container: SimpleContainer) -> int:
    """Run the acceptance suites and print a pass/fail table."""
    suites = None if args.suites is None else [s.strip() for s in args.suites.split(",") if s.strip()]
    settings = build_model(VerificationSettings, suites=suites, n_max=args.n_max, instances=args.instances,
                           e2e_seeds=args.e2e_seeds, seed=args.seed, full=args.full)
    service = container.resolve(VerificationService)
    report = service.run(settings)

    table = report.to_frame()
    if not table.empty:
        sys.stdout.write(table.to_string(index=False) + "\n")
    if args.output:
        write_output(export_to_json(report.to_dict()), args.output)

    if report.passed:
        logger.info(f"All {len(report.results)} suites passed")
        return EXIT_OK
    failed = [r.name for r in report.results if not r.passed]
    print(f"error: suites failed: {', '.join(failed)}", file=sys.stderr)
    return EXIT_INPUT


def _bounds(name: str, low: Optional[float], high: Optional[float], default=None):
    if low is None and high is None:
        return None
    if default is None and (low is None or high is None):
        missing = f"{name}_min" if low is None else f"{name}_max"
        raise ValidationException(missing, "give both the lower and the upper bound")
    lo = low if low is not None else default[0]
    hi = high if high is not None else default[1]
    return (lo, hi)


def _align(f_true: np.ndarray, n: int) -> np.ndarray:
    """Truncate or zero-pad the true impulse response to n lags."""
    aligned = np.zeros(n)
    k = min(n, f_true.shape[0])
    aligned[:k] = f_true[:k]
    return aligned
