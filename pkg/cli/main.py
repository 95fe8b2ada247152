#!/usr/bin/env python3
"""
Command-line entry point.

Subcommands:
    kernel    closed-form inverse, factor and log-determinant of a TC kernel
    complete  maximum-entropy completion of a band-matrix JSON file
    simulate  synthetic identification dataset (CSV ``t,u,y``)
    identify  tune hyperparameters and estimate the impulse response
    verify    run the acceptance suites and print a pass/fail table

Exit codes: 0 ok, 1 input/parse error, 2 domain error, 3 infeasible band.
"""

from typing import List, Optional
import argparse
import logging
import sys

from config.solver_config import solver_config
from infrastructure.container import configure_container

from cli.commands import cmd_complete, cmd_identify, cmd_kernel, cmd_simulate, cmd_verify


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ssk",
        description="Stable spline kernel closed forms, maximum-entropy band completion "
                    "and kernel-based impulse-response identification",
    )
    parser.add_argument("--verbose", "-v", action="store_true", help="Enable debug logging")
    subparsers = parser.add_subparsers(dest="command", required=True)

    kernel = subparsers.add_parser("kernel", help="Write K, W, K^-1 and log det K")
    kernel.add_argument("--n", type=int, default=10, help="Kernel order (default: 10)")
    kernel.add_argument("--alpha", type=float, required=True, help="Decay rate in (0, 1)")
    kernel.add_argument("--lambda", dest="lam", type=float, default=1.0, help="Scale > 0 (default: 1)")
    kernel.add_argument("--format", choices=["json", "csv"], default="json")
    kernel.add_argument("--output", "-o", help="Output file (default: stdout)")
    kernel.set_defaults(handler=cmd_kernel)

    complete = subparsers.add_parser("complete", help="Central extension of a band-matrix JSON file")
    complete.add_argument("--input", "-i", required=True, help="Band JSON {n, m, diagonals}")
    complete.add_argument("--output", "-o", help="Output file (default: stdout)")
    complete.set_defaults(handler=cmd_complete)

    simulate = subparsers.add_parser("simulate", help="Simulate data from f_k = decay^k")
    simulate.add_argument("--n", type=int, default=50, help="Impulse-response length (default: 50)")
    simulate.add_argument("--decay", type=float, default=0.8, help="Decay of f_k (default: 0.8)")
    simulate.add_argument("--N", type=int, default=500, help="Number of samples (default: 500)")
    noise = simulate.add_mutually_exclusive_group()
    noise.add_argument("--snr", type=float, default=10.0, help="Signal-to-noise ratio (default: 10)")
    noise.add_argument("--sigma2", type=float, help="Noise variance, overrides --snr")
    simulate.add_argument("--input", choices=["white", "impulse"], default="white")
    simulate.add_argument("--seed", type=int, default=solver_config.SEED)
    simulate.add_argument("--output", "-o", required=True, help="Dataset CSV")
    simulate.add_argument("--truth", help="Also write the true impulse response (CSV k,f)")
    simulate.set_defaults(handler=cmd_simulate)

    identify = subparsers.add_parser("identify", help="Estimate the impulse response of a dataset")
    identify.add_argument("--data", "-d", required=True, help="Dataset CSV with header t,u,y")
    identify.add_argument("--n", type=int, help="FIR order (default: min(100, N/2))")
    identify.add_argument("--fix-sigma2", type=float, help="Known noise variance")
    identify.add_argument("--alpha-min", type=float)
    identify.add_argument("--alpha-max", type=float)
    identify.add_argument("--lambda-min", type=float)
    identify.add_argument("--lambda-max", type=float)
    identify.add_argument("--sigma2-min", type=float)
    identify.add_argument("--sigma2-max", type=float)
    identify.add_argument("--grid-size", type=int, help="Grid points per hyperparameter")
    identify.add_argument("--max-evals", type=int, help="Nelder-Mead evaluation budget")
    identify.add_argument("--workers", type=int, help="Threads for the grid search")
    identify.add_argument("--likelihood", choices=["data", "weight", "auto"])
    identify.add_argument("--seed", type=int, default=solver_config.SEED)
    identify.add_argument("--output", "-o", help="Estimate JSON (default: stdout)")
    identify.add_argument("--truth", help="True impulse response CSV (k,f) for the fit metric")
    identify.add_argument("--bands-csv", help="Write f_hat +/- 2 std per lag")
    identify.set_defaults(handler=cmd_identify)

    verify = subparsers.add_parser("verify", help="Run the acceptance suites")
    verify.add_argument("--suites", help="Comma-separated suite names, 'all' or 'none'")
    verify.add_argument("--n-max", type=int, help="Largest kernel order on the kernel grids")
    verify.add_argument("--instances", type=int, help="Random instances per suite")
    verify.add_argument("--e2e-seeds", type=int, help="Seeds of the end-to-end run")
    verify.add_argument("--seed", type=int, default=solver_config.SEED)
    verify.add_argument("--full", action="store_true", help="Acceptance scale (50 instances, 20 seeds)")
    verify.add_argument("--output", "-o", help="Also write the report as JSON")
    verify.set_defaults(handler=cmd_verify)

    return parser


def configure_logging(verbose: bool = False) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else solver_config.LOG_LEVEL,
        format='%(asctime)s - %(levelname)s - %(message)s',
        stream=sys.stderr,
        force=True,
    )


def main(argv: Optional[List[str]] = None) -> int:
    """Parse arguments, dispatch and return the exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.verbose)

    container = configure_container()
    return args.handler(args, container)


if __name__ == "__main__":
    sys.exit(main())
