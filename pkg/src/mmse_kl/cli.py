"""``mmse-kl`` command-line front end.

Exit codes: 0 success, 1 validation-suite failure, 2 usage or configuration
error. Errors are printed to stderr as one JSON line. Output files are written
to a temporary sibling and renamed, so a failed run never leaves a partial file.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile

import numpy as np

from . import figures
from .bounds import mmse_bounds
from .errors import MmseKlError
from .gaussian import (
    GaussianReference,
    correlated_signal_reference,
    gaussian_kl,
    least_favorable_cov,
    schur_complement,
    spectrum,
)

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    def __init__(self, message: str, code: str = "usage"):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _emit_error(code: str, message: str) -> None:
    sys.stderr.write(json.dumps({"error": code, "message": message}) + "\n")


def write_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".mmse-kl-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(text: str, out: str | None) -> None:
    if out:
        write_atomic(out, text)
    else:
        sys.stdout.write(text)


def _epsilon(raw: float) -> float:
    if not (math.isfinite(raw) and raw >= 0.0):
        raise UsageError("epsilon must be nonnegative", "domain")
    return float(raw)


def _check_out(out: str | None) -> None:
    if out and not os.path.isdir(os.path.dirname(os.path.abspath(out))):
        raise UsageError(f"output directory does not exist: {out}", "io")


def _load_ref(path: str) -> GaussianReference:
    try:
        return GaussianReference.load(path)
    except OSError as exc:
        raise UsageError(f"cannot read reference file {path}: {exc.strerror}", "io") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"reference file {path} is not valid JSON: {exc.msg}", "parse") from None


def _dumps(payload: dict) -> str:
    return json.dumps(payload, indent=1) + "\n"


def cmd_bounds(args) -> int:
    eps = _epsilon(args.eps)
    _check_out(args.out)
    ref = _load_ref(args.ref)
    res = mmse_bounds(ref, eps)
    payload = res.to_dict()
    payload["spectrum"] = spectrum(schur_complement(ref)).eigenvalues.tolist()
    for side, gamma in (("lower", res.gamma_plus), ("upper", res.gamma_minus)):
        cov = least_favorable_cov(ref, gamma)
        payload[f"kl_residual_{side}"] = abs(gaussian_kl(ref.mean, cov, ref.mean, ref.cov) - eps)
    _emit(_dumps(payload), args.out)
    return EXIT_OK


def cmd_lfd(args) -> int:
    _check_out(args.out)
    if args.fig3:
        table = figures.scalar_lfd_panels()
        _emit(table.to_json() if args.format == "json" else table.to_csv(), args.out)
        return EXIT_OK
    if args.ref is None or args.eps is None:
        raise UsageError("lfd needs --ref and --eps (or --fig3)")
    eps = _epsilon(args.eps)
    ref = _load_ref(args.ref)
    res = mmse_bounds(ref, eps)
    gamma = res.gamma_minus if args.branch == "minus" else res.gamma_plus
    cov = least_favorable_cov(ref, gamma)
    payload = {
        "epsilon": eps,
        "branch": args.branch,
        "gamma": gamma,
        "bound": res.upper if args.branch == "minus" else res.lower,
        "k": ref.k,
        "m": ref.m,
        "mean": ref.mean.tolist(),
        "cov": cov.tolist(),
    }
    _emit(_dumps(payload), args.out)
    return EXIT_OK


def cmd_fig(args) -> int:
    if args.id not in figures.FIGURE_IDS:
        raise UsageError(f"unsupported figure id {args.id}; choose from 1, 2, 5, 6, 7, 8", "domain")
    _check_out(args.out)
    threads = figures.thread_count()
    table = figures.build(args.id, threads)
    _emit(table.to_json() if args.format == "json" else table.to_csv(), args.out)
    return EXIT_OK


def cmd_validate(args) -> int:
    from .validation import run_suite

    _check_out(args.out)
    results = run_suite(args.suite, args.seed)
    lines = []
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        lines.append(
            f"{status} [{r.suite}] {r.name}: value={r.value:.10g} target={r.target:.10g} "
            f"residual={r.residual:.3g} threshold={r.threshold:.3g}"
        )
    failed = sum(not r.passed for r in results)
    lines.append(f"{len(results) - failed}/{len(results)} checks passed (seed {args.seed})")
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_FAILED if failed else EXIT_OK


def cmd_make_ref(args) -> int:
    if args.k < 1:
        raise UsageError("k must be a positive integer", "domain")
    _check_out(args.out)
    ref = correlated_signal_reference(k=args.k, snr_db=args.snr_db, rate=args.rate)
    _emit(_dumps(ref.to_dict()), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mmse-kl", description="MMSE bounds over KL divergence balls around a Gaussian reference.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("bounds", help="lower and upper MMSE bounds for a reference and radius")
    p.add_argument("--ref", required=True, help="reference JSON with mean, cov, k, m")
    p.add_argument("--eps", type=float, required=True, help="KL radius in nats")
    p.add_argument("--out", help="write JSON here instead of stdout")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("lfd", help="covariance of the Gaussian attaining a bound")
    p.add_argument("--ref")
    p.add_argument("--eps", type=float)
    p.add_argument("--branch", choices=("plus", "minus"), default="minus")
    p.add_argument("--fig3", action="store_true", help="scalar 3 dB panels for eps in {0, 0.5, 5}")
    p.add_argument("--format", choices=("csv", "json"), default="csv", help="table format for --fig3")
    p.add_argument("--out")
    p.set_defaults(func=cmd_lfd)

    p = sub.add_parser("fig", help="data table behind a figure")
    p.add_argument("--id", type=int, required=True)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out")
    p.set_defaults(func=cmd_fig)

    p = sub.add_parser("validate", help="run the scheduled oracle comparisons")
    p.add_argument("--suite", choices=("kl", "mc", "oracle", "all"), default="all")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("make-ref", help="write a correlated-signal-in-white-noise reference JSON")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--snr-db", type=float, default=0.0)
    p.add_argument("--rate", type=float, default=0.9)
    p.add_argument("--out")
    p.set_defaults(func=cmd_make_ref)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        _emit_error(exc.code, str(exc))
    except MmseKlError as exc:
        _emit_error(exc.code, str(exc))
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
