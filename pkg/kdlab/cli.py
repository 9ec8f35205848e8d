"""Command-line surface: ``kdlab {simulate,reproduce,certify,rate,selftest}``.

Exit codes: 0 success, 1 usage error, 2 runtime error, 3 selftest failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from collections.abc import Sequence
from pathlib import Path

from . import __version__
from .certificates import evaluate_certificate, search_certificate
from .config import settings
from .exceptions import KdlError
from .io import emit_plot_script, load_config, read_csv, write_csv
from .rates import fit_decay_rate
from .runner import build_instance, reproduce, run
from .scenarios import scenario_ids
from .selftest import run_selftest
from .types import CertificateSpec, certificate_lines

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_SELFTEST = 3


class _Parser(argparse.ArgumentParser):
    """ArgumentParser whose usage errors exit with code 1."""

    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="kdlab", description="Time-delayed Kuramoto toolkit on digraphs")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument(
        "-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="integrate a configuration and print its report")
    p.add_argument("--config", required=True, type=Path)
    p.add_argument("--csv", type=Path, help="write the diagnostic series here")
    p.add_argument("--plots", type=Path, help="directory for the generated plot script")

    p = sub.add_parser("reproduce", help="run a reference scenario and write its outputs")
    p.add_argument("--scenario", required=True, choices=[*scenario_ids(), "all"])
    p.add_argument("--out", type=Path, default=Path("."))

    p = sub.add_parser("certify", help="evaluate or search a strong certificate")
    p.add_argument("--config", required=True, type=Path)
    p.add_argument("--search", action="store_true", help="grid-search a tuple")

    p = sub.add_parser("rate", help="fit the decay rate of d_omega from a CSV")
    p.add_argument("--csv", required=True, type=Path)
    p.add_argument("--from", dest="t_from", type=float, default=None)

    sub.add_parser("selftest", help="convergence-order and invariant checks")
    return parser


def _configure_logging(verbose: int) -> None:
    if verbose >= 2:
        level = logging.DEBUG
    elif verbose == 1:
        level = logging.INFO
    else:
        level = getattr(logging, settings.log_level.upper(), logging.WARNING)
    logging.basicConfig(
        level=level,
        stream=sys.stderr,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


def _simulate(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    result = run(config)
    csv_path = args.csv
    if csv_path is None and args.plots is not None:
        csv_path = args.plots / f"{config.label}.csv"
    if csv_path is not None:
        csv_path.parent.mkdir(parents=True, exist_ok=True)
        write_csv(result.series, result.trajectory, csv_path)
    if args.plots is not None:
        args.plots.mkdir(parents=True, exist_ok=True)
        emit_plot_script(csv_path, args.plots / f"{csv_path.stem}_plot.py")
    sys.stdout.write(result.report.as_text())
    return EXIT_OK


def _reproduce(args: argparse.Namespace) -> int:
    ids = None if args.scenario == "all" else [args.scenario]
    results = reproduce(ids, args.out)
    for scenario_id, result in results.items():
        sync = result.report.sync
        t_sync = "absent" if sync.t_sync is None else f"{sync.t_sync:.6g}"
        print(f"{scenario_id}: synced={str(sync.synced).lower()} t_sync={t_sync}")
    return EXIT_OK


def _certify(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    params, history = build_instance(config)
    spec = config.certificate
    if args.search or not isinstance(spec, CertificateSpec):
        result = search_certificate(params, history, config.grid)
        print(f"search: {'found' if result.found else 'NotFound'}")
        print(f"evaluated: {result.evaluated}")
        print(f"binding: {result.binding}")
        if result.violations:
            print(f"violations: {', '.join(result.violations)}")
        cert = result.certificate
    else:
        cert = evaluate_certificate(params, history, spec.zeta, spec.xi, spec.d_inf, spec.eta)
    print("\n".join(certificate_lines(cert)))
    return EXIT_OK


def _rate(args: argparse.Namespace) -> int:
    fit = fit_decay_rate(read_csv(args.csv), t_from=args.t_from)
    print(f"rate: {fit.rate:.17g}")
    print(f"r_squared: {fit.r_squared:.17g}")
    print(f"samples: {fit.samples}")
    return EXIT_OK


def _selftest(args: argparse.Namespace) -> int:
    checks = run_selftest()
    for check in checks:
        print(f"{'PASS' if check.passed else 'FAIL'} {check.name}: {check.detail}")
    return EXIT_OK if all(c.passed for c in checks) else EXIT_SELFTEST


COMMANDS = {
    "simulate": _simulate,
    "reproduce": _reproduce,
    "certify": _certify,
    "rate": _rate,
    "selftest": _selftest,
}


def main(argv: Sequence[str] | None = None) -> int:
    """Entry point; returns the process exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    _configure_logging(args.verbose)
    try:
        return COMMANDS[args.command](args)
    except KdlError as e:
        logger.debug("command %s failed", args.command, exc_info=True)
        print(f"kdlab: error: {e.message}", file=sys.stderr)
        return e.exit_code
    except OSError as e:
        print(f"kdlab: error: {e}", file=sys.stderr)
        return 2
