"""Command-line entry point: ``period``, ``qec``, ``verify`` and ``history``."""

from __future__ import annotations

import argparse
import logging
import sys
from typing import Any, Sequence

from disentangle import storage
from disentangle._version import __version__
from disentangle.codes import CODE_FACTORIES
from disentangle.config import (
    DEFAULT_ENV_DIM,
    DEFAULT_SAMPLES,
    DEFAULT_SEED,
    DEFAULT_TRIALS,
    LOG_FILE,
    LOG_LEVEL,
    SQLITE_DB_PATH,
)
from disentangle.display import (
    render_history,
    render_period_summary,
    render_qec_summary,
    render_verification,
)
from disentangle.experiments import (
    EXIT_INCONCLUSIVE,
    EXIT_INVALID_CONFIG,
    EXIT_INVARIANT_VIOLATION,
    EXIT_SUCCESS,
    PeriodExperimentConfig,
    QecExperimentConfig,
    run_period_experiment,
    run_qec_experiment,
    run_verification,
)
from disentangle.linalg import InvariantError
from disentangle.reports import write_csv, write_json

logger = logging.getLogger(__name__)


def configure_logging(level: str = LOG_LEVEL, log_file: str | None = LOG_FILE) -> None:
    """Root logging to stderr (plus a file when configured); reports own stdout."""
    handlers: list[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    if log_file:
        handlers.insert(0, logging.FileHandler(log_file, encoding="utf-8"))
    logging.basicConfig(
        level=getattr(logging, str(level).upper(), logging.INFO),
        format="%(asctime)s [%(levelname)s] %(message)s",
        datefmt="%Y-%m-%dT%H:%M:%S%z",
        handlers=handlers,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="disentangle",
        description="Seeded period-finding and measurement-free error-correction experiments.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument(
        "--db",
        default=SQLITE_DB_PATH,
        help="SQLite run ledger; every run is recorded when set (default: $DISENTANGLE_DB_PATH)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    period = sub.add_parser("period", help="three-path period finding for f(x) = b^x mod N")
    period.add_argument("--N", dest="N", type=int, required=True)
    period.add_argument("--b", dest="b", type=int, required=True)
    period.add_argument("--k", dest="k", type=int, default=None, help="register-1 qubits")
    period.add_argument("--samples", type=int, default=DEFAULT_SAMPLES)
    period.add_argument("--seed", type=int, default=DEFAULT_SEED)
    period.add_argument("--out", default="-", help="output path, '-' for stdout")
    period.add_argument("--format", choices=("json", "csv"), default="json")

    qec = sub.add_parser("qec", help="encode, corrupt and decode without syndrome measurement")
    qec.add_argument("--code", choices=sorted(CODE_FACTORIES), required=True)
    qec.add_argument(
        "--channel",
        required=True,
        help="pauli:<op><idx> | superposed | mixed | environment | all-paulis | phase-error",
    )
    qec.add_argument("--trials", type=int, default=DEFAULT_TRIALS)
    qec.add_argument("--seed", type=int, default=DEFAULT_SEED)
    qec.add_argument("--env-dim", dest="env_dim", type=int, default=DEFAULT_ENV_DIM)
    qec.add_argument("--out", default="-", help="output path, '-' for stdout")

    verify = sub.add_parser("verify", help="orthogonality conditions of a code, per qubit")
    verify.add_argument("--code", choices=sorted(CODE_FACTORIES), required=True)
    verify.add_argument("--out", default=None, help="optional JSON report path")

    history = sub.add_parser("history", help="list recent runs from the ledger")
    history.add_argument("--limit", type=int, default=10)
    return parser


def _emit_summary(text: str, out: str | None) -> None:
    # stdout belongs to the report when it is written there
    stream = sys.stderr if out in (None, "-") else sys.stdout
    print(text, file=stream)


def _record(db_path: str | None, command: str, report: dict[str, Any], exit_code: int) -> None:
    if not db_path:
        return
    storage.initialize_database(db_path)
    storage.save_experiment_run(
        command=command,
        seed=report.get("seed"),
        exit_code=exit_code,
        config=report["config"],
        report=report,
        db_path=db_path,
    )


def _run_period(args: argparse.Namespace) -> tuple[dict[str, Any], int]:
    config = PeriodExperimentConfig(
        N=args.N, b=args.b, k=args.k, samples=args.samples, seed=args.seed, format=args.format
    )
    report = run_period_experiment(config)
    if config.format == "csv":
        write_csv(report["results"]["distributions"], args.out)
    else:
        write_json(report, args.out)
    _emit_summary(render_period_summary(report), args.out)
    inferred = report["results"]["inferred_period"]
    exit_code = EXIT_SUCCESS if inferred is not None else EXIT_INCONCLUSIVE
    return report, exit_code


def _run_qec(args: argparse.Namespace) -> tuple[dict[str, Any], int]:
    config = QecExperimentConfig(
        code=args.code,
        channel=args.channel,
        trials=args.trials,
        seed=args.seed,
        env_dim=args.env_dim,
    )
    report = run_qec_experiment(config)
    write_json(report, args.out)
    _emit_summary(render_qec_summary(report), args.out)
    return report, EXIT_SUCCESS


def _run_verify(args: argparse.Namespace) -> tuple[dict[str, Any], int]:
    report = run_verification(args.code)
    print(render_verification(report))
    if args.out:
        write_json(report, args.out)
    return report, EXIT_SUCCESS


def _run_history(args: argparse.Namespace) -> int:
    if not args.db:
        raise ValueError("history needs a run ledger (set DISENTANGLE_DB_PATH or pass --db)")
    storage.initialize_database(args.db)
    print(render_history(storage.get_recent_runs(args.limit, db_path=args.db)))
    return EXIT_SUCCESS


HANDLERS = {"period": _run_period, "qec": _run_qec, "verify": _run_verify}


def main(argv: Sequence[str] | None = None) -> int:
    configure_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad input, 0 for --help/--version
        return int(exc.code) if isinstance(exc.code, int) else EXIT_INVALID_CONFIG

    try:
        if args.command == "history":
            return _run_history(args)
        report, exit_code = HANDLERS[args.command](args)
        _record(args.db, args.command, report, exit_code)
        return exit_code
    except ValueError as e:
        logger.error("Invalid configuration: %s", e)
        return EXIT_INVALID_CONFIG
    except InvariantError as e:
        logger.error("Invariant violation: %s", e, exc_info=True)
        return EXIT_INVARIANT_VIOLATION
    except Exception as e:
        logger.error("Unexpected error: %s", e, exc_info=True)
        return EXIT_INVARIANT_VIOLATION


if __name__ == "__main__":
    sys.exit(main())
