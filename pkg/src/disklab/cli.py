"""Command-line front end: one subcommand per experiment plus ``verify``.

Exit codes: 0 success (overflow is reported in the flags, not an error),
1 failed criteria or other errors, 2 usage/schema errors, 3 unsupported
operator family.  Errors are printed to stderr as a JSON object.
"""

from __future__ import annotations

import argparse
import json
import pathlib
import sys
from importlib import resources

from .errors import DisklabError, UnsupportedFamilyError
from .experiments import EXPERIMENTS, ExperimentConfig, UsageError, run_experiment, verify_suite, write_report

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_UNSUPPORTED = 0, 1, 2, 3


def shipped_suite() -> pathlib.Path:
    """Directory holding the acceptance configs installed with the package."""
    return pathlib.Path(str(resources.files("disklab") / "acceptance_configs"))


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        _emit_error("usage", message, None)
        sys.exit(EXIT_USAGE)


def _emit_error(kind, message, field):
    print(json.dumps({"error": kind, "message": message, "field": field}, sort_keys=True),
          file=sys.stderr)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="disklab", description="Diskcyclic operator experiments.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in EXPERIMENTS + ("verify",):
        p = sub.add_parser(name)
        if name == "verify":
            p.add_argument("path", nargs="?", default=None,
                           help="directory of configs (default: the shipped acceptance suite)")
            p.add_argument("--config", help=argparse.SUPPRESS)
        else:
            p.add_argument("--config", required=True, help="experiment config (JSON)")
        p.add_argument("--out", default=None, help="output directory (default: print JSON to stdout)")
        p.add_argument("--seed", type=int, default=None, help="overrides parameters.seed")
        p.add_argument("--format", choices=("json", "csv", "both"), default="json")
    return parser


def _run_one(args) -> int:
    cfg = ExperimentConfig.from_file(args.config)
    if cfg.experiment != args.command:
        raise UsageError(f"config declares experiment {cfg.experiment!r}, "
                         f"subcommand is {args.command!r}", "experiment")
    envelope, table = run_experiment(cfg, seed=args.seed)
    if args.out is None:
        if args.format == "csv" and table is not None:
            sys.stdout.write(table)
        else:
            print(json.dumps(envelope, indent=2, sort_keys=True))
    else:
        write_report(envelope, table, args.out, pathlib.Path(args.config).stem, args.format)
    return EXIT_OK


def _run_verify(args) -> int:
    path = args.path or args.config or shipped_suite()
    summary = verify_suite(path, out_dir=args.out, seed=args.seed)
    for row in summary["rows"]:
        status = "PASS" if row["pass"] else "FAIL"
        print(f"{status} {row['id']} [{row['config']}] observed={row['observed']!r} "
              f"{row['comparison']} expected={row['expected']!r} tol={row['tolerance']}")
    if summary["failed"]:
        print("failed: " + ", ".join(summary["failed"]))
        return EXIT_FAIL
    print("all criteria passed")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if not pathlib.Path(args.config or ".").exists():
            raise UsageError(f"config file not found: {args.config}", "config")
        return _run_verify(args) if args.command == "verify" else _run_one(args)
    except UsageError as exc:
        _emit_error("usage", str(exc), exc.field)
        return EXIT_USAGE
    except UnsupportedFamilyError as exc:
        _emit_error("unsupported_family", str(exc), "operator/kind")
        return EXIT_UNSUPPORTED
    except DisklabError as exc:
        _emit_error(type(exc).__name__, str(exc), None)
        return EXIT_FAIL
    except ValueError as exc:
        # bad numeric parameters surface as ValueError from the library
        _emit_error("usage", str(exc), "parameters")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
