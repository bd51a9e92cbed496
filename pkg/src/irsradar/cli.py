"""Command-line front end.

Exit codes: 0 success, 1 config/validation error, 2 runtime failure,
3 property-suite failure.
"""

import argparse
import logging
import sys

from .experiment import SpecError, load_spec, run_spec, run_trace, template_text, write_csv
from .validation import report, timed_validation

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME, EXIT_PROPERTY = 0, 1, 2, 3


def _out_path(args, spec):
    path = args.out or spec.output_path
    if not path:
        raise SpecError("no output path: pass --out or set output_path in the spec")
    return path


def cmd_run(args):
    spec = load_spec(args.spec)
    rows = run_spec(spec, workers=args.workers)
    write_csv(rows, _out_path(args, spec), timing=args.timing)
    return EXIT_OK


def cmd_trace(args):
    spec = load_spec(args.spec)
    rows = run_trace(spec, workers=args.workers)
    write_csv(rows, _out_path(args, spec), timing=args.timing)
    return EXIT_OK


def cmd_validate(args):
    results, elapsed = timed_validation(quick=args.quick, seed=args.seed)
    report(results, elapsed, stream=sys.stdout)
    return EXIT_OK if all(r.passed for r in results) else EXIT_PROPERTY


def cmd_print_spec(args):
    sys.stdout.write(template_text(args.template))
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="irsradar",
        description="Joint unimodular waveform / multi-IRS phase design for DoA CRLB minimization.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log per-iteration diagnostics")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, func, help_ in (("run", cmd_run, "run the sweep described by a spec"),
                              ("trace", cmd_trace, "CRLB per outer iteration")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--spec", required=True)
        p.add_argument("--out")
        p.add_argument("--workers", type=int, default=None,
                       help="process count (default: $IRSRADAR_WORKERS or all cores)")
        p.add_argument("--timing", action="store_true",
                       help="fill wall_time_ms (makes the CSV non-reproducible)")
        p.set_defaults(func=func)

    p = sub.add_parser("validate", help="run the randomized invariant suite")
    p.add_argument("--quick", action="store_true")
    p.add_argument("--seed", type=int, default=2023)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("print-spec", help="print a bundled experiment spec")
    p.add_argument("--template", default="fig1", help="fig1 (sigma sweep) or fig1b (trace)")
    p.set_defaults(func=cmd_print_spec)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (SpecError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - any failure inside a run maps to exit 2
        print(f"runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
