"""Command-line front end: ``cfa run | validate | list-kinds``.

Exit codes: 0 success, 2 input error (parse, validation, missing file),
3 empty selection, 4 certificate failure, 5 output not writable.
"""

from __future__ import annotations

import argparse
import json
import sys

from .errors import CertificateError, EmptySelectionError, ScenarioError
from .scenarios import KINDS, load_scenario, run_scenario

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_EMPTY = 3
EXIT_CERTIFICATE = 4
EXIT_OUTPUT = 5


def _parser():
    ap = argparse.ArgumentParser(prog="cfa", description="Run certified constructive-analysis scenarios.")
    sub = ap.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="execute a scenario file and write its reports")
    run.add_argument("scenario")
    run.add_argument("--out", default=".", help="output directory (default: current)")
    run.add_argument("--format", choices=("csv", "text"), default=None,
                     help="report format (default depends on the kind)")
    val = sub.add_parser("validate", help="parse and check a scenario without running it")
    val.add_argument("scenario")
    sub.add_parser("list-kinds", help="print the supported scenario kinds")
    return ap


def _load(path):
    """Load a scenario, mapping every input problem to ``(None, message)``."""
    try:
        return load_scenario(path), None
    except FileNotFoundError as exc:
        return None, f"missing file: {exc.filename or exc}"
    except json.JSONDecodeError as exc:
        return None, f"parse error in {path}: {exc}"
    except (ScenarioError, ValueError, TypeError, KeyError) as exc:
        return None, f"invalid scenario {path}: {exc}"
    except OSError as exc:
        return None, f"cannot read {path}: {exc}"


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.command == "list-kinds":
        for kind, text in KINDS.items():
            print(f"{kind}\t{text}")
        return EXIT_OK

    scenario, err = _load(args.scenario)
    if scenario is None:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INPUT
    if args.command == "validate":
        print(f"ok: {scenario.kind}")
        return EXIT_OK

    try:
        outcome = run_scenario(scenario, args.out, args.format)
    except EmptySelectionError as exc:
        print(f"empty selection: {exc}", file=sys.stderr)
        return EXIT_EMPTY
    except CertificateError as exc:
        print(f"certificate failure: {exc}", file=sys.stderr)
        return EXIT_CERTIFICATE
    except (ScenarioError, ValueError) as exc:
        print(f"error: invalid scenario {args.scenario}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return EXIT_OUTPUT
    for path in outcome.files:
        print(path)
    print(f"ok: {scenario.kind}: {outcome.summary}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
