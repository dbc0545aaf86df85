"""
Command line front end.

    jetspace jets --divisor E4 --k 11
    jetspace valuative
    jetspace wedge --pair 5,2 --out cert.json
    jetspace run-all --jobs 4 --out report.json
    jetspace validate-cert cert.json

Exit status: 0 certified or success, 2 open or partial, 1 error.
"""

import argparse
import sys
from typing import List, Optional

from data.fixture_access import DEFAULT_FIXTURE, load_certificate, write_json
from jetspace import config
from jetspace.cases import CERTIFIED, Fixture, certified_unsat, run_all, run_jets, run_valuative, run_wedge, \
    validate_file_data
from jetspace.config import DEFAULT_JOBS, EngineBudget, status
from jetspace.errors import JetspaceError
from jetspace.valuative import pair_label

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_OPEN = 2


def _budget(args) -> EngineBudget:
    return EngineBudget.with_steps(args.budget)


def cmd_jets(args) -> int:
    fixture = Fixture.load(args.fixture)
    report = run_jets(fixture, args.divisor, args.k)
    fs = report.system
    for j, p in sorted(fs.reduced.items()):
        print(f"f_{{{fs.divisor.name},{j}}} = {p}")
    print(f"leading form: {report.leading_form}  factors: {', '.join(report.factors)}")
    if args.out:
        write_json(args.out, report.to_dict())
    return EXIT_OK


def cmd_valuative(args) -> int:
    fixture = Fixture.load(args.fixture)
    report = run_valuative(fixture)
    print(report.order_frame.to_string())
    print()
    print(report.poset_frame.to_string())
    print()
    print("residual pairs: " + (", ".join(pair_label(p) for p in report.representatives) or "none"))
    if report.lipman is not None:
        print(f"Lipman vector: {report.lipman}")
    if args.out:
        write_json(args.out, report.to_dict())
    return EXIT_OK


def cmd_wedge(args) -> int:
    fixture = Fixture.load(args.fixture)
    pair = fixture.pair(args.pair)
    report = run_wedge(fixture, pair, _budget(args), audit=not args.no_audit)
    if args.out:
        data = report.to_dict()
        data["pair"] = pair_label(pair)
        write_json(args.out, data)
    return EXIT_OK if report.verdict == CERTIFIED else EXIT_OPEN


def cmd_run_all(args) -> int:
    fixture = Fixture.load(args.fixture)
    report = run_all(fixture, _budget(args), args.jobs, name=args.fixture or DEFAULT_FIXTURE.name)
    print(report.frame().to_string(index=False))
    print()
    print(report.case_frame().to_string(index=False))
    if args.out:
        write_json(args.out, report.to_dict())
    return EXIT_OK if report.verdict == CERTIFIED else EXIT_OPEN


def cmd_validate_cert(args) -> int:
    data = load_certificate(args.path)
    results = validate_file_data(data, _budget(args))
    return EXIT_OK if certified_unsat(results) else EXIT_OPEN


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="jetspace",
                                     description="Jet equations, valuative checks and wedge certificates "
                                                 "for the Nash problem on a surface singularity.")
    parser.add_argument("--quiet", action="store_true", help="suppress status lines")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, budget=True):
        p.add_argument("--fixture", default=None, help=f"fixture JSON (default {DEFAULT_FIXTURE.name})")
        p.add_argument("--out", default=None, help="write the JSON result here")
        if budget:
            p.add_argument("--budget", type=int, default=None, help="reduction-step budget for Gröbner runs")

    p = sub.add_parser("jets", help="family equations of one divisor")
    common(p, budget=False)
    p.add_argument("--divisor", required=True)
    p.add_argument("--k", type=int, required=True)
    p.set_defaults(func=cmd_jets)

    p = sub.add_parser("valuative", help="order table, partial order and residual pairs")
    common(p, budget=False)
    p.set_defaults(func=cmd_valuative)

    p = sub.add_parser("wedge", help="run the case script of one residual pair")
    common(p)
    p.add_argument("--pair", required=True, help="J,I for the claim N_J not inside N_I")
    p.add_argument("--no-audit", action="store_true", help="skip the configuration audit")
    p.set_defaults(func=cmd_wedge)

    p = sub.add_parser("run-all", help="jets, valuative and every wedge case")
    common(p)
    p.add_argument("--jobs", type=int, default=DEFAULT_JOBS, help="cases run in parallel")
    p.set_defaults(func=cmd_run_all)

    p = sub.add_parser("validate-cert", help="recompute stored certificates")
    p.add_argument("path")
    p.add_argument("--budget", type=int, default=None)
    p.set_defaults(func=cmd_validate_cert)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.quiet:
        config.QUIET = True
    try:
        return args.func(args)
    except JetspaceError as error:
        status(f"[{error.stage or 'error'}] {error}", "❌")
        return EXIT_ERROR
    except (OSError, ValueError) as error:
        status(f"[error] {error}", "❌")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
