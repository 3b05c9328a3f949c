"""Command-line interface.

Subcommands::

    sdprod solve PROGRAM [--gap-tol G] [--feas-tol F] [--max-iters N]
    sdprod check PROGRAM
    sdprod product PROGRAM1 PROGRAM2 OUT
    sdprod generate KIND [INPUT] OUT
    sdprod suite

Exit codes: 0 on success (for solve: status optimal; for suite: all
checks pass), 2 on unreadable or malformed input, 3 on a non-optimal
solver status, 1 on suite failures.
"""

from __future__ import annotations

import argparse
import sys

from . import formats, library, model, structure, suite
from .solver import SolveStatus, SolverConfig, solve

GENERATE_KINDS = ("theta", "gamma2inf", "counterexample", "fl-sigma", "fl-sigma-bar")


def _read(path: str) -> str:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return handle.read()
    except OSError as exc:
        print(f"error: cannot read {path}: {exc.strerror}", file=sys.stderr)
        raise SystemExit(2) from None


def _write(path: str, text: str) -> None:
    try:
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(text)
    except OSError as exc:
        print(f"error: cannot write {path}: {exc.strerror}", file=sys.stderr)
        raise SystemExit(2) from None


def _load_program(path: str) -> model.SdpProgram:
    try:
        program = formats.parse_program(_read(path))
    except formats.ParseError as exc:
        print(f"error: {path}: {exc}", file=sys.stderr)
        raise SystemExit(2) from None
    defects = model.validate(program)
    if defects:
        for defect in defects:
            print(f"error: {path}: {defect}", file=sys.stderr)
        raise SystemExit(2)
    return program


def _cmd_solve(args) -> int:
    program = _load_program(args.program)
    cfg = SolverConfig(
        gap_tol=args.gap_tol, feas_tol=args.feas_tol, max_iters=args.max_iters
    )
    report = solve(program, cfg)
    sol = report.solution
    res = sol.residuals

    def fixed(value: float) -> str:
        out = f"{value:.6f}"
        return "0.000000" if out == "-0.000000" else out

    print(f"status {report.status.value}")
    print(f"primal {fixed(sol.primal_value)}")
    print(f"dual {fixed(sol.dual_value)}")
    print(f"gap {res.duality_gap:.3e}")
    print(f"residual-affine {res.max_affine:.3e}")
    print(f"residual-nonneg {res.max_nonneg:.3e}")
    print(f"residual-psd {min(res.x_min_eigenvalue, 0.0):.3e}")
    print(f"residual-dual-psd {min(res.dual_slack_min_eigenvalue, 0.0):.3e}")
    print(f"iterations {report.iterations}")
    return 0 if report.status is SolveStatus.OPTIMAL else 3


def _cmd_check(args) -> int:
    program = _load_program(args.program)
    report = structure.check_conditions(program)
    print(f"rule {report.rule.value}")
    print(f"objective-psd {'yes' if report.psd_objective else 'no'}")
    if report.partition is None:
        print("partition none")
    else:
        left = ",".join(map(str, report.partition.left))
        right = ",".join(map(str, report.partition.right))
        print(f"partition left={left} right={right}")
    if report.witness is None:
        print("span-witness none")
    else:
        u = " ".join(f"{v:.9g}" for v in report.witness.u)
        print(f"span-witness residual={report.witness.residual:.3e} u={u}")
    return 0


def _cmd_product(args) -> int:
    p1 = _load_program(args.program1)
    p2 = _load_program(args.program2)
    _write(args.out, formats.emit_program(model.product(p1, p2)))
    return 0


def _cmd_generate(args) -> int:
    kind = args.kind
    if kind == "counterexample":
        if args.out is None:
            args.out = args.input  # two-argument form: generate KIND OUT
            args.input = None
        if args.out is None:
            print("error: generate counterexample requires an output path",
                  file=sys.stderr)
            return 2
        program = library.counterexample_program()
        _write(args.out, formats.emit_program(program))
        return 0
    if args.input is None or args.out is None:
        print(f"error: generate {kind} requires INPUT and OUT paths",
              file=sys.stderr)
        return 2
    text = _read(args.input)
    try:
        if kind == "theta":
            program = library.theta_program(formats.parse_graph(text))
        elif kind == "gamma2inf":
            program = library.gamma2inf_program(formats.parse_sign_matrix(text))
        elif kind == "fl-sigma":
            program = library.fl_sigma_program(formats.parse_game(text))
        elif kind == "fl-sigma-bar":
            program = library.fl_sigma_bar_prime_program(formats.parse_game(text))
        else:  # pragma: no cover - argparse restricts choices
            print(f"error: unknown kind {kind!r}", file=sys.stderr)
            return 2
    except formats.ParseError as exc:
        print(f"error: {args.input}: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    _write(args.out, formats.emit_program(program))
    return 0


def _cmd_suite(_args) -> int:
    rows = suite.run_suite()
    sys.stdout.write(suite.render_rows(rows))
    return 0 if all(r.passed for r in rows) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sdprod",
        description="Model, solve, and product structured semidefinite programs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="solve a program file")
    p_solve.add_argument("program")
    p_solve.add_argument("--gap-tol", type=float, default=1e-6)
    p_solve.add_argument("--feas-tol", type=float, default=1e-7)
    p_solve.add_argument("--max-iters", type=int, default=500)
    p_solve.set_defaults(func=_cmd_solve)

    p_check = sub.add_parser(
        "check", help="report which product rule applies to a program"
    )
    p_check.add_argument("program")
    p_check.set_defaults(func=_cmd_check)

    p_product = sub.add_parser("product", help="write the product of two programs")
    p_product.add_argument("program1")
    p_product.add_argument("program2")
    p_product.add_argument("out")
    p_product.set_defaults(func=_cmd_product)

    p_generate = sub.add_parser(
        "generate", help="write a program file for a bundled family"
    )
    p_generate.add_argument("kind", choices=GENERATE_KINDS)
    p_generate.add_argument("input", nargs="?")
    p_generate.add_argument("out", nargs="?")
    p_generate.set_defaults(func=_cmd_generate)

    p_suite = sub.add_parser("suite", help="run the built-in verification suite")
    p_suite.set_defaults(func=_cmd_suite)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
