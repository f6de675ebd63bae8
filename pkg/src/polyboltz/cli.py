"""Command-line front end: ``polyboltz verify|nu-table|spectrum --config <path>``.

Exit codes: 0 when every assertion passes, 1 on an assertion failure,
2 on a usage or configuration error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import __version__
from .config import RunConfig, load_config, resolve_suites, validate
from .errors import PolyBoltzError
from .linearized_operator import MIN_BASIS_ORDER
from .verification import nu_rows, nu_scan, run_suites, suite_galerkin, write_csv, write_report

log = logging.getLogger("polyboltz")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # usage errors exit with 2 and a short message
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="polyboltz", description="Verify collision operators of polyatomic gas mixtures.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, text in (("verify", "run verification suites and write report.txt plus CSVs"),
                       ("nu-table", "tabulate the collision frequency on a (|xi|, I) grid"),
                       ("spectrum", "assemble the Galerkin matrix and report its eigenvalues")):
        s = sub.add_parser(name, help=text, description=text)
        s.add_argument("--config", required=True,
                       help="config file, or the name of a bundled config")
        s.add_argument("--out", help="output directory (default: from the config)")
        s.add_argument("--suite", action="append", default=None, metavar="NAME",
                       help="suite to run (repeatable; default: the config's list)")
        s.add_argument("--grid-xi-max", type=float, dest="grid_xi_max")
        s.add_argument("--grid-I-max", type=float, dest="grid_I_max")
        s.add_argument("--basis-order", type=int, dest="basis_order")
        s.add_argument("-v", "--verbose", action="store_true")
    return p


def _configure(args) -> RunConfig:
    cfg = load_config(args.config)
    changes = {}
    if args.out:
        changes["out"] = args.out
    if args.suite:
        changes["suites"] = resolve_suites([s.lower() for s in args.suite])
    if args.grid_xi_max is not None:
        changes["grid_xi_max"] = args.grid_xi_max
    if args.grid_I_max is not None:
        changes["grid_I_max"] = args.grid_I_max
    if args.basis_order is not None:
        if args.basis_order < MIN_BASIS_ORDER:
            raise PolyBoltzError(f"--basis-order must be at least {MIN_BASIS_ORDER} so the basis "
                                 f"contains the collision invariants, got {args.basis_order}")
        changes["basis_order"] = args.basis_order
    return validate(cfg.with_overrides(**changes)) if changes else cfg


def cmd_verify(cfg: RunConfig) -> int:
    results = run_suites(cfg)
    out = Path(cfg.out)
    path = write_report(out, results, f"verify {cfg.source}")
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name}  ({r.elapsed:.1f} s)")
        for a in r.assertions:
            if not a.passed:
                print("   " + a.line(r.name))
    print(f"report: {path}")
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAIL


def cmd_nu_table(cfg: RunConfig) -> int:
    rep = nu_scan(cfg)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "nu_table.csv", ["species", "xi", "I", "nu", "ratio"], nu_rows(rep))
    print(f"nu table: {rep.nu.size} rows, ratio in [{rep.c_min:.6g}, {rep.c_max:.6g}], "
          f"max/min {rep.spread:.4g}, boundary flatness {rep.max_flatness:.4g}")
    print(f"written: {out / 'nu_table.csv'}")
    return EXIT_OK


def cmd_spectrum(cfg: RunConfig) -> int:
    res = suite_galerkin(cfg)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "eigenvalues.csv", res.header, res.rows)
    lines = [a.line("spectrum") for a in res.assertions]
    (out / "kernel_summary.txt").write_text("\n".join(lines) + "\n")
    print("\n".join(lines))
    return EXIT_OK if res.passed else EXIT_FAIL


_COMMANDS = {"verify": cmd_verify, "nu-table": cmd_nu_table, "spectrum": cmd_spectrum}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _configure(args)
    except (PolyBoltzError, ValueError) as exc:
        print(f"polyboltz: configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return _COMMANDS[args.command](cfg)
    except PolyBoltzError as exc:
        print(f"polyboltz: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
