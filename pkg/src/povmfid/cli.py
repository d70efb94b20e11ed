"""``povmfid`` command-line interface.

Exit codes: 0 success, 1 verification failure, 2 input error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .builders import BUILDERS
from .designs import povm_cross_frame_potential, povm_frame_potential
from .errors import PovmFidError
from .fidelity import FidelityConstants, estimation_fidelity, incompatibility_witness
from .io import dump_povm, load_povm, write_csv
from .scans import FIGURES, figure_dataset, scan_mub4, scan_sic3, sic_diagnostics
from .verify import SUITES, run_suite

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class _InputError(Exception):
    pass


def _emit(obj) -> None:
    sys.stdout.write(json.dumps(obj, indent=2, allow_nan=False) + "\n")


def _cmd_fidelity(args) -> int:
    povms = [load_povm(f) for f in args.files]
    if not 1 <= len(povms) <= 3 and args.copies is None:
        raise _InputError("give one to three POVM files")
    if args.copies is not None and len(povms) != 1:
        raise _InputError("--copies needs exactly one POVM file")
    res = estimation_fidelity(povms, args.copies, oracle=args.oracle)
    _emit(
        {
            "value": res.value,
            "copies": res.copies,
            "d": res.d,
            "per_element_norms": [float(x) for x in res.per_element_norms],
            "constants": {**FidelityConstants.for_dim(res.d).as_dict(), "n_copy_ub": FidelityConstants.for_dim(res.d).n_copy_ub(res.copies)},
        }
    )
    return EXIT_OK


def _cmd_frame_potential(args) -> int:
    p = load_povm(args.file)
    if args.t <= 0:
        raise _InputError("--t must be positive")
    if args.cross:
        value = povm_cross_frame_potential(p, load_povm(args.cross), args.t)
    else:
        value = povm_frame_potential(p, args.t)
    _emit({"t": args.t, "value": value})
    return EXIT_OK


def _cmd_witness(args) -> int:
    _emit(incompatibility_witness(load_povm(args.file_a), load_povm(args.file_b)).as_dict())
    return EXIT_OK


def _write_table(table, out) -> None:
    text = write_csv(table.header, table.rows, out)
    if out is None:
        sys.stdout.write(text)


def _cmd_scan_mub4(args) -> int:
    _write_table(scan_mub4(args.grid), args.out)
    return EXIT_OK


def _cmd_scan_sic3(args) -> int:
    table = scan_sic3(args.grid)
    _write_table(table, args.out)
    diag = json.dumps(sic_diagnostics(table).as_dict(), indent=2) + "\n"
    if args.out:
        Path(str(args.out) + ".json").write_text(diag, encoding="utf-8")
    else:
        sys.stderr.write(diag)
    return EXIT_OK


def _cmd_scan_figures(args) -> int:
    _write_table(figure_dataset(args.which, dmax=args.dmax, samples=args.samples), args.out)
    return EXIT_OK


def _cmd_verify(args) -> int:
    report = run_suite(args.suite, seed=args.seed, trials=args.trials)
    _emit(report.as_dict())
    return EXIT_OK if report.ok else EXIT_FAIL


def _parse_kv(items):
    out = {}
    for it in items:
        if "=" not in it:
            raise _InputError(f"builder parameter {it!r} is not key=value")
        k, v = it.split("=", 1)
        out[k] = v
    return out


def _cmd_build(args) -> int:
    try:
        p = BUILDERS[args.name](**_parse_kv(args.params))
    except TypeError as exc:
        raise _InputError(f"bad parameters for {args.name}: {exc}") from exc
    except ValueError as exc:
        raise _InputError(str(exc)) from exc
    text = dump_povm(p, args.out)
    if args.out is None:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="povmfid", description="POVM calculus and estimation-fidelity toolkit")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("fidelity", help="estimation fidelity of a product measurement")
    s.add_argument("files", nargs="+", help="POVM JSON files, one per tensor factor")
    s.add_argument("--copies", type=int, help="repeat a single POVM N times")
    s.add_argument("--oracle", action="store_true", help="evaluate Q maps by the permutation sum")
    s.set_defaults(func=_cmd_fidelity)

    s = sub.add_parser("frame-potential", help="POVM frame potential")
    s.add_argument("file")
    s.add_argument("--t", type=float, default=0.5)
    s.add_argument("--cross", help="second POVM for the cross potential")
    s.set_defaults(func=_cmd_frame_potential)

    s = sub.add_parser("witness", help="fidelity-based incompatibility witness")
    s.add_argument("file_a")
    s.add_argument("file_b")
    s.set_defaults(func=_cmd_witness)

    s = sub.add_parser("scan-mub4", help="three-copy fidelity over the d=4 MUB-triple family")
    s.add_argument("--grid", type=int, default=24)
    s.add_argument("--out")
    s.set_defaults(func=_cmd_scan_mub4)

    s = sub.add_parser("scan-sic3", help="three-copy fidelity of the qutrit SIC family")
    s.add_argument("--grid", type=int, default=90)
    s.add_argument("--out")
    s.set_defaults(func=_cmd_scan_sic3)

    s = sub.add_parser("scan-figures", help="figure datasets as CSV")
    s.add_argument("--which", choices=FIGURES, required=True)
    s.add_argument("--dmax", type=int, default=16)
    s.add_argument("--samples", type=int, default=101)
    s.add_argument("--out")
    s.set_defaults(func=_cmd_scan_figures)

    s = sub.add_parser("verify", help="run a seeded self-check suite")
    s.add_argument("--suite", choices=sorted(SUITES), required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--trials", type=int, default=100)
    s.set_defaults(func=_cmd_verify)

    s = sub.add_parser("build", help="write a built-in POVM as JSON")
    s.add_argument("name", choices=sorted(BUILDERS))
    s.add_argument("params", nargs="*", help="key=value constructor parameters")
    s.add_argument("--out")
    s.set_defaults(func=_cmd_build)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (PovmFidError, _InputError, ValueError, OSError) as exc:
        sys.stderr.write(f"povmfid: error: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
