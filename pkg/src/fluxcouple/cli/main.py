"""``fluxcouple`` command-line entry point."""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace

import numpy as np

from ..errors import FluxCoupleError, OutOfRegime
from ..harmonic import harmonic_1d
from .config import parse_config
from .output import format_csv, format_jsonl
from .sweep import run_sweep

log = logging.getLogger("fluxcouple")


def _cutoff_arg(text):
    if text == "auto":
        return text
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer or 'auto', got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError("cutoff must be >= 1")
    return value


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def build_parser():
    parser = argparse.ArgumentParser(prog="fluxcouple", description="Coupled 3JJ flux-qubit simulator.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_run_flags(p, config_required):
        p.add_argument("--config", required=config_required, help="JSON experiment document")
        p.add_argument("--output", help="output file (default stdout)")
        p.add_argument("--format", choices=("csv", "jsonl"), default="csv")
        p.add_argument("--cutoff", type=_cutoff_arg, help="charge cutoff N or 'auto'")
        p.add_argument("--method", choices=("dense", "lanczos", "auto"))
        p.add_argument("--jobs", type=_positive_int, default=1)

    add_run_flags(sub.add_parser("sweep", help="run every grid point of a plan"), True)
    add_run_flags(sub.add_parser("solve", help="evaluate the plan's circuit at one point"), True)
    solve = sub.choices["solve"]
    solve.add_argument("--value", type=float, help="sweep value to evaluate (default: first grid point)")

    val = sub.add_parser("validate", help="parse and check a document without running it")
    val.add_argument("--config", required=True)

    harm = sub.add_parser("harmonic", help="closed-form double-well table")
    harm.add_argument("--alpha", type=float, nargs="+", default=[0.7])
    harm.add_argument("--r", type=float, nargs="+", default=[50.0])
    harm.add_argument("--gamma", type=float, nargs="+", default=[0.0])
    harm.add_argument("--output")
    return parser


def _load_plan(args):
    with open(args.config, encoding="utf-8") as fh:
        plan = parse_config(fh.read())
    changes = {}
    if getattr(args, "cutoff", None) is not None:
        changes["cutoff"] = args.cutoff
    if getattr(args, "method", None) is not None:
        changes["method"] = args.method
    return plan.with_solver(**changes) if changes else plan


def _emit(text, path):
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _cmd_sweep(args):
    plan = _load_plan(args)
    rows = run_sweep(plan, jobs=args.jobs)
    fmt = format_csv if args.format == "csv" else format_jsonl
    _emit(fmt(rows, plan), args.output)
    return 0


def _cmd_solve(args):
    plan = _load_plan(args)
    if plan.sweep_path is not None:
        value = plan.grid[0] if args.value is None else args.value
        plan = replace(plan, grid=(value,))
    (row,) = run_sweep(plan)
    if args.format == "jsonl" or args.output is not None:
        fmt = format_csv if args.format == "csv" else format_jsonl
        _emit(fmt([row], plan), args.output)
        return 0
    lines = [f"cutoff N = {row.cutoff}"]
    if row.flags:
        lines.append("flags: " + ", ".join(row.flags))
    if row.energies is not None:
        lines.append("lowest energies (E_J):")
        lines += [f"  E{i} = {e:+.12f}" for i, e in enumerate(row.energies)]
    if row.pauli is not None:
        lines.append("Pauli coefficients (E_J):")
        lines += [f"  J_{lab:<3}= {c:+.6e}" for lab, c in row.pauli.items()]
        lines.append(f"  offset = {row.offset:+.12f}")
    if row.stoquastic is not None:
        lines.append(f"stoquastic: {row.stoquastic}")
    sys.stdout.write("\n".join(lines) + "\n")
    return 0


def _cmd_validate(args):
    plan = _load_plan(args)
    npts = len(plan.grid) if plan.sweep_path else 1
    print(f"ok: {len(plan.spec.qubits)} qubit(s), {len(plan.spec.couplers)} coupler(s), {npts} point(s)")
    print(f"plan_sha256: {plan.digest()}")
    return 0


def _cmd_harmonic(args):
    header = ["alpha", "r", "gamma", "m", "omega", "phi_star", "overlap", "gap", "epsilon", "eta", "barrier"]
    lines = [",".join(header)]
    for alpha in args.alpha:
        for r in args.r:
            for gamma in args.gamma:
                try:
                    h = harmonic_1d(alpha, r, gamma)
                except OutOfRegime as exc:
                    log.warning("skipping alpha=%s: %s", alpha, exc)
                    continue
                vals = [alpha, r, gamma] + [getattr(h, k) for k in header[3:]]
                lines.append(",".join(repr(float(np.float64(v))) for v in vals))
    _emit("\n".join(lines) + "\n", args.output)
    return 0


COMMANDS = {"sweep": _cmd_sweep, "solve": _cmd_solve, "validate": _cmd_validate, "harmonic": _cmd_harmonic}


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except FluxCoupleError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
