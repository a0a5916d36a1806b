"""Command-line front end.

Subcommands::

    calr sweep   [--config PATH | --preset NAME] [--out PATH] [--format csv|json]
                 [--workers N] [--tol X]
    calr eval    [--config PATH | --preset NAME] [--beta B] [--delta D] [--out PATH]
    calr verify  [--config PATH | --preset NAME] [--mutate] [--out PATH]
    calr presets [--preset NAME] [--out PATH]

Exit codes: 0 success, 1 verification failure, 2 configuration or I/O
error, 3 result carries a numerical warning.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import replace

from .config import PRESETS, RunConfig, load_config, preset
from .errors import IntegrationError, InvalidParameterError
from .sweep import evaluate_point, rows_to_csv, rows_to_json, run_sweep
from .verify import run_verify

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2
EXIT_WARNING = 3

log = logging.getLogger("calr")


def _add_common(p, out_help="output path"):
    src = p.add_mutually_exclusive_group()
    src.add_argument("--config", metavar="PATH", help="run configuration (INI)")
    src.add_argument("--preset", choices=PRESETS, help="built-in figure preset")
    p.add_argument("--out", metavar="PATH", help=out_help)
    p.add_argument("--tol", type=float, help="relative quadrature tolerance")
    p.add_argument("--workers", type=int, help="worker processes")
    p.add_argument("--format", choices=("csv", "json"), help="dataset format")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="calr", description=__doc__.split("\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    _add_common(sub.add_parser("sweep", help="evaluate a (beta, delta) grid"),
                "dataset path; the summary goes next to it as <stem>.summary.json")
    p = sub.add_parser("eval", help="evaluate one (beta, delta) point")
    _add_common(p)
    p.add_argument("--beta", type=float)
    p.add_argument("--delta", type=float)
    p = sub.add_parser("verify", help="run the self-check suites")
    _add_common(p, "report path (default: stdout)")
    p.add_argument("--mutate", action="store_true",
                   help="flip the charge sign in the closed form under test")
    p = sub.add_parser("presets", help="list presets or print one as a config file")
    p.add_argument("--preset", choices=PRESETS)
    p.add_argument("--out", metavar="PATH")
    return parser


def _resolve_config(args) -> RunConfig:
    if getattr(args, "config", None):
        cfg = load_config(args.config)
    elif getattr(args, "preset", None):
        cfg = preset(args.preset)
    else:
        cfg = RunConfig()
    num = cfg.numerics
    if args.tol is not None:
        num = replace(num, tol=args.tol)
    if args.workers is not None:
        num = replace(num, workers=args.workers)
    out = cfg.output
    if args.format is not None:
        out = replace(out, format=args.format)
    if args.command == "sweep" and args.out:
        stem = os.path.splitext(args.out)[0]
        out = replace(out, dataset=args.out, summary=stem + ".summary.json")
    return replace(cfg, numerics=num, output=out)


def _write(text, path):
    if path:
        try:
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            raise InvalidParameterError(f"cannot write {path}: {exc}") from exc
    else:
        sys.stdout.write(text)


def cmd_sweep(args) -> int:
    cfg = _resolve_config(args)
    res = run_sweep(cfg)
    log.info("wrote %d rows to %s", len(res.rows), cfg.output.dataset)
    return EXIT_WARNING if res.has_warning else EXIT_OK


def cmd_eval(args) -> int:
    cfg = _resolve_config(args)
    beta = args.beta if args.beta is not None else float(cfg.betas()[0])
    delta = args.delta if args.delta is not None else float(cfg.delta_grid()[0])
    cfg = replace(cfg, sweep=replace(cfg.sweep, betas=(beta,), deltas=(delta,)))
    cfg.validate()
    row = evaluate_point(cfg, beta, delta)
    text = rows_to_csv([row]) if cfg.output.format == "csv" else rows_to_json([row])
    _write(text, args.out)
    return EXIT_WARNING if row["warning"] else EXIT_OK


def cmd_verify(args) -> int:
    cfg = _resolve_config(args)
    report = run_verify(cfg, mutate=args.mutate or None)
    _write(report.to_text(), args.out)
    return EXIT_OK if report.passed else EXIT_FAILED


def cmd_presets(args) -> int:
    if args.preset:
        _write(preset(args.preset).to_text(), args.out)
    else:
        lines = []
        for name in PRESETS:
            c = preset(name)
            lines.append(f"{name}: {c.source.kind}, a_rule={c.slab.a_rule}, "
                         f"delta {c.sweep.delta_min:g}..{c.sweep.delta_max:g}")
        _write("\n".join(lines) + "\n", args.out)
    return EXIT_OK


COMMANDS = {"sweep": cmd_sweep, "eval": cmd_eval, "verify": cmd_verify, "presets": cmd_presets}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except InvalidParameterError as exc:
        print(f"calr: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except IntegrationError as exc:
        print(f"calr: numerical failure: {exc}", file=sys.stderr)
        return EXIT_WARNING


if __name__ == "__main__":
    sys.exit(main())
