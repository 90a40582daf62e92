"""Command line front end.

Subcommands: ``price``, ``compare``, ``experiment-s4``, ``oracle-check`` and
``dump-terms N``. Exit codes: 0 success, 1 tolerance breach, 2 configuration
error, 3 capacity or budget error.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys

from . import experiments, symbolic
from .config import parse_config
from .errors import CapacityError, ConfigError, ECIRError

EXIT_OK, EXIT_BREACH, EXIT_CONFIG, EXIT_CAPACITY = 0, 1, 2, 3


def _csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _load(args):
    if not args.config:
        raise ConfigError("--config PATH is required for this subcommand", code="constraint")
    try:
        with open(args.config, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}", code="syntax") from None
    cfg = parse_config(text)
    if args.seed is not None:
        if not 0 <= args.seed < 2 ** 64:
            raise ConfigError("--seed must be an unsigned 64-bit integer", field="--seed")
        cfg = cfg.with_seed(args.seed)
    return cfg


def _emit(text: str, args, cfg=None) -> None:
    path = args.out or (cfg.output.path if cfg is not None else None)
    if path and path != "-":
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ecirbond", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH")
    common.add_argument("--out", metavar="PATH", help="output file (default stdout)")
    common.add_argument("--seed", type=int, metavar="U64", help="override mc.seed")
    common.add_argument("--format", choices=["csv"], default="csv")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("price", parents=[common], help="series price for one configuration")
    sub.add_parser("compare", parents=[common], help="series vs Monte Carlo vs Riccati")
    sub.add_parser("experiment-s4", parents=[common],
                   help="three volatility presets, series price by term count vs MC and Riccati")
    oc = sub.add_parser("oracle-check", parents=[common],
                        help="symbolic expansion vs recurrence engine sweep")
    oc.add_argument("--samples", type=int, default=100)
    dt = sub.add_parser("dump-terms", parents=[common], help="print the derivative term list")
    dt.add_argument("n", type=int)
    return parser


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "price":
            cfg = _load(args)
            _emit(_csv(experiments.PRICE_COLUMNS, [experiments.run_price(cfg)]), args, cfg)
            return EXIT_OK
        if args.command == "compare":
            cfg = _load(args)
            result = experiments.run_compare(cfg)
            _emit(_csv(experiments.COMPARE_COLUMNS, [result.row]), args, cfg)
            for line in result.report:
                print(f"breach: {line}", file=sys.stderr)
            return EXIT_OK if result.ok else EXIT_BREACH
        if args.command == "experiment-s4":
            cfg = _load(args)
            rows = experiments.run_experiment_s4(cfg)
            _emit(_csv(experiments.EXPERIMENT_COLUMNS, rows), args, cfg)
            return EXIT_OK
        if args.command == "oracle-check":
            cfg = _load(args) if args.config else None
            kw = {} if cfg is None else {"t": cfg.window.t, "T": cfg.window.T}
            rows, ok = experiments.oracle_check(samples=args.samples,
                                                seed=0 if args.seed is None else args.seed, **kw)
            _emit(_csv(experiments.ORACLE_COLUMNS, rows), args, cfg)
            return EXIT_OK if ok else EXIT_BREACH
        if args.command == "dump-terms":
            _emit(symbolic.dump_terms(args.n), args)
            return EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except ECIRError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    return EXIT_CONFIG


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
