"""Command-line entry point ``gmix``."""

from __future__ import annotations

import argparse
import json
import sys

from .errors import BudgetExceeded, ConfigError, GmixError
from .experiment import ExperimentConfig, report, run
from .gaussmax import verify_mc
from .rng import U64_MAX

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BUDGET = 3


def _u64(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value <= U64_MAX:
        raise argparse.ArgumentTypeError(f"{text} is not an unsigned 64-bit integer")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gmix", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="Monte Carlo recovery experiment")
    p.add_argument("--config", required=True, help="experiment config (JSON)")
    p.add_argument("--out", required=True, help="CSV output path")
    p.add_argument("--seed", type=_u64, help="override the config seed")
    p.add_argument("--threads", type=_positive_int, default=1)
    p.add_argument("--timing", action="store_true",
                   help="fill elapsed_ms (the CSV is then no longer reproducible)")
    p.add_argument("--summary", help="write the JSON summary here instead of stdout")

    p = sub.add_parser("report", help="threshold report and impossibility margins")
    p.add_argument("--config", required=True)
    p.add_argument("--json", action="store_true", help="print JSON instead of a table")

    p = sub.add_parser("gaussmax", help="Monte Carlo check of the Gaussian-maximum bounds")
    p.add_argument("--n", type=_positive_int, required=True, help="number of variables N")
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--trials", type=_positive_int, required=True)
    p.add_argument("--seed", type=_u64, default=0)
    return parser


def _print_table(doc: dict, indent: str = "") -> None:
    for key, value in doc.items():
        if isinstance(value, dict):
            print(f"{indent}{key}:")
            _print_table(value, indent + "  ")
        elif isinstance(value, list) and value and isinstance(value[0], dict):
            for item in value:
                print(f"{indent}{key}[{item.get('value', '')}]:")
                _print_table({k: v for k, v in item.items() if k != "value"}, indent + "  ")
        else:
            if isinstance(value, float):
                value = format(value, ".6g")
            print(f"{indent}{key:<22} {value}")


def _cmd_run(args) -> int:
    config = ExperimentConfig.load(args.config)
    if args.seed is not None:
        config = config.with_seed(args.seed)
    result = run(config, threads=args.threads, timing=args.timing)
    result.write_csv(args.out)
    text = json.dumps(result.summary, indent=2)
    if args.summary:
        with open(args.summary, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return EXIT_OK


def _cmd_report(args) -> int:
    doc = report(ExperimentConfig.load(args.config))
    if args.json:
        print(json.dumps(doc, indent=2))
    else:
        _print_table(doc)
    return EXIT_OK


def _cmd_gaussmax(args) -> int:
    if not 0 < args.eps < 1:
        raise ConfigError(f"--eps must lie in (0, 1), got {args.eps}")
    print(json.dumps(verify_mc(args.n, args.eps, args.trials, args.seed).to_dict(), indent=2))
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = {"run": _cmd_run, "report": _cmd_report, "gaussmax": _cmd_gaussmax}[args.command]
    try:
        return handler(args)
    except BudgetExceeded as exc:
        print(f"gmix: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (ConfigError, GmixError, ValueError) as exc:
        print(f"gmix: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
