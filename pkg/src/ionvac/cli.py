"""Command-line runner: ``ionvac <experiment> [options]``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure. On
failure a one-line JSON error object is written to stderr.
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .chain import ChainError
from .detect import RegimeError
from .experiments import EXPERIMENTS, RUNNERS, ConfigError, resolve, summary_json
from .gaussian import InvalidStateError
from .swap import TruncationError

EXIT_CONFIG = 2
EXIT_NUMERIC = 3

_HELP = {
    "modes": "equilibrium positions and normal modes",
    "two-ion": "closed-form two-ion squeezing values",
    "entropy-vs-n": "half-chain entropy versus chain size",
    "negativity": "log-negativity between groups versus separation",
    "swap-eval": "evaluate a pulse sequence on the two-ion swap",
    "swap-opt": "optimize V/W pulse strengths",
    "eta": "detection ratio eta versus detuning, full and truncated chains",
    "commutator": "displacement commutator profile from the central ion",
    "propagate": "classical propagation of a central velocity kick",
    "repro-all": "regenerate every table and score the acceptance criteria",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        _fail(EXIT_CONFIG, "usage", message)


def _probes(text):
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("expected two comma-separated sites, e.g. 6,15")
    return tuple(int(p) for p in parts)


def _sizes(text):
    return tuple(int(p) for p in text.split(","))


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with config fields")
    common.add_argument("--n-ions", type=int)
    common.add_argument("--probes", type=_probes, help="two 1-based sites, e.g. 6,15")
    common.add_argument("--duration", type=float, help="pulse duration T (units 1/nu_COM)")
    common.add_argument("--detuning-grid", help="start:stop:num or comma list")
    common.add_argument("--fock-dim", type=int)
    common.add_argument("--gauge-freq", type=float)
    common.add_argument("--pairs", type=int)
    common.add_argument("--restarts", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--out", help="output directory (default ./out)")
    common.add_argument("--format", choices=["csv", "json"])
    common.add_argument("--max-n", type=int, help="largest even N for entropy-vs-n")
    common.add_argument("--sizes", type=_sizes, help="group sizes for negativity, e.g. 1,3,5")
    common.add_argument("--sequence", help='pulse list, e.g. "V:0.31,W:0.38"')
    common.add_argument("--slices", help="time slices, start:stop:num or comma list")
    common.add_argument("--jobs", type=int, help="worker processes for optimizer restarts")

    parser = _Parser(prog="ionvac", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="experiment", required=True, parser_class=_Parser)
    for name in EXPERIMENTS:
        sub.add_parser(name, parents=[common], help=_HELP[name])
    return parser


def _fail(code, kind, message, field=None):
    err = {"error": kind, "message": message}
    if field is not None:
        err["field"] = field
    print(json.dumps(err, sort_keys=True), file=sys.stderr)
    sys.exit(code)


def _load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            values = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        _fail(EXIT_CONFIG, "config", f"cannot read {path}: {exc}", "config")
    if not isinstance(values, dict):
        _fail(EXIT_CONFIG, "config", "config file must hold a JSON object", "config")
    values.pop("experiment", None)
    return values


def main(argv=None):
    args = build_parser().parse_args(argv)
    overrides = {
        k: v for k, v in vars(args).items() if k not in ("experiment", "config") and v is not None
    }
    file_values = _load_config(args.config) if args.config else None
    try:
        cfg = resolve(args.experiment, file_values, overrides)
        if cfg.experiment == "repro-all":
            from .repro import repro_all

            result = repro_all(cfg)
            print(json.dumps({"all_passed": result["all_passed"]}, sort_keys=True))
            return 0
        summary = RUNNERS[cfg.experiment](cfg)
    except ConfigError as exc:
        _fail(EXIT_CONFIG, "config", str(exc), exc.field)
    except (ChainError, InvalidStateError, RegimeError, TruncationError, np.linalg.LinAlgError) as exc:
        _fail(EXIT_NUMERIC, "numerical", f"{type(exc).__name__}: {exc}")
    print(summary_json(summary))
    return 0


if __name__ == "__main__":
    sys.exit(main())
