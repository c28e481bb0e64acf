"""Experiment configs and runners behind the command-line interface.

Each runner takes a resolved :class:`ExperimentConfig`, writes its output
files under ``config.out`` and returns a small summary dict.
"""
from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .chain import Chain
from .detect import (
    DetectionConfig,
    classical_propagation,
    commutator_profile,
    eta_sweep,
)
from .gaussian import (
    entropy_vs_chain_size,
    negativity_vs_separation,
    two_ion_analytics,
)
from .report import _plain, write_json, write_table
from .swap import (
    REFERENCE_SEQUENCE,
    LocalModeBasis,
    format_sequence,
    optimize_sequence,
    parse_sequence,
    run_sequence,
)

EXPERIMENTS = (
    "modes",
    "two-ion",
    "entropy-vs-n",
    "negativity",
    "swap-eval",
    "swap-opt",
    "eta",
    "commutator",
    "propagate",
    "repro-all",
)


class ConfigError(ValueError):
    """Invalid experiment configuration; ``field`` names the culprit."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


@dataclass
class ExperimentConfig:
    experiment: str
    n_ions: int | None = None
    probes: tuple | None = None
    duration: float | None = None
    detuning_grid: list | None = None
    fock_dim: int = 16
    gauge_freq: float = 3.0**0.25
    pairs: int = 3
    restarts: int = 32
    seed: int = 0
    out: str = "out"
    format: str = "csv"
    max_n: int = 20
    sizes: tuple = (1, 3, 5)
    sequence: str = format_sequence(REFERENCE_SEQUENCE)
    slices: list | None = None
    jobs: int = 1

    def to_dict(self):
        d = dataclasses.asdict(self)
        d.pop("out")
        d.pop("jobs")
        return d


_DEFAULTS = {
    "modes": {"n_ions": 2},
    "negativity": {"n_ions": 20},
    "eta": {"n_ions": 20, "probes": (6, 15), "duration": 0.8},
    "commutator": {"n_ions": 80},
    "propagate": {"n_ions": 80},
}

DEFAULT_DETUNING_GRID = {"start": -8.0, "stop": 8.0, "num": 321}
DEFAULT_SLICES = {"start": 0.0, "stop": 0.8, "num": 9}


def parse_grid(text, field_name):
    """``"start:stop:num"`` or a comma list of values."""
    text = str(text).strip()
    try:
        if ":" in text:
            start, stop, num = text.split(":")
            return np.linspace(float(start), float(stop), int(num)).tolist()
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(field_name, f"cannot parse grid {text!r}") from exc


def _grid(value, default, field_name):
    if value is None:
        return np.linspace(default["start"], default["stop"], default["num"]).tolist()
    if isinstance(value, str):
        return parse_grid(value, field_name)
    if isinstance(value, dict):
        return np.linspace(value["start"], value["stop"], int(value["num"])).tolist()
    return [float(v) for v in value]


def resolve(experiment, file_values=None, overrides=None):
    """Merge defaults, a config-file dict and CLI overrides, then validate."""
    if experiment not in EXPERIMENTS:
        raise ConfigError("experiment", f"unknown experiment {experiment!r}")
    values = dict(_DEFAULTS.get(experiment, {}))
    known = {f.name for f in dataclasses.fields(ExperimentConfig)}
    for source in (file_values or {}, overrides or {}):
        for key, val in source.items():
            key = key.replace("-", "_")
            if key not in known or key == "experiment":
                raise ConfigError(key, "unknown config field")
            if val is not None:
                values[key] = val
    cfg = ExperimentConfig(experiment, **values)
    validate(cfg)
    return cfg


def _positive_int(cfg, name, minimum=1):
    val = getattr(cfg, name)
    if isinstance(val, bool) or not isinstance(val, (int, np.integer)) or val < minimum:
        raise ConfigError(name, f"must be an integer >= {minimum}, got {val!r}")


def validate(cfg):
    e = cfg.experiment
    if cfg.format not in ("csv", "json"):
        raise ConfigError("format", f"must be csv or json, got {cfg.format!r}")
    _positive_int(cfg, "jobs")
    if e in ("modes", "negativity", "eta", "commutator", "propagate"):
        _positive_int(cfg, "n_ions", 2 if e in ("eta", "commutator", "propagate") else 1)
    if e == "entropy-vs-n":
        _positive_int(cfg, "max_n", 2)
    if e == "negativity":
        sizes = tuple(int(s) for s in cfg.sizes)
        if not sizes or min(sizes) < 1 or 2 * max(sizes) > cfg.n_ions:
            raise ConfigError("sizes", f"group sizes {sizes} do not fit in {cfg.n_ions} ions")
        cfg.sizes = sizes
    if e in ("swap-eval", "swap-opt", "repro-all"):
        _positive_int(cfg, "fock_dim", 2)
        if not float(cfg.gauge_freq) > 0:
            raise ConfigError("gauge_freq", "must be positive")
    if e == "swap-eval":
        try:
            parse_sequence(cfg.sequence)
        except ValueError as exc:
            raise ConfigError("sequence", str(exc)) from exc
    if e == "swap-opt":
        _positive_int(cfg, "pairs")
        _positive_int(cfg, "restarts")
    if e in ("swap-opt", "repro-all"):
        if isinstance(cfg.seed, bool) or not isinstance(cfg.seed, (int, np.integer)) or cfg.seed < 0:
            raise ConfigError("seed", f"must be a non-negative integer, got {cfg.seed!r}")
    if e == "eta":
        try:
            a, b = (int(p) for p in cfg.probes)
        except (TypeError, ValueError) as exc:
            raise ConfigError("probes", f"need two sites, got {cfg.probes!r}") from exc
        if not 1 <= a < b <= cfg.n_ions:
            raise ConfigError("probes", f"need 1 <= l_A < l_B <= {cfg.n_ions}, got {(a, b)}")
        cfg.probes = (a, b)
        if cfg.duration is None or not float(cfg.duration) > 0:
            raise ConfigError("duration", "must be positive")
        cfg.detuning_grid = _grid(cfg.detuning_grid, DEFAULT_DETUNING_GRID, "detuning_grid")
        if not cfg.detuning_grid:
            raise ConfigError("detuning_grid", "empty grid")
    if e in ("commutator", "propagate"):
        cfg.slices = _grid(cfg.slices, DEFAULT_SLICES, "slices")
        if not cfg.slices or min(cfg.slices) < 0:
            raise ConfigError("slices", "need non-negative times")
    return cfg


def _out(cfg, name):
    return Path(cfg.out) / name


def run_modes(cfg):
    chain = Chain.build(cfg.n_ions)
    n = cfg.n_ions
    rows = [
        (k + 1, chain.modes.frequencies[k], *chain.modes.vectors[:, k])
        for k in range(n)
    ]
    cols = ["mode", "frequency"] + [f"v{i + 1}" for i in range(n)]
    f1 = write_table(_out(cfg, f"modes_N{n}"), cfg.format, cfg.to_dict(), cols, rows)
    f2 = write_table(
        _out(cfg, f"positions_N{n}"),
        cfg.format,
        cfg.to_dict(),
        ["ion", "position"],
        [(i + 1, u) for i, u in enumerate(chain.positions)],
    )
    return {"files": [f1.name, f2.name], "frequencies": chain.modes.frequencies.tolist()}


def run_two_ion(cfg):
    sq = two_ion_analytics()
    payload = {"lambda": sq.lam, "e_beta": sq.e_beta, "entropy_ebits": sq.entropy_ebits}
    f = write_json(_out(cfg, "two_ion.json"), cfg.to_dict(), payload)
    return {"files": [f.name], **payload}


def run_entropy_vs_n(cfg):
    rows = entropy_vs_chain_size(range(2, cfg.max_n + 1, 2))
    f = write_table(_out(cfg, "entropy_vs_n"), cfg.format, cfg.to_dict(), ["N", "entropy"], rows)
    return {"files": [f.name], "rows": rows}


def run_negativity(cfg):
    rows = negativity_vs_separation(cfg.n_ions, cfg.sizes)
    f = write_table(
        _out(cfg, f"negativity_N{cfg.n_ions}"),
        cfg.format,
        cfg.to_dict(),
        ["separation", "group_size", "log_negativity"],
        rows,
    )
    return {"files": [f.name], "rows": rows}


def _basis(cfg):
    return LocalModeBasis(float(cfg.gauge_freq), int(cfg.fock_dim))


def _swap_payload(seq, res):
    return {
        "sequence": format_sequence(seq),
        "rho_real": res.rho.real,
        "rho_imag": res.rho.imag,
        "eof": res.eof,
        "purity": res.purity,
        "ground_entropy": res.ground_entropy,
        "ratio_to_ground_entropy": res.ratio,
        "residual_motional_overlap": res.residual_motional_overlap,
        "top_level_population": res.top_level_population,
    }


def _rho_rows(rho):
    return [(i + 1, j + 1, abs(rho[i, j])) for i in range(4) for j in range(4)]


def run_swap_eval(cfg):
    seq = parse_sequence(cfg.sequence)
    res = run_sequence(seq, _basis(cfg))
    payload = _swap_payload(seq, res)
    f1 = write_json(_out(cfg, "swap_eval.json"), cfg.to_dict(), payload)
    f2 = write_table(
        _out(cfg, "swap_rho_abs"), "csv", cfg.to_dict(), ["row", "col", "abs_rho"], _rho_rows(res.rho)
    )
    return {"files": [f1.name, f2.name], **payload}


def run_swap_opt(cfg):
    seq, res = optimize_sequence(cfg.pairs, _basis(cfg), cfg.restarts, cfg.seed, cfg.jobs)
    payload = _swap_payload(seq, res)
    f1 = write_json(_out(cfg, f"swap_opt_p{cfg.pairs}.json"), cfg.to_dict(), payload)
    f2 = write_table(
        _out(cfg, f"swap_opt_p{cfg.pairs}_rho_abs"),
        "csv",
        cfg.to_dict(),
        ["row", "col", "abs_rho"],
        _rho_rows(res.rho),
    )
    return {"files": [f1.name, f2.name], **payload}


def run_eta(cfg, chain=None):
    a, b = cfg.probes
    det = DetectionConfig(cfg.n_ions, (a, b), float(cfg.duration))
    rows = eta_sweep(det, cfg.detuning_grid, chain)
    stem = f"eta_N{cfg.n_ions}_{a}-{b}_T{float(cfg.duration):.6g}"
    meta = cfg.to_dict()
    meta["detection"] = dataclasses.asdict(det)
    f = write_table(
        _out(cfg, stem),
        cfg.format,
        meta,
        ["delta", "eta_full", "eta_truncated", "entangled_full", "entangled_truncated"],
        rows,
    )
    return {"files": [f.name], "rows": rows}


def _center(n):
    return (n + 1) // 2


def run_commutator(cfg):
    chain = Chain.build(cfg.n_ions)
    ref = _center(cfg.n_ions)
    f = commutator_profile(chain.coupling, ref, cfg.slices)
    rows = [
        (n + 1, t, f[n, j]) for j, t in enumerate(cfg.slices) for n in range(cfg.n_ions)
    ]
    meta = cfg.to_dict()
    meta["reference_ion"] = ref
    out = write_table(
        _out(cfg, f"commutator_N{cfg.n_ions}"), cfg.format, meta, ["ion_index", "time", "f"], rows
    )
    return {"files": [out.name], "profile": f}


def run_propagate(cfg):
    chain = Chain.build(cfg.n_ions)
    kick = _center(cfg.n_ions)
    traj = classical_propagation(chain.coupling, kick, cfg.slices)
    rows = [
        (n + 1, t, traj.displacement[n, j])
        for j, t in enumerate(cfg.slices)
        for n in range(cfg.n_ions)
    ]
    meta = cfg.to_dict()
    meta["kick_ion"] = kick
    out = write_table(
        _out(cfg, f"propagation_N{cfg.n_ions}"),
        cfg.format,
        meta,
        ["ion_index", "time", "displacement"],
        rows,
    )
    return {"files": [out.name], "trajectory": traj}


RUNNERS = {
    "modes": run_modes,
    "two-ion": run_two_ion,
    "entropy-vs-n": run_entropy_vs_n,
    "negativity": run_negativity,
    "swap-eval": run_swap_eval,
    "swap-opt": run_swap_opt,
    "eta": run_eta,
    "commutator": run_commutator,
    "propagate": run_propagate,
}


def summary_json(summary):
    keep = {k: v for k, v in summary.items() if k not in ("profile", "trajectory", "rows")}
    return json.dumps(_plain(keep), sort_keys=True)
