"""``repro-all``: regenerate every figure table and score the acceptance criteria."""
from __future__ import annotations

import dataclasses
import hashlib
import sys
import time
from pathlib import Path
from typing import Callable, NamedTuple

import numpy as np

from .chain import Chain
from .detect import (
    DetectionConfig,
    classical_propagation,
    commutator_profile,
    light_cone_front,
    light_cone_leakage,
    perturbative_amplitudes,
)
from .experiments import (
    resolve,
    run_commutator,
    run_entropy_vs_n,
    run_eta,
    run_modes,
    run_negativity,
    run_propagate,
    run_swap_eval,
    run_swap_opt,
    run_two_ion,
)
from .gaussian import (
    entropy_function,
    ground_state_covariance,
    reduce,
    symplectic_eigenvalues,
    two_ion_analytics,
)
from .oracle import dyson_amplitudes
from .report import write_json
from .swap import (
    REFERENCE_SEQUENCE,
    LocalModeBasis,
    SwapSimulator,
    run_sequence,
    schmidt_coefficients,
    two_mode_squeezed_state,
)

ZERO_TOL = 1e-9


def max_positive_separation(rows, size, tol=ZERO_TOL):
    seps = [sep for sep, s, val in rows if s == size and val > tol]
    return max(seps) if seps else -1


def oracle_configs(n_configs=20, seed=0):
    """Random ``(N, probes, delta, T, truncated)`` tuples on 2-4 ion chains."""
    rng = np.random.default_rng(seed)
    out = []
    for i in range(n_configs):
        n = (2, 3, 4)[i % 3]
        a, b = sorted(rng.choice(np.arange(1, n + 1), size=2, replace=False))
        out.append(
            (n, (int(a), int(b)), float(rng.uniform(-3, 3)), float(rng.uniform(0.2, 2.0)), bool(i % 2))
        )
    return out


def oracle_errors(n, probes, delta, duration, truncated):
    """Relative deviations of the mode-sum amplitudes from the Fock integration."""
    chain = Chain.build(n)
    cfg = DetectionConfig(n, probes, duration, delta, omega=1.0, truncated=truncated)
    amps = perturbative_amplitudes(cfg, chain)
    evol = chain.truncated(cfg.cut_site).coupling if truncated else chain.coupling
    x_ab, na, nb, ov, _ = dyson_amplitudes(chain.coupling, evol, probes, delta, duration)

    def rel(a, b):
        return abs(a - b) / abs(b)

    return {
        "x_ab": rel(x_ab, amps.x_ab),
        "norm_a": rel(na, amps.norm_a),
        "norm_b": rel(nb, amps.norm_b),
        "overlap_ab": rel(ov, amps.overlap_ab),
    }


def fock_ground_entropy(sim):
    s = schmidt_coefficients(sim.ground, sim.d)
    p = s**2
    p = p[p > 0]
    return float(-np.sum(p * np.log2(p)))


@dataclasses.dataclass
class CheckContext:
    out_dir: Path
    seed: int = 0
    jobs: int = 1

    def config(self, name, **kw):
        return resolve(name, overrides={"out": str(self.out_dir), **kw})


def check_two_ion_lambda(ctx):
    sigma2 = ground_state_covariance(Chain.build(2).coupling)
    lam = float(symplectic_eigenvalues(reduce(sigma2, [1]))[0])
    return abs(lam - 0.5189) <= 5e-4, {"lam": lam}


def check_two_ion_entropy(ctx):
    lam = two_ion_analytics().lam
    ent = float(entropy_function(lam))
    ent_fock = fock_ground_entropy(SwapSimulator(LocalModeBasis(3.0**0.25, 16)))
    ok = abs(ent - 0.136) <= 1e-3 and abs(ent - ent_fock) <= 1e-3
    return ok, {"entropy": ent, "entropy_fock": ent_fock}


def check_squeezed_structure(ctx):
    sim = SwapSimulator(LocalModeBasis(3.0**0.25, 16))
    s = schmidt_coefficients(sim.ground, sim.d)
    ratios = s[1:5] / s[:4]
    q = two_ion_analytics().e_beta
    fid = float(abs(np.vdot(two_mode_squeezed_state(q, sim.d), sim.ground)) ** 2)
    ok = bool(np.all(np.abs(ratios - 0.1366) <= 1e-3)) and fid >= 0.999
    return ok, {"schmidt_ratios": ratios, "fidelity": fid}


def check_swap_sequence(ctx):
    res = run_swap_eval(ctx.config("swap-eval"))
    ratio, purity = res["ratio_to_ground_entropy"], res["purity"]
    return 0.94 <= ratio <= 0.99 and 0.994 <= purity <= 1.0, {"ratio": ratio, "purity": purity}


def check_optimizer(ctx):
    opt3 = run_swap_opt(ctx.config("swap-opt", pairs=3, restarts=32, seed=ctx.seed, jobs=ctx.jobs))
    opt2 = run_swap_opt(ctx.config("swap-opt", pairs=2, restarts=32, seed=ctx.seed, jobs=ctx.jobs))
    r3, r2 = opt3["ratio_to_ground_entropy"], opt2["ratio_to_ground_entropy"]
    return r3 >= 0.97 and 0.90 <= r2 <= 0.95, {
        "ratio_3_pairs": r3,
        "ratio_2_pairs": r2,
        "sequence_3_pairs": opt3["sequence"],
        "sequence_2_pairs": opt2["sequence"],
    }


def check_negativity(ctx):
    rows = run_negativity(ctx.config("negativity", n_ions=20))["rows"]
    single = {sep: v for sep, size, v in rows if size == 1}
    reach = [max_positive_separation(rows, k) for k in (1, 3, 5)]
    beyond = max(v for sep, v in single.items() if sep >= 2)
    ok = beyond < ZERO_TOL and single[0] > ZERO_TOL and reach[0] < reach[1] < reach[2]
    return ok, {
        "single_ion_adjacent": single[0],
        "single_ion_max_beyond_1": beyond,
        "max_positive_separation": reach,
    }


def check_entropy_growth(ctx):
    rows = run_entropy_vs_n(ctx.config("entropy-vs-n", max_n=20))["rows"]
    ents = [e for _, e in rows]
    return bool(np.all(np.diff(ents) > 0)), {"entropies": ents}


def check_perturbative_oracle(ctx):
    errs = [oracle_errors(*c) for c in oracle_configs(20, ctx.seed)]
    worst = max(max(e.values()) for e in errs)
    return worst <= 1e-6, {"worst_relative": worst, "n_configs": len(errs)}


def check_eta(ctx):
    chain20 = Chain.build(20)

    def sweep(probes, duration):
        cfg = ctx.config("eta", probes=probes, duration=duration)
        return np.array(run_eta(cfg, chain20)["rows"], dtype=float)

    far = sweep((6, 15), 0.8)
    near = sweep((10, 11), 0.05)
    # T measured against the breathing frequency instead of the COM one
    alt = sweep((6, 15), 0.8 / np.sqrt(3))
    near_dev = float(np.max(np.abs(near[:, 1] - near[:, 2]) / near[:, 1]))
    far_full, far_trunc = float(far[:, 1].max()), float(far[:, 2].max())
    window = far[far[:, 3] > 0, 0]
    ok = far_full > 1 and far_trunc > 1 and far_trunc >= far_full and near_dev < 0.01
    return ok, {
        "max_eta_full": far_full,
        "max_eta_truncated": far_trunc,
        "entangled_deltas_full": [float(window.min()), float(window.max())] if window.size else None,
        "near_max_relative_deviation": near_dev,
        "max_eta_full_T_over_sqrt3": float(alt[:, 1].max()),
    }


def check_light_cone(ctx):
    run_commutator(ctx.config("commutator", n_ions=80))
    run_propagate(ctx.config("propagate", n_ions=80))
    chain80 = Chain.build(80)
    ref = (80 + 1) // 2
    times = np.linspace(0.0, 0.8, 81)
    traj = classical_propagation(chain80.coupling, ref, times)
    front = light_cone_front(traj.displacement, ref)
    leak = light_cone_leakage(commutator_profile(chain80.coupling, ref, times), ref, front)
    return leak < 1e-3, {"leakage": leak, "front": front[::10]}


def check_gauge_independence(ctx):
    eofs = [run_sequence(REFERENCE_SEQUENCE, LocalModeBasis(g, 24)).eof for g in np.linspace(1, 2, 6)]
    spread = float(max(eofs) - min(eofs))
    return spread < 1e-4, {"eof_spread": spread}


class Criterion(NamedTuple):
    id: int
    name: str
    check: Callable
    time_limit: float


CRITERIA = (
    Criterion(1, "two-ion lambda", check_two_ion_lambda, 1),
    Criterion(2, "two-ion entropy", check_two_ion_entropy, 5),
    Criterion(3, "two-mode squeezed structure", check_squeezed_structure, 10),
    Criterion(4, "reference swap sequence", check_swap_sequence, 30),
    Criterion(5, "pulse optimizer", check_optimizer, 600),
    Criterion(6, "negativity vs separation", check_negativity, 30),
    Criterion(7, "entropy growth", check_entropy_growth, 30),
    Criterion(8, "perturbative oracle", check_perturbative_oracle, 300),
    Criterion(9, "eta reproduction", check_eta, 120),
    Criterion(10, "light cone", check_light_cone, 60),
    Criterion(11, "gauge independence", check_gauge_independence, 120),
)


def run_criterion(crit, ctx):
    """Run one check; returns ``(passed, measured, seconds)``."""
    t0 = time.perf_counter()
    ok, measured = crit.check(ctx)
    seconds = time.perf_counter() - t0
    return bool(ok) and seconds < crit.time_limit, measured, seconds


def evaluate_criteria(out_dir, seed=0, jobs=1, log=None):
    """Run all acceptance checks; returns a list of criterion records."""
    log = log or (lambda msg: None)
    ctx = CheckContext(Path(out_dir), seed, jobs)
    records = []
    for crit in CRITERIA:
        passed, measured, seconds = run_criterion(crit, ctx)
        records.append({"id": crit.id, "name": crit.name, "passed": passed, "measured": measured})
        log(f"[{'PASS' if passed else 'FAIL'}] {crit.id:2d} {crit.name} ({seconds:.1f}s)")
    records.append(
        {
            "id": 12,
            "name": "determinism",
            "passed": None,
            "measured": {"note": "compare file digests across repeated runs"},
        }
    )
    return records


def repro_all(cfg, log=None):
    """Write every figure table under ``cfg.out`` plus ``manifest.json``."""
    log = log or (lambda msg: print(msg, file=sys.stderr))
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    run_modes(resolve("modes", overrides={"out": str(out), "n_ions": 2}))
    run_two_ion(resolve("two-ion", overrides={"out": str(out)}))
    records = evaluate_criteria(out, seed=cfg.seed, jobs=cfg.jobs, log=log)
    digests = {
        p.name: hashlib.sha256(p.read_bytes()).hexdigest()
        for p in sorted(out.iterdir())
        if p.is_file() and p.name != "manifest.json" and not p.name.startswith(".")
    }
    payload = {
        "criteria": records,
        "all_passed": all(r["passed"] for r in records if r["passed"] is not None),
        "files": digests,
    }
    write_json(out / "manifest.json", cfg.to_dict(), payload)
    return payload
