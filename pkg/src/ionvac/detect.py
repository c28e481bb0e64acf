"""Perturbative two-probe detection of chain vacuum entanglement.

Two probe ions A and B are driven for a time ``T`` by a square pulse of
strength ``Omega`` detuned by ``delta``. To lowest order the probes' qubits
end up in a state fixed by

    X_k = int_0^T Omega e^{i delta t} x_k(t) dt,
    |E_k> = X_k |vac>,   <0|X_AB> = <vac| X_A X_B |vac>,

where ``x_k(t)`` evolves under the full chain or under the chain cut in two
(the initial state is always the full-chain vacuum).

Qubit basis order is (up-up, up-down, down-up, down-down).
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import expm

from .chain import Chain, ChainError

__all__ = [
    "RegimeError",
    "DetectionConfig",
    "PerturbativeAmplitudes",
    "DetectionResult",
    "mode_integrals",
    "perturbative_amplitudes",
    "assemble_rho",
    "detect",
    "eta_sweep",
    "commutator_profile",
    "ClassicalTrajectory",
    "classical_propagation",
    "light_cone_front",
    "light_cone_leakage",
]

EMISSION_BUDGET = 1e-4
MAX_EMISSION = 0.1


class RegimeError(ValueError):
    """Pulse too strong for lowest-order perturbation theory."""


@dataclass(frozen=True)
class DetectionConfig:
    """Probe geometry and pulse. Probe sites are 1-based.

    ``omega=None`` scales the pulse so that ``|E_A|^2 + |E_B|^2`` equals
    ``EMISSION_BUDGET``; ``eta`` does not depend on it.
    """

    n_ions: int
    probes: tuple
    duration: float
    detuning: float = 0.0
    omega: float | None = None
    truncated: bool = False
    cut: int | None = None

    def __post_init__(self):
        a, b = self.probes
        object.__setattr__(self, "probes", (int(a), int(b)))
        if self.n_ions < 2:
            raise ValueError("detection needs at least two ions")
        if not 1 <= a < b <= self.n_ions:
            raise ValueError(f"probes must satisfy 1 <= l_A < l_B <= N, got {self.probes}")
        if not self.duration > 0:
            raise ValueError(f"duration must be positive, got {self.duration}")
        if self.omega is not None and not self.omega > 0:
            raise ValueError("omega must be positive")

    @property
    def cut_site(self):
        return self.n_ions // 2 if self.cut is None else self.cut


def mode_integrals(frequencies, delta, duration):
    """``I^+-_n = int_0^T exp(i (delta +- nu_n) t) dt`` in closed form."""
    nu = np.asarray(frequencies, dtype=float)
    out = []
    for w in (delta + nu, delta - nu):
        small = np.abs(w * duration) < 1e-8
        safe = np.where(small, 1.0, w)
        val = np.expm1(1j * safe * duration) / (1j * safe)
        # series for |wT| tiny: T (1 + i w T / 2)
        val = np.where(small, duration * (1 + 0.5j * w * duration), val)
        out.append(val)
    return out[0], out[1]


@dataclass(frozen=True)
class PerturbativeAmplitudes:
    """Lowest-order probe amplitudes, components in the vacuum's normal modes.

    ``e_a[n] = <1_n| X_A |vac>``; ``x_ab = <vac| X_A X_B |vac>``.
    """

    x_ab: complex
    e_a: np.ndarray
    e_b: np.ndarray
    omega: float

    @property
    def overlap_ab(self):
        """``<E_A|E_B>``."""
        return complex(np.vdot(self.e_a, self.e_b))

    @property
    def norm_a(self):
        return float(np.linalg.norm(self.e_a))

    @property
    def norm_b(self):
        return float(np.linalg.norm(self.e_b))

    @property
    def x_ab_norm_sq(self):
        """``||X_A X_B |vac>||^2`` by Wick's theorem."""
        return float(
            abs(self.x_ab) ** 2
            + self.norm_a**2 * self.norm_b**2
            + abs(self.overlap_ab) ** 2
        )

    @property
    def eta(self):
        denom = self.norm_a * self.norm_b
        return float(abs(self.x_ab) / denom) if denom > 0 else 0.0


def _probe_operators(evolution, delta, duration, site):
    # X_k = rx . x(0) + rp . p(0) for a unit square pulse
    w, M = np.linalg.eigh(evolution)
    nu = np.sqrt(w)
    ip, im = mode_integrals(nu, delta, duration)
    cos_int = 0.5 * (ip + im)
    sin_int = (ip - im) / (2j * nu)
    row = M[site - 1]
    return M @ (cos_int * row), M @ (sin_int * row)


def perturbative_amplitudes(cfg, chain=None):
    """Amplitudes for ``cfg``; ``chain`` may be passed to reuse a built chain."""
    chain = Chain.build(cfg.n_ions) if chain is None else chain
    if chain.n_ions != cfg.n_ions:
        raise ChainError("chain size does not match config")
    evolution = chain.truncated(cfg.cut_site).coupling if cfg.truncated else chain.coupling
    M = chain.modes.vectors
    nu = chain.modes.frequencies
    create, annihilate = [], []
    for site in cfg.probes:
        rx, rp = _probe_operators(evolution, cfg.detuning, cfg.duration, site)
        mx, mp = M.T @ rx, M.T @ rp
        # x_j = sum_n M_jn (a_n + a_n^dag)/sqrt(2 nu_n),
        # p_j = sum_n M_jn i sqrt(nu_n/2) (a_n^dag - a_n)
        create.append(mx / np.sqrt(2 * nu) + 1j * mp * np.sqrt(nu / 2))
        annihilate.append(mx / np.sqrt(2 * nu) - 1j * mp * np.sqrt(nu / 2))
    x_ab = complex(np.sum(annihilate[0] * create[1]))
    e_a, e_b = create
    if cfg.omega is None:
        emission = np.vdot(e_a, e_a).real + np.vdot(e_b, e_b).real
        omega = np.sqrt(EMISSION_BUDGET / emission) if emission > 0 else 1.0
    else:
        omega = cfg.omega
    return PerturbativeAmplitudes(x_ab * omega**2, e_a * omega, e_b * omega, float(omega))


@dataclass(frozen=True)
class DetectionResult:
    rho: np.ndarray
    eta: float
    negativity: float
    criterion: float
    entangled: bool
    eta_defined: bool = True


def _partial_transpose_b(rho):
    return rho.reshape(2, 2, 2, 2).transpose(0, 3, 2, 1).reshape(4, 4)


def assemble_rho(amps):
    """Two-qubit state of the probes, renormalized to unit trace.

    ``negativity`` is computed from the partial transpose of ``rho``;
    ``criterion`` is ``|<0|X_AB>| - |E_A||E_B|`` in the same normalization.
    """
    na2, nb2 = amps.norm_a**2, amps.norm_b**2
    if na2 + nb2 > MAX_EMISSION:
        raise RegimeError(
            f"|E_A|^2 + |E_B|^2 = {na2 + nb2:.3g} > {MAX_EMISSION}; use a smaller omega"
        )
    rho = np.zeros((4, 4), dtype=complex)
    rho[0, 0] = amps.x_ab_norm_sq
    rho[1, 1] = na2
    rho[2, 2] = nb2
    rho[3, 3] = 1.0 - na2 - nb2
    rho[0, 3] = -amps.x_ab
    rho[3, 0] = -np.conj(amps.x_ab)
    rho[1, 2] = np.conj(amps.overlap_ab)  # <E_B|E_A>
    rho[2, 1] = amps.overlap_ab
    trace = np.trace(rho).real
    rho /= trace
    pt = np.linalg.eigvalsh(_partial_transpose_b(rho))
    negativity = float(-np.sum(pt[pt < 0]))
    denom = amps.norm_a * amps.norm_b
    return DetectionResult(
        rho=rho,
        eta=amps.eta,
        negativity=negativity,
        criterion=float((abs(amps.x_ab) - denom) / trace),
        entangled=bool(denom > 0 and amps.eta > 1),
        eta_defined=bool(denom > 0),
    )


def detect(cfg, chain=None):
    return assemble_rho(perturbative_amplitudes(cfg, chain))


def eta_sweep(cfg, deltas, chain=None):
    """Rows ``(delta, eta_full, eta_truncated, entangled_full, entangled_truncated)``."""
    chain = Chain.build(cfg.n_ions) if chain is None else chain
    rows = []
    for delta in deltas:
        full = detect(replace(cfg, detuning=float(delta), truncated=False), chain)
        trunc = detect(replace(cfg, detuning=float(delta), truncated=True), chain)
        rows.append((float(delta), full.eta, trunc.eta, full.entangled, trunc.entangled))
    return rows


def commutator_profile(coupling, ref, times):
    """``f[n, t] = [x_ref(t), x_n(0)] / (-i)``, 1-based ``ref``.

    Exact mode sum ``sum_m M_ref,m M_n,m sin(nu_m t) / nu_m``.
    """
    w, M = np.linalg.eigh(np.asarray(coupling, dtype=float))
    nu = np.sqrt(w)
    t = np.asarray(times, dtype=float)
    kernel = np.sin(np.outer(nu, t)) / nu[:, None]
    return (M * M[ref - 1]) @ kernel


@dataclass(frozen=True)
class ClassicalTrajectory:
    times: np.ndarray
    displacement: np.ndarray  # (N, len(times))
    velocity: np.ndarray

    def energy(self, coupling):
        G = np.asarray(coupling)
        x, v = self.displacement, self.velocity
        return 0.5 * np.sum(v * v, axis=0) + 0.5 * np.einsum("it,ij,jt->t", x, G, x)


def classical_propagation(coupling, kick_site, times):
    """Linearized response to a unit velocity kick on ``kick_site`` (1-based).

    Propagates the phase-space generator ``[[0, 1], [-G, 0]]`` with a matrix
    exponential per time slice.
    """
    G = np.asarray(coupling, dtype=float)
    n = G.shape[0]
    if n < 2:
        raise ValueError("propagation needs at least two ions")
    gen = np.block([[np.zeros((n, n)), np.eye(n)], [-G, np.zeros((n, n))]])
    state0 = np.zeros(2 * n)
    state0[n + kick_site - 1] = 1.0
    times = np.asarray(times, dtype=float)
    traj = np.column_stack([expm(gen * t) @ state0 for t in times])
    return ClassicalTrajectory(times, traj[:n], traj[n:])


def light_cone_front(displacement, kick_site, threshold=1e-3):
    """Distance (in ions) reached by the classical disturbance at each slice.

    An ion counts as reached once ``|x|`` exceeds ``threshold`` times the
    global maximum; the front is the largest such distance from the kick
    so far, so it never recedes.
    """
    disp = np.abs(np.asarray(displacement))
    level = threshold * disp.max()
    dist = np.abs(np.arange(disp.shape[0]) - (kick_site - 1))
    front = np.empty(disp.shape[1], dtype=int)
    reach = 0
    for j in range(disp.shape[1]):
        hit = dist[disp[:, j] >= level]
        reach = max(reach, int(hit.max()) if hit.size else 0)
        front[j] = reach
    return front


def light_cone_leakage(profile, ref, front):
    """Largest ``|f|`` beyond the front, relative to ``max |f|``."""
    prof = np.abs(np.asarray(profile))
    dist = np.abs(np.arange(prof.shape[0]) - (ref - 1))
    outside = dist[:, None] > np.asarray(front)[None, :]
    peak = prof.max()
    if peak == 0:
        return 0.0
    return float(prof[outside].max() / peak) if outside.any() else 0.0
