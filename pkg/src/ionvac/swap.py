"""Swap of two-ion motional vacuum entanglement onto the ions' qubits.

The simulation space is qubit_A x qubit_B x osc_A x osc_B, stored as an
array of shape ``(2, 2, d, d)``. Qubit index 0 is the excited level (up) and
index 1 the ground level (down), so the flattened two-qubit basis is
(up-up, up-down, down-up, down-down).

The qubit Pauli operators are chosen to mirror the truncated oscillator
quadratures, with down playing the role of the Fock vacuum:
``sigma_x = |up><dn| + |dn><up|`` and ``sigma_y = i(|up><dn| - |dn><up|)``,
the qubit analogue of ``p ~ i(|1><0| - |0><1|)``.

Pulses are instantaneous kicks ``V(a) = exp(i a sigma_x x)`` and
``W(b) = exp(i b sigma_y p)`` on one ion's qubit and local quadratures.
A sequence is applied in the order it is written.
"""
from __future__ import annotations

import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import NamedTuple

import numpy as np
from scipy.optimize import minimize

from .chain import Chain
from .fock import chain_hamiltonian, quadratures
from .gaussian import entanglement_entropy, ground_state_covariance

__all__ = [
    "SIGMA_X",
    "SIGMA_Y",
    "TruncationError",
    "TruncationWarning",
    "LocalModeBasis",
    "Pulse",
    "SwapResult",
    "parse_sequence",
    "format_sequence",
    "REFERENCE_SEQUENCE",
    "build_motional_hamiltonian",
    "ground_state_fock",
    "schmidt_coefficients",
    "two_mode_squeezed_state",
    "SwapSimulator",
    "concurrence",
    "two_qubit_eof",
    "run_sequence",
    "alternating_sequence",
    "optimize_sequence",
]

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, 1j], [-1j, 0]], dtype=complex)
_STANDARD_SY = np.array([[0, -1j], [1j, 0]], dtype=complex)

LEAK_TOL = 1e-6


class TruncationError(RuntimeError):
    """Population reached the top Fock level."""


class TruncationWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class LocalModeBasis:
    """Local oscillator basis: gauge frequency of the Fock states and cutoff."""

    gauge_frequency: float = 3.0**0.25
    fock_dim: int = 16

    def __post_init__(self):
        if not self.gauge_frequency > 0:
            raise ValueError(f"gauge_frequency must be positive, got {self.gauge_frequency}")
        if int(self.fock_dim) != self.fock_dim or self.fock_dim < 2:
            raise ValueError(f"fock_dim must be an integer >= 2, got {self.fock_dim}")


class Pulse(NamedTuple):
    kind: str  # "V" or "W"
    strength: float
    ion: str = "both"  # "A", "B" or "both"


def parse_sequence(text):
    """Parse ``"V:0.31,W:0.38"``; an optional third field picks the ion (A/B/both)."""
    pulses = []
    for item in filter(None, (s.strip() for s in text.split(","))):
        parts = item.split(":")
        if len(parts) not in (2, 3):
            raise ValueError(f"bad pulse {item!r}, expected KIND:STRENGTH[:ION]")
        kind = parts[0].strip().upper()
        if kind not in ("V", "W"):
            raise ValueError(f"unknown pulse kind {parts[0]!r}")
        strength = float(parts[1])
        if not np.isfinite(strength):
            raise ValueError(f"non-finite strength in {item!r}")
        ion = parts[2].strip() if len(parts) == 3 else "both"
        ion = {"a": "A", "b": "B", "both": "both"}.get(ion.lower())
        if ion is None:
            raise ValueError(f"unknown ion in {item!r}")
        pulses.append(Pulse(kind, strength, ion))
    return pulses


def format_sequence(seq):
    out = []
    for p in seq:
        s = f"{p.kind}:{float(p.strength)!r}"
        out.append(s if p.ion == "both" else f"{s}:{p.ion}")
    return ",".join(out)


REFERENCE_SEQUENCE = parse_sequence("V:0.31,W:0.38,V:0.50,W:0.39,V:0.53,W:0.16")


def two_ion_coupling():
    return Chain.build(2).coupling


def build_motional_hamiltonian(G2, basis):
    """Dense two-oscillator Hamiltonian on ``d^2`` levels in the gauge basis."""
    G2 = np.asarray(G2, dtype=float)
    if G2.shape != (2, 2):
        raise ValueError("motional Hamiltonian needs a 2x2 coupling matrix")
    if np.linalg.eigvalsh(G2)[0] <= 0:
        raise ValueError("coupling matrix is not positive definite")
    H, _ = chain_hamiltonian(G2, basis.fock_dim, basis.gauge_frequency)
    return H.toarray()


def ground_state_fock(H):
    """Lowest eigenvector of ``H``, largest-magnitude amplitude made real positive."""
    w, v = np.linalg.eigh(H)
    if w[1] - w[0] < 1e-9 * max(1.0, abs(w[0])):
        raise ValueError("degenerate ground level")
    g = v[:, 0].astype(complex)
    k = np.argmax(np.abs(g))
    return g * (abs(g[k]) / g[k])


def schmidt_coefficients(g, d):
    """Schmidt coefficients of a two-oscillator amplitude vector, descending."""
    return np.linalg.svd(np.asarray(g).reshape(d, d), compute_uv=False)


def two_mode_squeezed_state(q, d):
    """``sqrt(1 - q^2) sum_n q^n |n>|n>`` truncated to ``d`` levels."""
    amp = np.zeros((d, d), dtype=complex)
    n = np.arange(d)
    amp[n, n] = np.sqrt(1 - q * q) * q**n
    return amp.reshape(-1)


def _expi(gen, s):
    # exp(i s gen) for Hermitian gen
    w, v = np.linalg.eigh(gen)
    return (v * np.exp(1j * s * w)) @ v.conj().T


@dataclass(frozen=True)
class SwapResult:
    rho: np.ndarray
    eof: float
    purity: float
    ground_entropy: float
    residual_motional_overlap: float
    top_level_population: float

    @property
    def ratio(self):
        return self.eof / self.ground_entropy


class SwapSimulator:
    """Two-ion qubit-oscillator simulator in a fixed local Fock basis."""

    def __init__(self, basis=LocalModeBasis(), coupling=None):
        self.basis = basis
        self.d = d = basis.fock_dim
        self.coupling = two_ion_coupling() if coupling is None else np.asarray(coupling)
        self.H = build_motional_hamiltonian(self.coupling, basis)
        self.ground = ground_state_fock(self.H)
        self.x, self.p = quadratures(d, basis.gauge_frequency)
        self._xeig = np.linalg.eigh(self.x)
        self._peig = np.linalg.eigh(self.p)
        self._Heig = np.linalg.eigh(self.H)
        eye = np.eye(d)
        self._p_two = [np.kron(self.p, eye), np.kron(eye, self.p)]
        _, sy_vecs = np.linalg.eigh(SIGMA_Y)
        self._sy_proj = [(s, np.outer(v, v.conj())) for s, v in zip((-1, 1), sy_vecs.T)]
        self.ground_entropy = entanglement_entropy(
            ground_state_covariance(self.coupling), [1]
        )

    def initial_state(self):
        psi = np.zeros((2, 2, self.d, self.d), dtype=complex)
        psi[1, 1] = self.ground.reshape(self.d, self.d)
        return psi

    def kick(self, kind, strength):
        """``exp(i s sigma (x) q)`` as a ``(2, d, 2, d)`` array (qubit, osc)."""
        if kind not in ("V", "W"):
            raise ValueError(f"unknown pulse kind {kind!r}")
        sigma, (w, v) = (SIGMA_X, self._xeig) if kind == "V" else (SIGMA_Y, self._peig)
        return self._kick(sigma, w, v, strength)

    def _kick(self, sigma, w, v, strength):
        d = self.d
        se, sv = np.linalg.eigh(sigma)
        U = np.zeros((2, d, 2, d), dtype=complex)
        for e, vec in zip(se, sv.T):
            osc = (v * np.exp(1j * strength * e * w)) @ v.conj().T
            U += np.einsum("uv,xy->uxvy", np.outer(vec, vec.conj()), osc)
        return U

    @staticmethod
    def _apply_local(U, psi, ion):
        if ion == "A":
            return np.einsum("uxvy,vbyn->ubxn", U, psi)
        return np.einsum("uxvy,avmy->aumx", U, psi)

    def apply_pulse(self, psi, pulse, check=True):
        """Apply one pulse; with ``check`` a TruncationWarning flags leakage."""
        kind, strength, ion = pulse
        if strength != 0.0:
            U = self.kick(kind, strength)
            for target in ("A", "B") if ion == "both" else (ion,):
                psi = self._apply_local(U, psi, target)
        if check:
            leak = self.top_level_population(psi)
            if leak > LEAK_TOL:
                warnings.warn(
                    f"top Fock level population {leak:.2e} after {kind}({strength})",
                    TruncationWarning,
                    stacklevel=2,
                )
        return psi

    def free_evolution(self, psi, tau):
        w, v = self._Heig
        U0 = (v * np.exp(-1j * tau * w)) @ v.conj().T
        d = self.d
        flat = psi.reshape(4, d * d) @ U0.T
        return flat.reshape(2, 2, d, d)

    def pulse_pair_W(self, psi, ion, beta_prime, tau, method="conjugation"):
        """``V'(beta') U0(tau) V'(-beta')`` with ``V'(b) = exp(i b sigma_y x)``.

        As ``tau -> 0`` at fixed ``beta = beta' tau`` this tends to ``W(beta)``.
        ``method="conjugation"`` uses the exact identity that the kicks shift
        ``p -> p - s beta'`` inside the free evolution (``s`` the sigma_y
        eigenvalue), which stays inside the Fock cutoff even for large
        ``beta'``. ``method="direct"`` applies the three steps literally and
        is only trustworthy while ``beta'`` is small.
        """
        if tau <= 0:
            raise ValueError("tau must be positive")
        if ion not in ("A", "B"):
            raise ValueError(f"ion must be 'A' or 'B', got {ion!r}")
        if method == "direct":
            w, v = self._xeig
            psi = self._apply_local(self._kick(SIGMA_Y, w, v, -beta_prime), psi, ion)
            psi = self.free_evolution(psi, tau)
            return self._apply_local(self._kick(SIGMA_Y, w, v, beta_prime), psi, ion)
        if method != "conjugation":
            raise ValueError(f"unknown method {method!r}")
        d = self.d
        pk = self._p_two[0 if ion == "A" else 1]
        out = np.zeros_like(psi)
        for s, proj in self._sy_proj:
            Hs = self.H - s * beta_prime * pk + 0.5 * beta_prime**2 * np.eye(d * d)
            Us = _expi(Hs, -tau)
            if ion == "A":
                part = np.einsum("uv,vb...->ub...", proj, psi)
            else:
                part = np.einsum("uv,av...->au...", proj, psi)
            out += (part.reshape(4, d * d) @ Us.T).reshape(psi.shape)
        return out

    @staticmethod
    def top_level_population(psi):
        pa = np.sum(np.abs(psi[:, :, -1, :]) ** 2)
        pb = np.sum(np.abs(psi[:, :, :, -1]) ** 2)
        return float(max(pa, pb))

    @staticmethod
    def qubit_state(psi):
        T = psi.reshape(4, -1)
        rho = T @ T.conj().T
        return 0.5 * (rho + rho.conj().T)

    def run(self, seq, strict=True):
        psi = self.initial_state()
        for pulse in seq:
            psi = self.apply_pulse(psi, pulse, check=False)
        leak = self.top_level_population(psi)
        if strict and leak > LEAK_TOL:
            raise TruncationError(
                f"top Fock level population {leak:.2e} exceeds {LEAK_TOL:g}; "
                "raise fock_dim"
            )
        rho = self.qubit_state(psi)
        evals = np.linalg.eigvalsh(rho)
        return SwapResult(
            rho=rho,
            eof=two_qubit_eof(rho),
            purity=float(np.real(np.trace(rho @ rho))),
            ground_entropy=self.ground_entropy,
            residual_motional_overlap=float(evals[-1]),
            top_level_population=leak,
        )


@lru_cache(maxsize=8)
def _simulator(basis):
    return SwapSimulator(basis)


def run_sequence(seq, basis=LocalModeBasis(), strict=True):
    """Run ``seq`` from the two-ion vacuum with both qubits down."""
    return _simulator(basis).run(seq, strict=strict)


def _check_density(rho, tol=1e-9):
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise ValueError(f"expected a 4x4 density matrix, got {rho.shape}")
    if np.max(np.abs(rho - rho.conj().T)) > tol:
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1) > tol:
        raise ValueError(f"density matrix trace {np.trace(rho).real:.12g} != 1")
    if np.linalg.eigvalsh(rho)[0] < -tol:
        raise ValueError("density matrix is not positive semidefinite")
    return rho


def concurrence(rho):
    """Two-qubit concurrence from the spin-flipped spectrum."""
    rho = _check_density(rho)
    yy = np.kron(_STANDARD_SY, _STANDARD_SY)
    flipped = yy @ rho.conj() @ yy
    w, v = np.linalg.eigh(rho)
    root = (v * np.sqrt(np.clip(w, 0, None))) @ v.conj().T
    lam = np.sqrt(np.clip(np.linalg.eigvalsh(root @ flipped @ root), 0, None))[::-1]
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def _binary_entropy(p):
    if p <= 0 or p >= 1:
        return 0.0
    return float(-p * np.log2(p) - (1 - p) * np.log2(1 - p))


def two_qubit_eof(rho):
    """Entanglement of formation (ebits) of a two-qubit state."""
    c = min(1.0, concurrence(rho))
    return _binary_entropy(0.5 * (1 + np.sqrt(1 - c * c)))


def alternating_sequence(strengths):
    """``V(s0) W(s1) V(s2) ...`` applied to both ions."""
    return [Pulse("V" if i % 2 == 0 else "W", float(s)) for i, s in enumerate(strengths)]


def _restart(args):
    basis, n_pairs, seed_seq = args
    rng = np.random.default_rng(seed_seq)
    x0 = rng.uniform(0.0, 1.0, 2 * n_pairs)
    sim = _simulator(basis)

    def objective(theta):
        return -sim.run(alternating_sequence(theta), strict=False).eof

    res = minimize(
        objective,
        x0,
        method="Nelder-Mead",
        options={"xatol": 1e-6, "fatol": 1e-10, "maxiter": 400 * len(x0)},
    )
    return float(-res.fun), res.x


def optimize_sequence(n_pairs, basis=LocalModeBasis(), restarts=32, seed=0, n_jobs=1):
    """Maximize the qubit EoF over alternating V/W strengths.

    Multi-start Nelder-Mead; each restart draws its start uniformly from
    [0, 1] with an RNG spawned from ``seed``, so the result does not depend
    on ``n_jobs``. Ties are broken by restart index.
    """
    if int(n_pairs) != n_pairs or n_pairs < 1:
        raise ValueError(f"n_pairs must be a positive integer, got {n_pairs!r}")
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    seeds = np.random.SeedSequence(seed).spawn(restarts)
    jobs = [(basis, int(n_pairs), s) for s in seeds]
    if n_jobs > 1:
        with ProcessPoolExecutor(n_jobs) as pool:
            results = list(pool.map(_restart, jobs))
    else:
        results = [_restart(j) for j in jobs]
    best = max(range(restarts), key=lambda i: (results[i][0], -i))
    seq = alternating_sequence(results[best][1])
    return seq, run_sequence(seq, basis, strict=False)
