"""Gaussian ground-state calculus for the ion chain.

Covariance matrices use xxpp ordering, ``sigma_ij = <{R_i, R_j}>/2`` with
``R = (x_1..x_M, p_1..p_M)``. A unit-frequency vacuum has ``sigma = I/2``, so
every pure mode has symplectic eigenvalue 1/2.

Ion sites are labelled 1..N throughout.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chain import Chain

__all__ = [
    "InvalidStateError",
    "TwoIonSqueezing",
    "symplectic_form",
    "ground_state_covariance",
    "reduce",
    "symplectic_eigenvalues",
    "entropy_function",
    "entanglement_entropy",
    "partial_transpose",
    "log_negativity",
    "two_ion_analytics",
    "half_chain_entropy",
    "entropy_vs_chain_size",
    "group_placement",
    "negativity_vs_separation",
]

PURITY_TOL = 1e-6


class InvalidStateError(ValueError):
    """Covariance matrix violates the uncertainty principle or a precondition."""


def symplectic_form(m):
    """Standard symplectic form for ``m`` modes in xxpp ordering."""
    eye = np.eye(m)
    zero = np.zeros((m, m))
    return np.block([[zero, eye], [-eye, zero]])


def _sqrt_pair(G):
    w, M = np.linalg.eigh(np.asarray(G, dtype=float))
    if w[0] <= 0:
        raise InvalidStateError("coupling matrix is not positive definite")
    root = np.sqrt(w)
    return (M / root) @ M.T, (M * root) @ M.T


def ground_state_covariance(G):
    """Vacuum covariance of ``H = p.p/2 + x.G.x/2``.

    Position block ``G^(-1/2)/2``, momentum block ``G^(1/2)/2``.
    """
    inv_root, root = _sqrt_pair(G)
    n = inv_root.shape[0]
    sigma = np.zeros((2 * n, 2 * n))
    sigma[:n, :n] = 0.5 * inv_root
    sigma[n:, n:] = 0.5 * root
    return sigma


def _n_modes(sigma):
    sigma = np.asarray(sigma)
    if sigma.ndim != 2 or sigma.shape[0] != sigma.shape[1] or sigma.shape[0] % 2:
        raise InvalidStateError(f"bad covariance shape {sigma.shape}")
    return sigma.shape[0] // 2


def _site_index(sites, n):
    sites = [int(s) for s in sites]
    if not sites:
        raise InvalidStateError("empty site subset")
    bad = [s for s in sites if not 1 <= s <= n]
    if bad:
        raise InvalidStateError(f"sites {bad} out of range 1..{n}")
    if len(set(sites)) != len(sites):
        raise InvalidStateError(f"repeated sites in {sites}")
    return np.array(sites) - 1


def reduce(sigma, sites):
    """Covariance of the sub-chain ``sites`` (1-based), keeping their order."""
    n = _n_modes(sigma)
    idx = _site_index(sites, n)
    keep = np.concatenate([idx, idx + n])
    return np.asarray(sigma)[np.ix_(keep, keep)]


def symplectic_eigenvalues(sigma, check=True):
    """Symplectic spectrum, descending, one value per mode.

    With ``check`` an InvalidStateError is raised for values below
    ``1/2 - 1e-6``. Partially transposed matrices must pass ``check=False``.
    """
    n = _n_modes(sigma)
    ev = np.linalg.eigvals(1j * symplectic_form(n) @ np.asarray(sigma, dtype=float))
    # eigenvalues come in +/- mu pairs
    mu = np.sort(ev.real)[n:][::-1]
    if check and mu[-1] < 0.5 - PURITY_TOL:
        raise InvalidStateError(
            f"symplectic eigenvalue {mu[-1]:.6g} below 1/2: not a physical state"
        )
    return mu


def entropy_function(mu):
    """Von Neumann entropy (bits) of a thermal mode with symplectic value ``mu``."""
    mu = np.asarray(mu, dtype=float)
    eps = np.clip(mu - 0.5, 0.0, None)
    plus = eps + 1.0
    with np.errstate(divide="ignore", invalid="ignore"):
        minus_term = np.where(eps > 0, eps * np.log2(np.where(eps > 0, eps, 1.0)), 0.0)
    return plus * np.log2(plus) - minus_term


def _require_pure(sigma):
    mu = symplectic_eigenvalues(sigma)
    if np.max(np.abs(mu - 0.5)) > PURITY_TOL:
        raise InvalidStateError("entanglement entropy needs a pure global state")


def entanglement_entropy(sigma, partition):
    """Bipartite entropy (ebits) between ``partition`` and the rest."""
    _require_pure(sigma)
    n = _n_modes(sigma)
    partition = list(partition)
    if not partition or len(_site_index(partition, n)) == n:
        return 0.0
    mu = symplectic_eigenvalues(reduce(sigma, partition))
    return float(np.sum(entropy_function(mu)))


def partial_transpose(sigma, sites):
    """Flip the sign of the momenta of ``sites`` (1-based)."""
    n = _n_modes(sigma)
    idx = _site_index(sites, n)
    flip = np.ones(2 * n)
    flip[n + idx] = -1.0
    return np.asarray(sigma) * np.outer(flip, flip)


def log_negativity(sigma, group_a, group_b):
    """Logarithmic negativity (base 2) between two disjoint groups of sites."""
    group_a, group_b = list(group_a), list(group_b)
    if set(group_a) & set(group_b):
        raise InvalidStateError("groups overlap")
    sub = reduce(sigma, group_a + group_b)
    na = len(group_a)
    pt = partial_transpose(sub, range(na + 1, na + len(group_b) + 1))
    nu = symplectic_eigenvalues(pt, check=False)
    return float(np.sum(np.maximum(0.0, -np.log2(2.0 * nu))))


@dataclass(frozen=True)
class TwoIonSqueezing:
    """Local two-mode-squeezing data of the two-ion vacuum.

    ``e_beta`` is the squeezing ratio: the vacuum is
    ``sqrt(1 - q^2) sum_n q^n |n>|n>`` with ``q = e_beta``.
    """

    lam: float
    e_beta: float
    entropy_ebits: float


def two_ion_analytics(frequencies=(1.0, np.sqrt(3.0))):
    """Closed-form two-ion values from the COM and breathing frequencies."""
    nu0, nu1 = frequencies
    lam = 0.25 * (np.sqrt(nu0 / nu1) + np.sqrt(nu1 / nu0))
    e_beta = np.sqrt((lam - 0.5) / (lam + 0.5))
    return TwoIonSqueezing(float(lam), float(e_beta), float(entropy_function(lam)))


def half_chain_entropy(n_ions):
    """Entropy between the left and right halves of an even chain."""
    if n_ions < 2 or n_ions % 2:
        raise InvalidStateError(f"half-chain entropy needs even N >= 2, got {n_ions}")
    sigma = ground_state_covariance(Chain.build(n_ions).coupling)
    return entanglement_entropy(sigma, range(1, n_ions // 2 + 1))


def entropy_vs_chain_size(n_values):
    """Rows ``(N, entropy)`` for symmetric half-chain bipartitions."""
    return [(int(n), half_chain_entropy(int(n))) for n in n_values]


def group_placement(n_ions, size, separation):
    """Two groups of ``size`` ions with ``separation`` ions between them.

    The block is centred in the chain; an odd leftover puts the extra ion
    on the right.
    """
    span = 2 * size + separation
    if size < 1 or separation < 0 or span > n_ions:
        raise InvalidStateError(
            f"groups of {size} with separation {separation} do not fit in {n_ions} ions"
        )
    start = (n_ions - span) // 2 + 1
    a = list(range(start, start + size))
    b = list(range(start + size + separation, start + span))
    return a, b


def negativity_vs_separation(n_ions=20, group_sizes=(1, 3, 5)):
    """Rows ``(separation, size, log_negativity)`` for every geometry that fits."""
    sigma = ground_state_covariance(Chain.build(n_ions).coupling)
    rows = []
    for size in group_sizes:
        for sep in range(0, n_ions - 2 * size + 1):
            a, b = group_placement(n_ions, size, sep)
            rows.append((sep, size, log_negativity(sigma, a, b)))
    return rows
