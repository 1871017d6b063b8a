"""Maximally entangled reference chain and two-qubit CHSH correlations.

The reference chain pairs site ``-j`` with site ``j-1`` (``j >= 1``) in the
state ``chi_2 = (|00> + |11>) / sqrt 2``, so the pairs are nested around the
cut between sites -1 and 0.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np
from scipy.optimize import minimize

from .covariance import XYParams, build_truncation
from .diagnostics import parallel_map
from .lattice import Window
from .quasifree import PAULI, DensityMatrix, reduced_density_matrix

CHI2 = np.array([1.0, 0.0, 0.0, 1.0]) / np.sqrt(2)
CIRELSON = float(np.sqrt(2))


class SiteOutsideWindow(ValueError):
    pass


class NotTwoQubit(ValueError):
    pass


@dataclass(frozen=True)
class PairedState:
    """``n_pairs`` singlet-like pairs ``(-j, j-1)``, ``j = 1..n_pairs``."""

    n_pairs: int

    def __post_init__(self):
        if self.n_pairs < 1:
            raise ValueError("need at least one pair")

    @property
    def pairs(self) -> list:
        return [(-j, j - 1) for j in range(1, self.n_pairs + 1)]

    @property
    def window(self) -> Window:
        return Window(-self.n_pairs, self.n_pairs)

    def partner(self, site: int) -> int:
        if site not in self.window:
            raise SiteOutsideWindow(f"site {site} outside {self.window}")
        return -site - 1


def omega1_rdm(state: PairedState, sites) -> DensityMatrix:
    """Exact restriction of the reference chain to ``sites`` (in the given order)."""
    sites = [int(s) for s in sites]
    if len(set(sites)) != len(sites):
        raise ValueError("repeated site")
    factors, order = [], []
    done = set()
    for s in sites:
        if s in done:
            continue
        partner = state.partner(s)
        if partner in sites:
            factors.append(np.outer(CHI2, CHI2))
            order += [s, partner]
            done |= {s, partner}
        else:
            factors.append(np.eye(2) / 2)
            order.append(s)
            done.add(s)
    rho = reduce(np.kron, factors, np.eye(1))
    return DensityMatrix(order, rho).partial_trace(sites)


def correlation_matrix(rho: DensityMatrix) -> np.ndarray:
    """``T_ij = tr(rho sigma_i x sigma_j)`` for ``i, j`` in x, y, z."""
    if rho.n_sites != 2:
        raise NotTwoQubit(f"expected two qubits, got {rho.n_sites}")
    s = [PAULI[c] for c in "XYZ"]
    return np.array([[np.trace(rho.matrix @ np.kron(a, b)).real for b in s] for a in s])


def chsh_beta(rho: DensityMatrix) -> float:
    """``beta = sqrt(u1 + u2)`` from the two largest eigenvalues of ``T^T T``.

    This is half the largest CHSH value over spin-direction observables
    ``a . sigma``; values are two-qubit marginal lower bounds on the
    half-chain Bell correlations.
    """
    t = correlation_matrix(rho)
    u = np.sort(np.linalg.eigvalsh(t.T @ t))[::-1]
    return float(np.sqrt(max(0.0, u[0] + u[1])))


def _unit(theta, phi):
    return np.array([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)])


def chsh_beta_ascent(rho: DensityMatrix, starts: int = 16, seed: int = 0) -> float:
    """Direct maximization of ``(1/2) <A1(B1+B2) + A2(B1-B2)>`` over observable angles."""
    t = correlation_matrix(rho)

    def neg(x):
        a1, a2, b1, b2 = (_unit(x[2 * i], x[2 * i + 1]) for i in range(4))
        return -0.5 * (a1 @ t @ (b1 + b2) + a2 @ t @ (b1 - b2))

    rng = np.random.default_rng(seed)
    best = -np.inf
    for _ in range(starts):
        x0 = rng.uniform(0, 2 * np.pi, size=8)
        res = minimize(neg, x0, method="BFGS", options={"gtol": 1e-12})
        best = max(best, -res.fun)
    return float(best)


@dataclass
class BellRow:
    i: int
    j: int
    beta: float
    label: str = "two-qubit marginal lower bound on beta"


def beta_scan_xy(params: XYParams, site_pairs) -> list:
    """``chsh_beta`` of each two-site marginal of the XY ground state."""
    site_pairs = [tuple(map(int, p)) for p in site_pairs]
    lo = min(min(p) for p in site_pairs)
    hi = max(max(p) for p in site_pairs) + 1
    cov = build_truncation(params, Window(lo, hi))

    def row(p):
        return BellRow(p[0], p[1], chsh_beta(reduced_density_matrix(list(p), cov)))

    return parallel_map(row, site_pairs)
