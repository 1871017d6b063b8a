"""Fast internal consistency checks behind ``fermichain selftest``."""
from __future__ import annotations

import numpy as np

from .covariance import XYParams, build_truncation, ring_projection, symbol_samples, offset_grid
from .diagnostics import hs_norm_E_minus_F_matrix, trace_X_matrix
from .lattice import Window
from .pfaffian import pfaffian
from .quasifree import monomial_to_test_vectors, moment_pfaffian, normal_order, wick_moment_bruteforce
from .resource import PairedState, chsh_beta, omega1_rdm


def _pfaffian_squared_is_det():
    rng = np.random.default_rng(1)
    a = rng.normal(size=(8, 8))
    a = a - a.T
    return abs(pfaffian(a) ** 2 - np.linalg.det(a)) < 1e-9 * abs(np.linalg.det(a))


def _symbol_is_projection():
    e = symbol_samples(XYParams(0.5, 0.7), offset_grid(256))
    return np.allclose(e @ e, e, atol=1e-12) and np.allclose(np.trace(e, axis1=1, axis2=2), 1)


def _wick_matches_pfaffian():
    cov = build_truncation(XYParams(1.0, 1.0), Window(0, 3))
    vecs = monomial_to_test_vectors(normal_order([0, 1, 2, 5]), cov.window)
    a, b = moment_pfaffian(vecs, cov), wick_moment_bruteforce(vecs, cov)
    return abs(a - b) < 1e-12


def _trace_identity():
    e = ring_projection(XYParams(0.0, 0.0), 8)
    t = trace_X_matrix(e.complex_form, e.window)
    return abs(hs_norm_E_minus_F_matrix(e.complex_form, e.window) - t) < 1e-8 * max(1.0, t)


def _singlet_beta():
    return abs(chsh_beta(omega1_rdm(PairedState(1), [-1, 0])) - np.sqrt(2)) < 1e-12


CHECKS = {
    "pfaffian^2 = det": _pfaffian_squared_is_det,
    "symbol is a rank-one projection": _symbol_is_projection,
    "Wick sum = Pfaffian": _wick_matches_pfaffian,
    "||E-F||^2 = tr X on the ring": _trace_identity,
    "singlet reaches sqrt 2": _singlet_beta,
}


def run(verbose: bool = False) -> list:
    """Run every check; return the names of those that failed."""
    failed = []
    for name, check in CHECKS.items():
        ok = bool(check())
        if not ok:
            failed.append(name)
        if verbose:
            print(f"{'ok  ' if ok else 'FAIL'} {name}")
    return failed
