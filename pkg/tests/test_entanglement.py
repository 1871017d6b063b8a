import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import ed_ground_state
from fermichain.covariance import XYParams, build_truncation
from fermichain.entanglement import (
    EntanglementSpectrum,
    SchmidtData,
    TailNotReached,
    binary_entropy,
    block_entropy,
    block_geometry,
    entanglement_spectrum,
    localization_length,
    log_negativity,
    one_copy_exact,
    one_copy_scan,
    random_isometry,
    schmidt_from_spectrum,
    singlet_fidelity,
)
from fermichain.lattice import Window
from fermichain.quasifree import DensityMatrix, reduced_density_matrix
from fermichain.resource import CHI2, PairedState, omega1_rdm

SINGLET = DensityMatrix([0, 1], np.outer(CHI2, CHI2))
MIXED = DensityMatrix([0, 1], np.eye(4) / 4)


def _spec(*nu):
    return EntanglementSpectrum(np.array(nu, dtype=float))


def test_spectrum_examples():
    assert np.allclose(entanglement_spectrum(XYParams(0, 0), Window(0, 1)).occupations, [0.5], atol=1e-8)
    nu = entanglement_spectrum(XYParams(0, 2), Window(0, 4)).occupations
    assert np.all(np.minimum(nu, 1 - nu) < 1e-3)
    with pytest.raises(ValueError):
        entanglement_spectrum(XYParams(0, 0), Window(0, 10), ambient_N=4)
    with pytest.raises(ValueError):
        _spec(1.2)


def test_entropy_examples():
    assert block_entropy(_spec(0.5)) == 1.0
    assert block_entropy(_spec(0, 1, 1, 0)) == 0.0
    assert np.allclose(binary_entropy([0.0, 0.5, 1.0]), [0, 1, 0])


def test_entropy_matches_exact_diagonalization():
    # central 4-site block of a gapped 14-site chain
    p = XYParams(1.0, 2.0)
    psi = ed_ground_state(1.0, 2.0, 14).reshape(2**5, 2**4, 2**5)
    rho = np.einsum("aib,ajb->ij", psi, psi.conj())
    w = np.linalg.eigvalsh(rho)
    w = w[w > 1e-15]
    s_ed = float(-np.sum(w * np.log2(w)))
    s = block_entropy(entanglement_spectrum(p, Window(0, 4)))
    assert abs(s - s_ed) < 1e-4


def test_entropy_matches_rdm_for_critical_block():
    p = XYParams(1, 1)
    cov = build_truncation(p, Window(0, 5))
    rho = reduced_density_matrix(range(5), cov).matrix
    w = np.linalg.eigvalsh(rho)
    w = w[w > 1e-15]
    assert math.isclose(block_entropy(entanglement_spectrum(p, Window(0, 5))), -np.sum(w * np.log2(w)), abs_tol=1e-9)


def test_schmidt_examples():
    assert np.allclose(schmidt_from_spectrum(_spec(0.5)).probabilities, [0.5, 0.5])
    assert np.allclose(schmidt_from_spectrum(_spec(0.9, 0.5)).probabilities, [0.45, 0.45, 0.05, 0.05])


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(0.0, 1.0), min_size=1, max_size=9))
def test_schmidt_matches_full_product_expansion(nu):
    spec = _spec(*nu)
    sch = schmidt_from_spectrum(spec, tail_bound=1e-14)
    a = np.maximum(spec.occupations, 1 - spec.occupations)
    b = 1 - a
    full = np.array([1.0])
    for x, y in zip(a, b):
        full = np.concatenate([full * x, full * y])
    full = np.sort(full[full > 0])[::-1]
    k = len(sch.probabilities)
    assert np.allclose(sch.probabilities, full[:k], atol=1e-15)
    assert math.isclose(sch.probabilities.sum() + sch.tail, 1.0, abs_tol=1e-12)


def test_schmidt_cap():
    with pytest.raises(TailNotReached):
        schmidt_from_spectrum(_spec(*[0.5] * 12), tail_bound=1e-6, cap=100)


def test_one_copy_examples():
    assert one_copy_exact(SchmidtData(np.array([0.5, 0.5]), 0.0)) == (2, 1.0)
    assert one_copy_exact(SchmidtData(np.array([0.6, 0.4]), 0.0)) == (1, 0.0)
    assert one_copy_exact(SchmidtData(np.array([0.25] * 4), 0.0)) == (4, 2.0)
    # [0.4, 0.3, 0.2, 0.1]: S_1 = 0.4 <= 1/2, S_2 = 0.7 > 2/3 -> d = 2
    assert one_copy_exact(SchmidtData(np.array([0.4, 0.3, 0.2, 0.1]), 0.0))[0] == 2


def test_one_copy_from_a_prefix_equals_full_result():
    # unseen terms are no larger than the last enumerated one, so a prefix decides d
    spec = _spec(0.7, 0.6, 0.55, 0.8, 0.52, 0.65)
    full = schmidt_from_spectrum(spec, tail_bound=1e-15)
    part = schmidt_from_spectrum(spec, tail_bound=0.3)
    assert len(part.probabilities) < len(full.probabilities)
    assert one_copy_exact(part) == one_copy_exact(full)
    assert one_copy_exact(SchmidtData(np.array([0.3]), 0.7))[0] == 3


def _bruteforce_d(p):
    s = np.cumsum(p)
    best = 1
    for d in range(2, len(p) + 1):
        if all(s[k - 1] <= k / d + 1e-15 for k in range(1, d)):
            best = d
    return best


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(0.01, 1.0), min_size=1, max_size=12))
def test_one_copy_matches_bruteforce(w):
    p = np.sort(np.array(w) / sum(w))[::-1]
    d, e1 = one_copy_exact(SchmidtData(p, 0.0))
    assert d == _bruteforce_d(p)
    assert math.isclose(e1, math.log2(d)) if d > 1 else e1 == 0.0


def test_one_copy_scan_small():
    tab = one_copy_scan(XYParams(0, 0), [2, 4, 8, 16])
    e1, s = tab.column("E1"), tab.column("S")
    assert all(a <= b + 1e-12 for a, b in zip(e1, s))
    assert all(a <= b for a, b in zip(e1, e1[1:]))
    assert tab.entropy_fit.slope > 0
    assert tab.to_dict()["params"] == {"gamma": 0.0, "lambda": 0.0}


# -- mixed states -------------------------------------------------------------------


def test_log_negativity_examples():
    assert abs(log_negativity(SINGLET, ([0], [1])) - 1.0) < 1e-12
    prod = DensityMatrix([0, 1], np.kron(np.diag([0.7, 0.3]), np.diag([0.2, 0.8])))
    assert abs(log_negativity(prod, ([0], [1]))) < 1e-12
    rho = omega1_rdm(PairedState(3), [-2, -1, 0, 1])
    assert abs(log_negativity(rho, ([-2, -1], [0, 1])) - 2.0) < 1e-12
    rho = omega1_rdm(PairedState(3), [-1, 0, 2])
    assert abs(log_negativity(rho, ([-1], [0, 2])) - 1.0) < 1e-12


def test_singlet_fidelity_examples():
    assert abs(singlet_fidelity(SINGLET, ([0], [1])).fidelity - 1.0) < 1e-9
    assert abs(singlet_fidelity(MIXED, ([0], [1])).fidelity - 0.25) < 1e-9
    rho = omega1_rdm(PairedState(3), [-1, 0])
    assert singlet_fidelity(rho, ([-1], [0])).fidelity >= 1 - 1e-9
    # two matched pairs form chi_4; a rank-2 isometric filter reaches 2/4 at most
    rho = omega1_rdm(PairedState(3), [-2, -1, 0, 1])
    assert abs(singlet_fidelity(rho, ([-2, -1], [0, 1])).fidelity - 0.5) < 1e-9


def test_singlet_fidelity_is_achieved_by_returned_isometries(rng):
    m = rng.normal(size=(16, 16)) + 1j * rng.normal(size=(16, 16))
    rho = m @ m.conj().T
    rho = DensityMatrix([0, 1, 2, 3], rho / np.trace(rho))
    res = singlet_fidelity(rho, ([0, 1], [2, 3]), seed=3)
    va, vb = res.V_A, res.V_B
    assert np.allclose(va.conj().T @ va, np.eye(2)) and np.allclose(vb.conj().T @ vb, np.eye(2))
    phi = np.kron(va, vb) @ CHI2
    assert math.isclose(np.vdot(phi, rho.matrix @ phi).real, res.fidelity, rel_tol=1e-10)
    # no random isometry pair does better than the optimizer
    for _ in range(20):
        va, vb = random_isometry(rng, 4, 2), random_isometry(rng, 4, 2)
        phi = np.kron(va, vb) @ CHI2
        assert np.vdot(phi, rho.matrix @ phi).real <= res.fidelity + 1e-12


def test_random_isometry(rng):
    v = random_isometry(rng, 8, 3)
    assert np.allclose(v.conj().T @ v, np.eye(3))


def test_block_geometry():
    assert block_geometry(0, 2, 3) == ([-3, -2, -1], [2, 3, 4])


def test_localization_on_reference_chain():
    res = localization_length(PairedState(4), 0, 0, 0.01, 3)
    assert res.L_star == 1 and res.found
    assert res.fidelity_per_L[0] >= 1 - 1e-9
    miss = localization_length(PairedState(8), 0, 2, 0.01, 3)
    assert not miss.found and miss.to_dict()["not_found_within"] == 3
    assert max(miss.fidelity_per_L) < 0.99


def test_localization_on_critical_chain_golden():
    # golden values from the first verified run (see README)
    res = localization_length(XYParams(0, 0), 0, 2, 0.4, 4)
    f = res.fidelity_per_L
    assert all(b >= a for a, b in zip(f, f[1:]))
    assert not res.found
    assert abs(f[0] - 0.43326609) < 1e-6
    assert max(res.raw_fidelity_per_L) <= f[-1]
