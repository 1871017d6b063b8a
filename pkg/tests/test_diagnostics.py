import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import GAPPED
from fermichain.covariance import XYParams, build_truncation
from fermichain.diagnostics import (
    DivergenceScan,
    DivergenceThresholds,
    LogFit,
    classify_divergence,
    cluster_scan,
    connected_correlation,
    fit_decay,
    hs_norm_E_minus_F,
    hs_norm_E_minus_F_matrix,
    hs_norm_theta_conjugation,
    hs_norm_theta_matrix,
    max_workers,
    parallel_map,
    scan_trace_X,
    trace_X,
    trace_X_compressed,
    trace_X_matrix,
)
from fermichain.lattice import Window, half_projection_matrix
from fermichain.quasifree import PauliString

W = Window(-4, 4)


def _random_projection(rng, n, rank):
    q, _ = np.linalg.qr(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
    v = q[:, :rank]
    return v @ v.conj().T


def test_block_diagonal_projection_has_zero_defect(rng):
    p = half_projection_matrix(W)
    keep = np.diag(p) > 0.5
    e = np.zeros((16, 16), dtype=complex)
    e[np.ix_(keep, keep)] = _random_projection(rng, 8, 3)
    e[np.ix_(~keep, ~keep)] = _random_projection(rng, 8, 5)
    assert abs(trace_X_matrix(e, W)) < 1e-12
    assert hs_norm_E_minus_F_matrix(e, W) < 1e-24
    assert hs_norm_theta_matrix(e, W) < 1e-24


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 15), st.integers(0, 2**32 - 1))
def test_identities_for_any_projection(rank, seed):
    e = _random_projection(np.random.default_rng(seed), 16, rank)
    t = trace_X_matrix(e, W)
    assert t >= -1e-12
    assert math.isclose(hs_norm_E_minus_F_matrix(e, W), t, rel_tol=1e-9, abs_tol=1e-12)
    assert math.isclose(hs_norm_theta_matrix(e, W), 4 * t, rel_tol=1e-9, abs_tol=1e-12)


def test_product_state_gives_zero():
    # (0, 2) is a product state: E commutes with P
    assert abs(trace_X(XYParams(0, 2), 32)) < 1e-12


@pytest.mark.parametrize("p", [XYParams(0, 0), XYParams(1, 1), XYParams(1, 2)], ids=str)
def test_identities_on_presets(p):
    for n in (8, 16):
        t = trace_X(p, n)
        assert math.isclose(hs_norm_E_minus_F(p, n), t, rel_tol=1e-8)
        assert math.isclose(hs_norm_theta_conjugation(p, n), 4 * t, rel_tol=1e-8)


def test_critical_growth_and_gapped_saturation():
    crit = [trace_X(XYParams(1, 1), n) for n in (16, 32, 64)]
    assert crit[0] < crit[1] < crit[2]
    gapped = [trace_X(XYParams(1, 2), n) for n in (16, 32, 64)]
    assert abs(gapped[2] - gapped[1]) < 1e-6
    xx = [trace_X(XYParams(0, 0), n) for n in (16, 32, 64)]
    assert xx[0] < xx[1] < xx[2]


def test_compressed_trace_is_close_for_gapped_chain():
    p = XYParams(1, 2)
    assert abs(trace_X_compressed(p, 32) - trace_X(p, 32)) < 1e-6


def test_classification_synthetic():
    sizes = [16, 32, 64, 128, 256]
    p = XYParams(0, 0)
    const = DivergenceScan(p, sizes, [0.3] * 5)
    assert classify_divergence(const) == "Converging"
    logs = DivergenceScan(p, sizes, [0.5 * math.log(n) + 0.1 for n in sizes])
    assert classify_divergence(logs) == "Diverging"
    assert math.isclose(logs.fit.slope, 0.5, abs_tol=1e-6)
    wild = DivergenceScan(p, sizes, [1.0, 5.0, 0.5, 9.0, 0.2])
    assert classify_divergence(wild) == "Inconclusive"
    with pytest.raises(ValueError):
        classify_divergence(DivergenceScan(p, sizes[:3], [1, 2, 3]))
    with pytest.raises(ValueError):
        DivergenceScan(p, [32, 16], [1, 2])
    with pytest.raises(ValueError):
        DivergenceScan(p, [16, 32], [1, float("nan")])


def test_thresholds_are_respected():
    sizes = [16, 32, 64, 128]
    p = XYParams(0, 0)
    slow = DivergenceScan(p, sizes, [0.005 * math.log(n) for n in sizes])
    assert classify_divergence(slow) == "Inconclusive"
    assert classify_divergence(slow, DivergenceThresholds(converge_tol=1e-4, min_slope=0.001)) == "Diverging"


def test_logfit_handles_zero_values():
    fit = LogFit.of([1.0, 2.0, 3.0], [0.0, 0.0, 0.0])
    assert fit.slope == 0 and fit.residual == 0


def test_scan_reports_identity_columns():
    scan = scan_trace_X(XYParams(0, 0), [8, 16, 32, 64], compressed=True)
    assert scan.classification == "Diverging"
    for col in ("identity_EF", "identity_theta", "trX_compressed", "truncation_error"):
        assert len(scan.extras[col]) == 4
    assert max(scan.extras["identity_EF"]) < 1e-8 * max(scan.values)
    d = scan.to_dict()
    assert d["params"] == {"gamma": 0.0, "lambda": 0.0}


def test_parallel_map_is_ordered(monkeypatch):
    monkeypatch.setenv("FERMICHAIN_THREADS", "3")
    assert max_workers() == 3
    assert parallel_map(lambda x: x * x, range(10)) == [x * x for x in range(10)]
    monkeypatch.setenv("FERMICHAIN_THREADS", "1")
    assert parallel_map(str, [1, 2]) == ["1", "2"]


# -- cluster scans -------------------------------------------------------------------


def test_fit_decay_on_synthetic_data():
    k = np.arange(1, 17)
    fits, used = fit_decay(k, 0.7 * np.exp(-k / 3.0))
    assert math.isclose(fits["exponential"].rate, 1 / 3.0, rel_tol=1e-9)
    assert fits["exponential"].residual < fits["power"].residual
    fits, _ = fit_decay(k, 2.0 * k**-2.0)
    assert math.isclose(fits["power"].rate, 2.0, rel_tol=1e-9)
    assert fits["power"].residual < fits["exponential"].residual
    assert fit_decay(k, np.zeros(16)) == ({}, [])


def test_connected_correlation_vanishes_for_product_state():
    cov = build_truncation(XYParams(0, 2), Window(0, 6))
    z = PauliString.parse("Z0")
    assert abs(connected_correlation(z, z.shifted(3), cov)) < 1e-12


def test_cluster_scan_critical_prefers_power_law():
    z = PauliString.parse("Z0")
    scan = cluster_scan(z, z, XYParams(0, 0), 16)
    assert scan.preferred() == "power"
    # odd distances carry -(2/(pi k))^2, even distances vanish
    for k, v in zip(scan.k, scan.connected):
        expected = -((2 / (math.pi * k)) ** 2) if k % 2 else 0.0
        assert abs(v - expected) < 1e-5


@pytest.mark.parametrize("p", [XYParams(1, 2), XYParams(0.5, 1.5)], ids=str)
def test_cluster_scan_gapped_prefers_exponential(p):
    z = PauliString.parse("Z0")
    scan = cluster_scan(z, z, p, 12)
    assert scan.preferred() == "exponential"
    assert scan.fits["exponential"].residual <= 0.5 * scan.fits["power"].residual


def test_cluster_scan_product_state_is_vanishing():
    z = PauliString.parse("Z0")
    scan = cluster_scan(z, z, GAPPED[0], 8)
    assert scan.vanishing and scan.preferred() is None
    assert scan.to_dict()["vanishing"]
