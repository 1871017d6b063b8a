"""Half-chain quasi-equivalence diagnostics and cluster scans.

For a basis projection ``E`` and the half-chain projection ``P`` (sites >= 0)
the operator

    X = PEP - (PEP)^2 + QEQ - (QEQ)^2,   Q = 1 - P,

satisfies ``||E - F||_HS^2 = tr X`` with ``F = PEP + QEQ`` and
``||E - theta E theta||_HS^2 = 4 tr X`` with ``theta = P - Q``.  Both need
``E^2 = E``, so the finite-size ``E`` used here is the exact basis projection
of the ``2N``-site ring ``[-N, N)`` (see :func:`covariance.ring_projection`).
On the ring ``P`` cuts at two points, so ``tr X`` counts two boundaries.

The compression of the infinite-chain ``E`` to the same window is not a
projection; its ``tr X`` is reported alongside as a truncation-error
estimate.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .covariance import XYParams, build_truncation, ring_projection
from .lattice import Window, half_projection_matrix
from .quasifree import PauliString, pauli_expectation

DEFAULT_LADDER = (16, 32, 64, 128, 256)


def max_workers() -> int:
    env = os.environ.get("FERMICHAIN_THREADS")
    if env:
        return max(1, int(env))
    return min(8, os.cpu_count() or 1)


def parallel_map(fn, items):
    """Ordered map over a thread pool capped by ``FERMICHAIN_THREADS``."""
    items = list(items)
    workers = min(max_workers(), len(items)) or 1
    if workers == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(workers) as pool:
        return list(pool.map(fn, items))


# -- matrix-level identities -------------------------------------------------------


def _split(e: np.ndarray, window: Window):
    right = np.diag(half_projection_matrix(window)) > 0.5
    return e[np.ix_(right, right)], e[np.ix_(~right, ~right)], right


def trace_X_matrix(e: np.ndarray, window: Window) -> float:
    """``tr(PEP - (PEP)^2 + QEQ - (QEQ)^2)`` for a doubled-space matrix ``e``."""
    epp, eqq, _ = _split(e, window)
    t = np.trace(epp) - np.vdot(epp.conj().T, epp) + np.trace(eqq) - np.vdot(eqq.conj().T, eqq)
    return float(t.real)


def hs_norm_E_minus_F_matrix(e: np.ndarray, window: Window) -> float:
    p = half_projection_matrix(window)
    q = np.eye(len(p)) - p
    f = p @ e @ p + q @ e @ q
    return float(np.sum(np.abs(e - f) ** 2))


def hs_norm_theta_matrix(e: np.ndarray, window: Window) -> float:
    p = half_projection_matrix(window)
    theta = 2 * p - np.eye(len(p))
    return float(np.sum(np.abs(e - theta @ e @ theta) ** 2))


# -- parameter-level entry points ---------------------------------------------------


def _check_n(n: int) -> None:
    if n < 2:
        raise ValueError("N must be >= 2")


def trace_X(params: XYParams, N: int) -> float:
    """``tr X_N`` for the ring projection on ``[-N, N)``."""
    _check_n(N)
    e = ring_projection(params, N)
    return trace_X_matrix(e.complex_form, e.window)


def trace_X_compressed(params: XYParams, N: int) -> float:
    """``tr X_N`` using the compression of the infinite-chain projection instead."""
    _check_n(N)
    e = build_truncation(params, Window.centered(N))
    return trace_X_matrix(e.complex_form, e.window)


def hs_norm_E_minus_F(params: XYParams, N: int) -> float:
    _check_n(N)
    e = ring_projection(params, N)
    return hs_norm_E_minus_F_matrix(e.complex_form, e.window)


def hs_norm_theta_conjugation(params: XYParams, N: int) -> float:
    _check_n(N)
    e = ring_projection(params, N)
    return hs_norm_theta_matrix(e.complex_form, e.window)


# -- divergence scans --------------------------------------------------------------


@dataclass
class DivergenceThresholds:
    converge_tol: float = 1e-3  # |v(N_last) - v(N_prev)| below this: Converging
    min_slope: float = 0.01  # log-fit slope above this ...
    max_residual: float = 0.05  # ... and max relative residual below this: Diverging


@dataclass
class LogFit:
    slope: float
    intercept: float
    residual: float  # max_k |v_k - fit_k| / |v_k|

    @classmethod
    def of(cls, x, values) -> "LogFit":
        x = np.asarray(x, dtype=float)
        v = np.asarray(values, dtype=float)
        slope, intercept = np.polyfit(x, v, 1)
        fit = slope * x + intercept
        scale = np.where(np.abs(v) > 0, np.abs(v), 1.0)
        return cls(float(slope), float(intercept), float(np.max(np.abs(v - fit) / scale)))


@dataclass
class DivergenceScan:
    params: XYParams
    sizes: list
    values: list
    classification: str = "Inconclusive"
    fit: LogFit | None = None
    extras: dict = field(default_factory=dict)  # per-N diagnostic columns

    def __post_init__(self):
        if any(b <= a for a, b in zip(self.sizes, self.sizes[1:])):
            raise ValueError("sizes must be strictly increasing")
        if len(self.sizes) != len(self.values):
            raise ValueError("one value per size")
        if not all(math.isfinite(v) and v >= -1e-10 for v in self.values):
            raise ValueError("values must be finite and non-negative")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["params"] = self.params.as_dict()
        return d


def classify_divergence(scan: DivergenceScan, thresholds: DivergenceThresholds | None = None) -> str:
    """Label a scan ``Converging``, ``Diverging`` or ``Inconclusive``; fills ``scan.fit``."""
    th = thresholds or DivergenceThresholds()
    if len(scan.sizes) < 4:
        raise ValueError("need at least 4 sizes")
    v = np.asarray(scan.values, dtype=float)
    scan.fit = LogFit.of(np.log(scan.sizes), v)
    if abs(v[-1] - v[-2]) < th.converge_tol:
        label = "Converging"
    elif scan.fit.slope > th.min_slope and scan.fit.residual < th.max_residual:
        label = "Diverging"
    else:
        label = "Inconclusive"
    scan.classification = label
    return label


def _trx_point(params: XYParams, N: int, compressed: bool) -> dict:
    e = ring_projection(params, N)
    tx = trace_X_matrix(e.complex_form, e.window)
    row = {
        "N": N,
        "trX": tx,
        "hsEF": hs_norm_E_minus_F_matrix(e.complex_form, e.window),
        "hsTheta": hs_norm_theta_matrix(e.complex_form, e.window),
    }
    row["identity_EF"] = abs(row["hsEF"] - tx)
    row["identity_theta"] = abs(row["hsTheta"] - 4 * tx)
    if compressed:
        row["trX_compressed"] = trace_X_compressed(params, N)
        row["truncation_error"] = abs(row["trX_compressed"] - tx)
    return row


def scan_trace_X(
    params: XYParams,
    sizes=DEFAULT_LADDER,
    thresholds: DivergenceThresholds | None = None,
    compressed: bool = False,
) -> DivergenceScan:
    """``tr X_N`` over a ladder of half-widths, classified."""
    sizes = list(sizes)
    rows = parallel_map(lambda n: _trx_point(params, n, compressed), sizes)
    scan = DivergenceScan(
        params,
        sizes,
        [r["trX"] for r in rows],
        extras={k: [r[k] for r in rows] for k in rows[0] if k not in ("N", "trX")},
    )
    classify_divergence(scan, thresholds)
    return scan


# -- cluster properties -----------------------------------------------------------


@dataclass
class DecayFit:
    model: str  # "exponential" or "power"
    amplitude: float
    rate: float  # 1/xi for exponential, exponent for power law
    residual: float  # rms of log-space residuals


@dataclass
class ClusterScan:
    a: str
    b: str
    params: dict
    k: list
    connected: list
    fits: dict = field(default_factory=dict)
    noise_floor: float = 1e-12
    points_used: list = field(default_factory=list)

    @property
    def vanishing(self) -> bool:
        """True when every connected value sits below the noise floor."""
        return not self.points_used

    def preferred(self) -> str | None:
        if "exponential" not in self.fits:
            return None
        e, p = self.fits["exponential"].residual, self.fits["power"].residual
        return "exponential" if e < p else "power"

    def to_dict(self) -> dict:
        d = asdict(self)
        d["vanishing"] = self.vanishing
        return d


def fit_decay(k, values, noise_floor: float = 1e-12) -> tuple[dict, list]:
    """Least-squares fits of ``log|v|`` against ``k`` and ``log k``.

    Points with ``|v| <= noise_floor`` are dropped; with fewer than three
    points left no fit is attempted.
    """
    k = np.asarray(k, dtype=float)
    v = np.abs(np.asarray(values, dtype=float))
    use = v > noise_floor
    if use.sum() < 3:
        return {}, []
    kk, lv = k[use], np.log(v[use])
    fits = {}
    for model, x in (("exponential", kk), ("power", np.log(kk))):
        slope, intercept = np.polyfit(x, lv, 1)
        res = lv - (slope * x + intercept)
        fits[model] = DecayFit(model, float(np.exp(intercept)), float(-slope), float(np.sqrt(np.mean(res**2))))
    return fits, [int(x) for x in k[use]]


def connected_correlation(a: PauliString, b: PauliString, cov) -> float:
    return pauli_expectation(a * b, cov) - pauli_expectation(a, cov) * pauli_expectation(b, cov)


def cluster_scan(
    a: PauliString,
    b: PauliString,
    params_or_cov,
    k_max: int,
    noise_floor: float = 1e-12,
) -> ClusterScan:
    """``<a tau_k(b)> - <a><b>`` for ``k = 1..k_max`` with decay-model fits.

    ``params_or_cov`` is either :class:`XYParams` or a ready
    :class:`CovarianceTruncation` whose window covers every shifted support.
    """
    sup = a.support + b.support
    lo, hi = min(sup, default=0), max(sup, default=0) + k_max + 1
    if isinstance(params_or_cov, XYParams):
        cov = build_truncation(params_or_cov, Window(lo, hi))
        pdict = params_or_cov.as_dict()
    else:
        cov = params_or_cov
        pdict = cov.params.as_dict() if cov.params else {}
    ks = list(range(1, k_max + 1))
    ea = pauli_expectation(a, cov)
    vals = []
    for k in ks:
        bk = b.shifted(k)
        vals.append(float(np.real(pauli_expectation(a * bk, cov) - ea * pauli_expectation(bk, cov))))
    fits, used = fit_decay(ks, vals, noise_floor)
    return ClusterScan(str(a), str(b), pdict, ks, vals, fits, noise_floor, used)
