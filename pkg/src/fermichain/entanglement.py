"""Block entropy, one-copy entanglement and singlet extraction.

Block spectra come from the Majorana covariance of a contiguous block: its
eigenvalues ``+- i mu_k`` give one mode occupation ``nu_k = (1 + mu_k) / 2``
per site.  For a pure Gaussian state the Schmidt coefficients across the block
boundary are the products ``prod_k (nu_k or 1 - nu_k)``.

Two tiers estimate how many maximally entangled qubit pairs a single copy
yields: exact conversion via majorization of the Schmidt vector
(:func:`one_copy_exact`), and a direct search over local isometries on small
reduced states (:func:`singlet_fidelity`).  They answer different questions
and are always reported separately.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .covariance import XYParams, build_truncation
from .diagnostics import LogFit, parallel_map
from .lattice import Window
from .quasifree import DensityMatrix, reduced_density_matrix

SCHMIDT_TAIL = 1e-10
SCHMIDT_CAP = 2**20


class TailNotReached(RuntimeError):
    pass


class TailTooLarge(RuntimeError):
    pass


class NoConvergence(RuntimeWarning):
    pass


@dataclass(frozen=True, eq=False)
class EntanglementSpectrum:
    occupations: np.ndarray  # ascending, one per mode

    def __post_init__(self):
        nu = np.asarray(self.occupations, dtype=float)
        if np.any(nu < -1e-10) or np.any(nu > 1 + 1e-10):
            raise ValueError("occupations outside [0, 1]")
        object.__setattr__(self, "occupations", np.sort(np.clip(nu, 0.0, 1.0)))

    def __len__(self):
        return len(self.occupations)


@dataclass(frozen=True, eq=False)
class SchmidtData:
    probabilities: np.ndarray  # descending
    tail: float  # upper bound on the mass not enumerated

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float)
        if np.any(np.diff(p) > 1e-15):
            raise ValueError("probabilities must be descending")
        if p.sum() > 1 + 1e-9 or self.tail < 1 - p.sum() - 1e-12:
            raise ValueError("tail bound inconsistent with probabilities")
        object.__setattr__(self, "probabilities", p)


def entanglement_spectrum(params: XYParams, block: Window, ambient_N: int | None = None) -> EntanglementSpectrum:
    """Mode occupations of ``block`` in the infinite-chain ground state.

    The covariance is Toeplitz, so the block compression equals the
    restriction of any ambient window containing it; ``ambient_N`` only
    bounds where the block may sit.
    """
    if ambient_N is not None and not (-ambient_N <= block.lo and block.hi <= ambient_N):
        raise ValueError(f"block {block} not inside [-{ambient_N}, {ambient_N})")
    cov = build_truncation(params, block)
    return spectrum_of(cov.majorana_form)


def spectrum_of(majorana_form: np.ndarray) -> EntanglementSpectrum:
    # i*M is hermitian with eigenvalues +- mu_k
    ev = np.linalg.eigvalsh(1j * majorana_form)
    mu = ev[len(ev) // 2 :]
    return EntanglementSpectrum(0.5 * (1 + np.clip(mu, -1.0, 1.0)))


def binary_entropy(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    out = np.zeros_like(p)
    ok = (p > 0) & (p < 1)
    q = p[ok]
    out[ok] = -q * np.log2(q) - (1 - q) * np.log2(1 - q)
    return out


def block_entropy(spectrum: EntanglementSpectrum) -> float:
    """Von Neumann entropy of the block in bits."""
    return float(np.sum(binary_entropy(spectrum.occupations)))


def schmidt_from_spectrum(
    spectrum: EntanglementSpectrum, tail_bound: float = SCHMIDT_TAIL, cap: int = SCHMIDT_CAP
) -> SchmidtData:
    """Largest Schmidt coefficients in exact descending order.

    Each mode contributes a factor ``a_k = max(nu, 1-nu)`` or ``b_k = min``;
    products are generated in order of increasing ``sum log(a_k / b_k)`` over
    the flipped modes until the mass reaches ``1 - tail_bound``.
    """
    if not 0 < tail_bound < 1:
        raise ValueError("tail_bound must lie in (0, 1)")
    nu = spectrum.occupations
    a = np.maximum(nu, 1 - nu)
    b = np.minimum(nu, 1 - nu)
    top = float(np.prod(a))
    w = np.sort(np.log(a[b > 0]) - np.log(b[b > 0]))
    probs = [top]
    mass = top
    # heap of (cost, last flipped index): children extend or replace the last flip
    heap = [(w[0], 0)] if len(w) else []
    while mass < 1 - tail_bound and heap:
        if len(probs) >= cap:
            raise TailNotReached(f"mass {mass:.12f} after {cap} terms")
        cost, i = heapq.heappop(heap)
        p = top * math.exp(-cost)
        probs.append(p)
        mass += p
        if i + 1 < len(w):
            heapq.heappush(heap, (cost + w[i + 1], i + 1))
            heapq.heappush(heap, (cost - w[i] + w[i + 1], i + 1))
    probs = np.array(probs)
    return SchmidtData(probs, max(0.0, 1.0 - float(probs.sum())))


def one_copy_exact(schmidt: SchmidtData) -> tuple[int, float]:
    """Largest ``d`` with the Schmidt vector majorized by the uniform ``d``-vector.

    Returns ``(d, log2 d)``; ``d = 1`` gives ``E1 = 0``.  Constraints past the
    enumerated terms are bounded using the tail; a decision the tail could flip
    raises :class:`TailTooLarge`.  With terms enumerated in descending order
    every unseen term is at most the last one, which already settles each
    constraint, so the guard only protects hand-built inputs.
    """
    p = schmidt.probabilities
    s = np.cumsum(p)
    K = len(p)
    tail = schmidt.tail

    def feasible(d: int, bound: str) -> bool:
        # need S_k <= k/d for k = 1 .. d-1
        kmax = d - 1
        known = s[: min(kmax, K)]
        if np.any(known > np.arange(1, len(known) + 1) / d + 1e-15):
            return False
        if kmax <= K:
            return True
        k = np.arange(K + 1, kmax + 1)
        if bound == "upper":  # pessimistic: unseen terms as large as allowed
            sk = np.minimum(1.0, np.minimum(s[-1] + (k - K) * p[-1], s[-1] + tail))
        else:
            sk = np.full(len(k), s[-1])
        return bool(np.all(sk <= k / d + 1e-15))

    d = 1
    while True:
        sure = feasible(d + 1, "upper")
        maybe = feasible(d + 1, "lower")
        if sure != maybe:
            raise TailTooLarge(f"tail {tail:.2e} leaves d={d + 1} undecided")
        if not sure:
            break
        d += 1
    return d, (math.log2(d) if d > 1 else 0.0)


@dataclass
class OneCopyRow:
    L: int
    E1: float
    d: int
    S: float
    p1: float
    n_terms: int
    tail: float


@dataclass
class OneCopyTable:
    params: dict
    rows: list
    entropy_fit: LogFit | None = None
    one_copy_fit: LogFit | None = None

    def column(self, name):
        return [getattr(r, name) for r in self.rows]

    def to_dict(self) -> dict:
        return asdict(self)


def fit_log2(lengths, values) -> LogFit:
    return LogFit.of(np.log2(lengths), values)


def one_copy_scan(
    params: XYParams,
    lengths,
    ambient_N: int | None = None,
    tail_bound: float = SCHMIDT_TAIL,
) -> OneCopyTable:
    """Per block length: spectrum, entropy, Schmidt data and majorization ``E1``."""
    lengths = list(lengths)
    if any(b <= a for a, b in zip(lengths, lengths[1:])):
        raise ValueError("lengths must be ascending")
    ambient = ambient_N or 4 * max(lengths)

    def row(L):
        spec = entanglement_spectrum(params, Window(0, L), ambient)
        sch = schmidt_from_spectrum(spec, tail_bound)
        d, e1 = one_copy_exact(sch)
        return OneCopyRow(L, e1, d, block_entropy(spec), float(sch.probabilities[0]), len(sch.probabilities), sch.tail)

    rows = parallel_map(row, lengths)
    table = OneCopyTable(params.as_dict(), rows)
    if len(rows) >= 2:
        table.entropy_fit = fit_log2(lengths, table.column("S"))
        table.one_copy_fit = fit_log2(lengths, table.column("E1"))
    return table


# -- mixed two-block states ----------------------------------------------------------


def _reorder(rho: DensityMatrix, cut) -> tuple[np.ndarray, int, int]:
    a, b = [list(map(int, g)) for g in cut]
    if sorted(a + b) != sorted(rho.sites):
        raise ValueError("cut must partition the sites of rho")
    m = rho.partial_trace(a + b).matrix
    return m, 2 ** len(a), 2 ** len(b)


def log_negativity(rho: DensityMatrix, cut) -> float:
    """``log2 || rho^{T_B} ||_1`` across ``cut = (sites_A, sites_B)``."""
    m, da, db = _reorder(rho, cut)
    pt = m.reshape(da, db, da, db).transpose(0, 3, 2, 1).reshape(da * db, da * db)
    ev = np.linalg.eigvalsh(0.5 * (pt + pt.conj().T))
    return max(0.0, float(np.log2(np.sum(np.abs(ev)))))


def random_isometry(rng: np.random.Generator, n: int, d: int) -> np.ndarray:
    z = rng.normal(size=(n, d)) + 1j * rng.normal(size=(n, d))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def _polar(g: np.ndarray) -> np.ndarray:
    u, _, vh = np.linalg.svd(g, full_matrices=False)
    return u @ vh


def _fid(rho4, va, vb, d) -> tuple[float, np.ndarray]:
    w = va @ vb.T / math.sqrt(d)  # |Phi> = sum_ab W[a,b] |a>|b>
    rw = np.einsum("abcd,cd->ab", rho4, w)
    return float(np.vdot(w, rw).real), rw


@dataclass
class FidelityResult:
    fidelity: float
    V_A: np.ndarray = field(repr=False)
    V_B: np.ndarray = field(repr=False)
    converged: bool
    start: str  # which start achieved the best value
    iterations: int


def _ascend(rho4, va, vb, d, max_iter, tol):
    f, rw = _fid(rho4, va, vb, d)
    for it in range(1, max_iter + 1):
        # f is convex in each isometry; the polar factor of the gradient never decreases it
        va = _polar(rw @ vb.conj())
        _, rw = _fid(rho4, va, vb, d)
        vb = _polar(rw.T @ va.conj())
        f_new, rw = _fid(rho4, va, vb, d)
        if f_new - f < tol:
            return f_new, va, vb, True, it
        f = f_new
    return f, va, vb, False, max_iter


def singlet_fidelity(
    rho: DensityMatrix,
    cut,
    d: int = 2,
    starts: int = 8,
    seed: int = 0,
    warm: list | None = None,
    max_iter: int = 500,
    tol: float = 1e-10,
) -> FidelityResult:
    """Best found ``<chi_d| (V_A x V_B)^+ rho (V_A x V_B) |chi_d>`` over isometries.

    Alternating ascent from ``starts`` random isometry pairs, one start built
    from the Schmidt vectors of the leading eigenvector of ``rho`` and any
    ``warm`` pairs supplied.  The value is achieved by the returned
    isometries, so it is a lower bound on the optimum.
    """
    m, da, db = _reorder(rho, cut)
    if da < d or db < d:
        raise ValueError(f"each side needs dimension >= {d}")
    rho4 = m.reshape(da, db, da, db)
    rng = np.random.default_rng(seed)
    inits = []
    for i, (va, vb) in enumerate(warm or []):
        inits.append((f"warm{i}", va, vb))
    w, v = np.linalg.eigh(m)
    u, _, vh = np.linalg.svd(v[:, -1].reshape(da, db))
    inits.append(("eigen", u[:, :d], vh[:d].T))
    for i in range(starts):
        inits.append((f"random{i}", random_isometry(rng, da, d), random_isometry(rng, db, d)))
    best = None
    any_conv = False
    for name, va, vb in inits:
        f, va, vb, conv, it = _ascend(rho4, va, vb, d, max_iter, tol)
        any_conv |= conv
        if best is None or f > best.fidelity:
            best = FidelityResult(f, va, vb, conv, name, it)
    best.converged = any_conv
    return best


# -- localization ------------------------------------------------------------------


@dataclass
class LocalizationResult:
    M: int
    N: int
    epsilon: float
    L_max: int
    L_star: int | None  # None: not found within L_max
    fidelity_per_L: list  # best achievable value for blocks of length <= L
    raw_fidelity_per_L: list  # optimizer value for exactly length L
    achieved_at: list  # length whose isometries achieve fidelity_per_L[L-1]
    isometries: dict = field(default_factory=dict, repr=False)
    source: str = ""
    label: str = "isometry-filter singlet fidelity (operational stand-in, lower bound)"

    @property
    def found(self) -> bool:
        return self.L_star is not None

    def to_dict(self) -> dict:
        from .io import complex_matrix_rows

        d = asdict(self)
        d["isometries"] = {
            str(L): {"V_A": complex_matrix_rows(va), "V_B": complex_matrix_rows(vb)}
            for L, (va, vb) in self.isometries.items()
        }
        d["not_found_within"] = None if self.found else self.L_max
        return d


def block_geometry(M: int, N: int, L: int) -> tuple[list, list]:
    """``[M-L, M)`` and ``[M+N, M+N+L)``."""
    return list(range(M - L, M)), list(range(M + N, M + N + L))


def _rdm_source(source, M, N, L_max):
    from .resource import PairedState, omega1_rdm

    if isinstance(source, XYParams):
        cov = build_truncation(source, Window(M - L_max, M + N + L_max))
        return (lambda sites: reduced_density_matrix(sites, cov)), f"XY{source.as_dict()}"
    if isinstance(source, PairedState):
        return (lambda sites: omega1_rdm(source, sites)), "omega1"
    return source, "custom"


def localization_length(
    source,
    M: int,
    N: int,
    epsilon: float,
    L_max: int,
    d: int = 2,
    starts: int = 8,
    seed: int = 0,
    max_iter: int = 500,
) -> LocalizationResult:
    """Least block length whose two-block state yields ``chi_d`` with fidelity ``>= 1 - eps``.

    ``source`` is :class:`XYParams`, a :class:`resource.PairedState`, or a
    callable ``sites -> DensityMatrix``.  A block of length ``L`` can always
    discard its outermost site, so the reported value at ``L`` is the best
    over lengths ``<= L``; the raw per-length optimum is kept as well.
    """
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    if 2 * L_max > 12:
        raise ValueError("2 * L_max must not exceed 12 sites")
    rdm, label = _rdm_source(source, M, N, L_max)
    raw, best, where, isos = [], [], [], {}
    warm = None
    for L in range(1, L_max + 1):
        a, b = block_geometry(M, N, L)
        rho = rdm(a + b)
        if 2**L < d:
            raw.append(0.0)
            res = None
        else:
            res = singlet_fidelity(rho, (a, b), d, starts, seed + 1000 * L, warm, max_iter)
            raw.append(res.fidelity)
            isos[L] = (res.V_A, res.V_B)
            # grow: new site left of block A, right of block B
            warm = [
                (np.kron(e, res.V_A), np.kron(res.V_B, e))
                for e in (np.array([[1.0], [0.0]]), np.array([[0.0], [1.0]]))
            ]
        if best and best[-1] >= raw[-1]:
            best.append(best[-1])
            where.append(where[-1])
        else:
            best.append(raw[-1])
            where.append(L)
    L_star = next((L for L, f in enumerate(best, 1) if f >= 1 - epsilon), None)
    return LocalizationResult(M, N, epsilon, L_max, L_star, best, raw, where, isos, label)
