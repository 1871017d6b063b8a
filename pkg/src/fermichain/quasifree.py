"""Moments of quasi-free states, Jordan-Wigner reduction and reduced states.

Spin operators are mapped to Majorana monomials with the string running
from the left::

    sigma_x^(j) =  Z_<j m_2j
    sigma_y^(j) = -Z_<j m_2j+1
    sigma_z^(j) =  i m_2j m_2j+1,      Z_<j = prod_{k<j} sigma_z^(k)

For an even Pauli string the part of every string to the left of its
support cancels, so strings are started at the leftmost support site.
Odd strings have zero expectation in the Theta-invariant states used here.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import reduce

import numpy as np

from .covariance import CovarianceTruncation
from .lattice import TestVector, Window, gamma_apply
from .pfaffian import pfaffian, pfaffian_batch

WICK_MAX_FACTORS = 12
RDM_MAX_SITES = 12

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}
PAULI_BASIS = np.stack([PAULI[c] for c in "IXYZ"])


class TooManyFactors(ValueError):
    pass


class SupportOutsideWindow(ValueError):
    pass


class TooManySites(ValueError):
    pass


@dataclass(frozen=True)
class PauliString:
    """Finitely supported Pauli word ``coefficient * prod_j sigma_{letter_j}^(j)``."""

    letters: tuple = ()  # sorted ((site, letter), ...), identity sites omitted
    coefficient: complex = 1.0

    def __post_init__(self):
        items = dict(self.letters)
        for site, letter in items.items():
            if letter not in ("X", "Y", "Z", "I"):
                raise ValueError(f"bad Pauli letter {letter!r} at site {site}")
        clean = tuple(sorted((int(s), c) for s, c in items.items() if c != "I"))
        object.__setattr__(self, "letters", clean)

    @classmethod
    def from_dict(cls, letters: dict, coefficient: complex = 1.0) -> "PauliString":
        return cls(tuple(letters.items()), coefficient)

    @classmethod
    def parse(cls, text: str) -> "PauliString":
        """``"Z0 Z1"`` or ``"X-1 Y3"`` style input; empty string is the identity."""
        letters = {}
        for tok in text.split():
            letters[int(tok[1:])] = tok[0].upper()
        return cls.from_dict(letters)

    @property
    def support(self) -> list:
        return [s for s, _ in self.letters]

    def letter(self, site: int) -> str:
        return dict(self.letters).get(site, "I")

    def is_even(self) -> bool:
        return sum(c in "XY" for _, c in self.letters) % 2 == 0

    def shifted(self, steps: int) -> "PauliString":
        return PauliString(tuple((s + steps, c) for s, c in self.letters), self.coefficient)

    def __mul__(self, other: "PauliString") -> "PauliString":
        """Product of two strings (site-wise Pauli algebra)."""
        coeff = self.coefficient * other.coefficient
        a, b = dict(self.letters), dict(other.letters)
        out = {}
        for site in sorted(set(a) | set(b)):
            m = PAULI[a.get(site, "I")] @ PAULI[b.get(site, "I")]
            for c, p in PAULI.items():
                ov = np.trace(p @ m) / 2
                if abs(ov) > 0.5:
                    coeff *= ov
                    out[site] = c
                    break
        return PauliString.from_dict(out, coeff)

    def matrix(self, sites) -> np.ndarray:
        """Dense operator on the ordered ``sites`` (first site is the leftmost factor)."""
        extra = set(self.support) - set(sites)
        if extra:
            raise SupportOutsideWindow(f"sites {sorted(extra)} not in {list(sites)}")
        mats = [PAULI[self.letter(s)] for s in sites]
        return self.coefficient * reduce(np.kron, mats, np.eye(1, dtype=complex))

    def __str__(self):
        body = " ".join(f"{c}{s}" for s, c in self.letters) or "I"
        return body if self.coefficient == 1 else f"({self.coefficient})*{body}"


@dataclass(frozen=True)
class MajoranaMonomial:
    """``coefficient * m_{i_1} ... m_{i_k}`` with strictly increasing mode labels.

    Mode ``2j`` and ``2j+1`` belong to site ``j``.
    """

    indices: tuple
    coefficient: complex = 1.0

    @property
    def degree(self) -> int:
        return len(self.indices)

    @property
    def sites(self) -> list:
        return sorted({i // 2 for i in self.indices})


ZERO = None  # returned by jordan_wigner_reduce for odd strings


def normal_order(indices, coefficient: complex = 1.0) -> MajoranaMonomial:
    """Reorder a Majorana product into increasing normal form.

    Uses ``m_a m_b = -m_b m_a`` for ``a != b`` and ``m_a^2 = 1``.
    """
    seq = list(indices)
    inversions = 0
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                inversions += 1
    counts = {}
    for s in seq:
        counts[s] = counts.get(s, 0) + 1
    kept = tuple(sorted(s for s, c in counts.items() if c % 2))
    sign = -1 if inversions % 2 else 1
    return MajoranaMonomial(kept, sign * coefficient)


def _letter_factors(site: int, letter: str, start: int):
    """Majorana factors and coefficient for one letter with its string from ``start``."""
    if letter == "Z":
        return [2 * site, 2 * site + 1], 1j
    string = list(range(2 * start, 2 * site))  # Z_<site as pairs (2k, 2k+1)
    coeff = 1j ** (site - start)
    if letter == "X":
        return string + [2 * site], coeff
    return string + [2 * site + 1], -coeff


def jordan_wigner_reduce(p: PauliString):
    """Majorana normal form of an even Pauli string; ``None`` for odd strings.

    The returned monomial carries the Pauli coefficient.
    """
    if not p.is_even():
        return ZERO
    if not p.letters:
        return MajoranaMonomial((), p.coefficient)
    start = p.support[0]
    seq = []
    coeff = complex(p.coefficient)
    for site, letter in p.letters:
        f, c = _letter_factors(site, letter, start)
        seq.extend(f)
        coeff *= c
    return normal_order(seq, coeff)


def monomial_to_test_vectors(mono: MajoranaMonomial, window: Window) -> list:
    """Test vectors ``h_a`` with ``B(h_a) = m_a`` for each factor of ``mono``."""
    out = []
    for a in mono.indices:
        site, kind = divmod(a, 2)
        if kind == 0:
            out.append(TestVector.delta(window, site, 1.0, 1.0))
        else:
            out.append(TestVector.delta(window, site, 1j, -1j))
    return out


# -- moments -------------------------------------------------------------------


def pair_value(h1: TestVector, h2: TestVector, covariance: CovarianceTruncation) -> complex:
    """Two-point function ``(Gamma h1, A h2)``."""
    # same arithmetic as the Wick oracle, so two-factor moments agree bit for bit
    return complex(_pair_matrix([h1, h2], covariance)[0, 1])


def _pair_matrix(vectors, covariance) -> np.ndarray:
    w = covariance.window
    for v in vectors:
        if v.window != w:
            raise ValueError("test vectors must live on the covariance window")
    left = np.array([gamma_apply(v).as_array() for v in vectors])
    right = np.array([v.as_array() for v in vectors])
    return left.conj() @ covariance.complex_form @ right.T


def wick_moment_bruteforce(vectors, covariance: CovarianceTruncation) -> complex:
    """``psi(B(h_1) ... B(h_2n))`` by explicit signed sum over all pairings."""
    n = len(vectors)
    if n > WICK_MAX_FACTORS:
        raise TooManyFactors(f"{n} factors exceeds the oracle limit {WICK_MAX_FACTORS}")
    if n % 2:
        return 0.0j
    if n == 0:
        return 1.0 + 0j
    v = _pair_matrix(vectors, covariance)

    def expand(idx):
        if not idx:
            return 1.0 + 0j
        first, rest = idx[0], idx[1:]
        total = 0.0j
        for t, second in enumerate(rest):
            sign = -1.0 if t % 2 else 1.0
            total += sign * v[first, second] * expand(rest[:t] + rest[t + 1 :])
        return total

    return complex(expand(tuple(range(n))))


def moment_pfaffian(vectors, covariance: CovarianceTruncation) -> complex:
    """Same quantity as :func:`wick_moment_bruteforce` via one Pfaffian."""
    n = len(vectors)
    if n % 2:
        return 0.0j
    if n == 0:
        return 1.0 + 0j
    v = _pair_matrix(vectors, covariance)
    a = np.triu(v, 1)
    return complex(pfaffian(a - a.T))


def _mode_rows(mono: MajoranaMonomial, window: Window) -> np.ndarray:
    return np.array([2 * (i // 2 - window.lo) + i % 2 for i in mono.indices], dtype=int)


def monomial_expectation(mono: MajoranaMonomial, covariance: CovarianceTruncation) -> complex:
    """``<coefficient * m_S>`` from the Majorana covariance."""
    k = mono.degree
    if k == 0:
        return complex(mono.coefficient)
    if k % 2:
        return 0.0j
    for s in mono.sites:
        if s not in covariance.window:
            raise SupportOutsideWindow(f"site {s} outside {covariance.window}")
    rows = _mode_rows(mono, covariance.window)
    sub = covariance.majorana_form[np.ix_(rows, rows)]
    # <m_a m_b> = -i M_ab for a != b
    return complex(mono.coefficient * (-1j) ** (k // 2) * pfaffian(sub))


def _realify(value: complex, coefficient: complex):
    if np.isreal(coefficient) and abs(value.imag) <= 1e-10 * (1 + abs(value)):
        return float(value.real)
    return value


def pauli_expectation(p: PauliString, covariance: CovarianceTruncation):
    """``<p>`` in the Theta-invariant state defined by ``covariance``."""
    for s in p.support:
        if s not in covariance.window:
            raise SupportOutsideWindow(f"site {s} outside {covariance.window}")
    mono = jordan_wigner_reduce(p)
    if mono is ZERO:
        return 0.0 if np.isreal(p.coefficient) else 0.0j
    return _realify(monomial_expectation(mono, covariance), p.coefficient)


# -- reduced density matrices ----------------------------------------------------


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """State on an ordered list of sites; first site is the leftmost tensor factor."""

    sites: tuple
    matrix: np.ndarray = field(repr=False)
    repaired: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        object.__setattr__(self, "sites", tuple(int(s) for s in self.sites))
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (2 ** len(self.sites),) * 2:
            raise ValueError("matrix shape does not match the number of sites")
        object.__setattr__(self, "matrix", m)
        if self.repaired is None:
            object.__setattr__(self, "repaired", psd_repair(m))

    @property
    def n_sites(self) -> int:
        return len(self.sites)

    def check(self, trace_tol=1e-10, herm_tol=1e-12, psd_tol=1e-8) -> None:
        m = self.matrix
        if abs(np.trace(m) - 1) > trace_tol:
            raise ValueError(f"trace {np.trace(m)} != 1")
        if np.max(np.abs(m - m.conj().T)) > herm_tol:
            raise ValueError("matrix is not hermitian")
        lo = np.linalg.eigvalsh(0.5 * (m + m.conj().T))[0]
        if lo < -psd_tol:
            raise ValueError(f"minimum eigenvalue {lo:.3e} below -{psd_tol}")

    def partial_trace(self, keep) -> "DensityMatrix":
        keep = [int(s) for s in keep]
        n = self.n_sites
        pos = [self.sites.index(s) for s in keep]
        traced = [i for i in range(n) if i not in pos]
        t = self.matrix.reshape((2,) * (2 * n))
        # bring kept axes (in requested order) first, traced ones last
        order = pos + traced
        t = t.transpose(order + [n + i for i in order])
        k = len(pos)
        t = t.reshape(2**k, 2 ** (n - k), 2**k, 2 ** (n - k))
        return DensityMatrix(keep, np.einsum("aibi->ab", t))

    def expectation(self, op: np.ndarray) -> complex:
        return complex(np.trace(self.matrix @ op))


def psd_repair(m: np.ndarray, clip: float = 1e-8) -> np.ndarray:
    """Clip eigenvalues in ``[-clip, 0)`` to zero and renormalize."""
    h = 0.5 * (m + m.conj().T)
    w, v = np.linalg.eigh(h)
    if w[0] >= 0:
        return h
    w = np.where((w < 0) & (w >= -clip), 0.0, w)
    r = (v * w) @ v.conj().T
    return r / np.trace(r).real


def _pauli_tensor_to_matrix(coeffs: np.ndarray, n: int) -> np.ndarray:
    """``sum_P coeffs[P] * P`` for a ``(4,)*n`` coefficient tensor."""
    t = coeffs.reshape((4,) * n).astype(complex)
    # contract one site at a time; output axes (row_1, col_1, ..., row_n, col_n)
    out = t
    for _ in range(n):
        out = np.tensordot(out, PAULI_BASIS, axes=([0], [0]))  # moves site to the back
    out = out.reshape((2, 2) * n)
    rows = list(range(0, 2 * n, 2))
    cols = list(range(1, 2 * n, 2))
    return out.transpose(rows + cols).reshape(2**n, 2**n)


def reduced_density_matrix(sites, covariance: CovarianceTruncation) -> DensityMatrix:
    """``rho = 2^-n sum_P <P> P`` over all Pauli strings on ``sites``."""
    sites = [int(s) for s in sites]
    n = len(sites)
    if n > RDM_MAX_SITES:
        raise TooManySites(f"{n} sites exceeds {RDM_MAX_SITES}")
    if len(set(sites)) != n:
        raise ValueError("repeated site")
    for s in sites:
        if s not in covariance.window:
            raise SupportOutsideWindow(f"site {s} outside {covariance.window}")
    coeffs = np.zeros(4**n, dtype=complex)
    coeffs[0] = 1.0
    # group monomials by degree, evaluate Pfaffians in batches
    groups: dict = {}
    for flat, word in enumerate(itertools.product("IXYZ", repeat=n)):
        if flat == 0:
            continue
        if sum(c in "XY" for c in word) % 2:
            continue
        mono = jordan_wigner_reduce(PauliString.from_dict(dict(zip(sites, word))))
        groups.setdefault(mono.degree, []).append((flat, mono))
    m = covariance.majorana_form
    for k in sorted(groups):  # deterministic order
        items = groups[k]
        rows = np.array([_mode_rows(mono, covariance.window) for _, mono in items])
        subs = m[rows[:, :, None], rows[:, None, :]]
        pf = pfaffian_batch(subs)
        phase = np.array([mono.coefficient for _, mono in items]) * (-1j) ** (k // 2)
        coeffs[[f for f, _ in items]] = phase * pf
    rho = _pauli_tensor_to_matrix(coeffs, n) / 2**n
    rho = 0.5 * (rho + rho.conj().T)
    return DensityMatrix(sites, rho)


def density_matrix_from_pauli(sites, expectation) -> DensityMatrix:
    """Tomographic reconstruction from any callable ``expectation(PauliString)``."""
    sites = list(sites)
    n = len(sites)
    coeffs = np.array(
        [expectation(PauliString.from_dict(dict(zip(sites, w)))) for w in itertools.product("IXYZ", repeat=n)],
        dtype=complex,
    )
    rho = _pauli_tensor_to_matrix(coeffs, n) / 2**n
    return DensityMatrix(sites, 0.5 * (rho + rho.conj().T))
