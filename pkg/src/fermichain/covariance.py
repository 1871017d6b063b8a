"""Ground-state covariance of the XY chain from its momentum-space symbol.

The basis projection ``E`` acts on the doubled space as the multiplication
operator

    E_hat(x) = (1 + K(x) / k(x)) / 2,
    K(x) = [[cos x - lam, -i gam sin x], [i gam sin x, -(cos x - lam)]],
    k(x) = sqrt((cos x - lam)^2 + gam^2 sin^2 x),

and its real-space 2x2 blocks are Fourier coefficients
``C(d) = (2 pi)^-1 int exp(-i d x) E_hat(x) dx`` so that
``E[(j, s), (k, t)] = C(j - k)[s, t]``.

Reading off ``psi(B(h1) B(h2)) = (Gamma h1, E h2)`` gives the two-point
functions of a block ``C(j - k)``::

    C[0, 0] = <c_j c_k^dagger>      C[0, 1] = <c_j c_k>
    C[1, 0] = <c_j^dagger c_k^dagger>   C[1, 1] = <c_j^dagger c_k>

Majorana modes are ``m_2j = c_j + c_j^dagger`` and
``m_2j+1 = -i (c_j - c_j^dagger)``; the Majorana covariance is
``M[a, b] = (i / 2) <[m_a, m_b]>``, real antisymmetric, with
``<sigma_z^(j)> = M[2j, 2j+1]``.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np

from .lattice import Window, gamma_conjugate

DEFAULT_GRID = 2**14
DEFAULT_QUAD_TOL = 1e-5
SINGULAR_TOL = 1e-12


class SymbolSingular(ValueError):
    """The symbol was evaluated where ``k(x)`` vanishes."""


class QuadratureNotConverged(RuntimeError):
    """Fourier coefficients changed too much under grid refinement."""


@dataclass(frozen=True)
class XYParams:
    """Anisotropy ``gamma`` and transverse field ``lam`` of the XY chain."""

    gamma: float
    lam: float

    def is_critical(self) -> bool:
        g, l = abs(self.gamma), abs(self.lam)
        return (math.isclose(l, 1.0) and g != 0.0) or (l < 1.0 and g == 0.0)

    def is_gapped(self) -> bool:
        return abs(self.lam) > 1.0

    @property
    def sector(self) -> str:
        """Label describing which state the symbol defines."""
        if self.is_critical() or self.is_gapped():
            return "ground state"
        # |lam| < 1 with gamma != 0: degenerate ground states, no uniqueness claim
        return "Theta-invariant ground state sector"

    def as_dict(self) -> dict:
        return {"gamma": self.gamma, "lambda": self.lam}


def dispersion(params: XYParams, x):
    """``k(x)``; accepts scalars or arrays."""
    c = np.cos(x) - params.lam
    s = params.gamma * np.sin(x)
    return np.hypot(c, s)


def symbol_matrix_K(params: XYParams, x: float) -> np.ndarray:
    c = math.cos(x) - params.lam
    s = params.gamma * math.sin(x)
    return np.array([[c, -1j * s], [1j * s, -c]])


def symbol_eval(params: XYParams, x: float) -> np.ndarray:
    """The rank-one projection ``E_hat(x)``."""
    k = float(dispersion(params, x))
    if k <= SINGULAR_TOL:
        raise SymbolSingular(f"k({x}) = {k:.3e} for {params}")
    return 0.5 * (np.eye(2) + symbol_matrix_K(params, x) / k)


def symbol_samples(params: XYParams, x: np.ndarray) -> np.ndarray:
    """Vectorized ``E_hat`` on a grid, shape ``(len(x), 2, 2)``."""
    x = np.asarray(x, dtype=float)
    c = np.cos(x) - params.lam
    s = params.gamma * np.sin(x)
    k = np.hypot(c, s)
    if np.any(k <= SINGULAR_TOL):
        bad = x[np.argmin(k)]
        raise SymbolSingular(f"grid hits a zero of k(x) near x={bad} for {params}")
    out = np.empty(x.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = 0.5 * (1 + c / k)
    out[..., 1, 1] = 0.5 * (1 - c / k)
    out[..., 0, 1] = -0.5j * s / k
    out[..., 1, 0] = 0.5j * s / k
    return out


def offset_grid(n_grid: int) -> np.ndarray:
    """Uniform grid on ``[0, 2 pi)`` shifted by half a step."""
    return (np.arange(n_grid) + 0.5) * (2 * np.pi / n_grid)


@functools.lru_cache(maxsize=32)
def _fourier_table(params: XYParams, n_grid: int) -> np.ndarray:
    """All discrete coefficients ``C(d)``, indexed by ``d mod n_grid``."""
    h = 2 * np.pi / n_grid
    samples = symbol_samples(params, offset_grid(n_grid))
    table = np.fft.fft(samples, axis=0) / n_grid
    d = np.fft.fftfreq(n_grid, 1.0 / n_grid)
    # the half-step offset contributes a phase exp(-i d h / 2)
    table *= np.exp(-0.5j * d * h)[:, None, None]
    table.setflags(write=False)
    return table


def fourier_blocks(
    params: XYParams,
    max_distance: int,
    n_grid: int = DEFAULT_GRID,
    tol: float = DEFAULT_QUAD_TOL,
    check: bool = True,
) -> np.ndarray:
    """``C(d)`` for ``d = -max_distance .. max_distance``, shape ``(2D+1, 2, 2)``.

    With ``check`` the table is recomputed on a doubled grid and the two must
    agree to ``tol``.
    """
    if max_distance >= n_grid // 2:
        raise ValueError("max_distance too large for the quadrature grid")
    d = np.arange(-max_distance, max_distance + 1)
    coarse = _fourier_table(params, n_grid)[d % n_grid]
    if check:
        fine = _fourier_table(params, 2 * n_grid)[d % (2 * n_grid)]
        err = float(np.max(np.abs(fine - coarse)))
        if err > tol:
            raise QuadratureNotConverged(
                f"refinement changed C(d) by {err:.3e} > {tol:.1e} for {params}"
            )
        return fine
    return coarse


def covariance_block(params: XYParams, d: int, **kw) -> np.ndarray:
    """The 2x2 block ``C(d)``."""
    return fourier_blocks(params, abs(d), **kw)[d + abs(d)]


# -- truncations ------------------------------------------------------------

_MAJ_SITE = np.array([[1.0, 1j], [1.0, -1j]])  # columns: h for m_2j, m_2j+1


def complex_to_majorana(complex_form: np.ndarray) -> np.ndarray:
    """Majorana covariance ``M`` from a doubled-space covariance."""
    n = complex_form.shape[0] // 2
    h = np.kron(np.eye(n), _MAJ_SITE)
    g = h.conj().T @ complex_form @ h  # g[a, b] = <m_a m_b>
    m = 0.5j * (g - g.T)
    if np.max(np.abs(m.imag), initial=0.0) > 1e-9:
        raise ValueError("covariance is not Gamma-compatible")
    m = m.real
    return 0.5 * (m - m.T)


def majorana_to_complex(majorana_form: np.ndarray) -> np.ndarray:
    """Inverse of :func:`complex_to_majorana`."""
    n = majorana_form.shape[0] // 2
    g = np.eye(2 * n) - 1j * majorana_form
    hinv = np.linalg.inv(np.kron(np.eye(n), _MAJ_SITE))
    return hinv.conj().T @ g @ hinv


def toeplitz_from_blocks(blocks: np.ndarray, n: int) -> np.ndarray:
    """Assemble ``T[(j,s),(k,t)] = C(j-k)[s,t]`` from ``C(-(n-1)..n-1)``."""
    j = np.arange(n)
    diff = j[:, None] - j[None, :] + (n - 1)
    t = blocks[diff]  # (n, n, 2, 2)
    return t.transpose(0, 2, 1, 3).reshape(2 * n, 2 * n)


@dataclass(frozen=True, eq=False)
class CovarianceTruncation:
    """Compression of a covariance operator to a window.

    ``complex_form`` is on the doubled space in interleaved ordering and
    ``majorana_form`` is the matching real antisymmetric matrix.
    """

    window: Window
    complex_form: np.ndarray = field(repr=False)
    majorana_form: np.ndarray = field(repr=False)
    params: XYParams | None = None
    meta: dict = field(default_factory=dict)

    @classmethod
    def from_complex(cls, window, complex_form, params=None, **meta):
        a = np.asarray(complex_form, dtype=complex)
        if a.shape != (2 * window.length,) * 2:
            raise ValueError("complex_form has the wrong shape for the window")
        return cls(window, a, complex_to_majorana(a), params, meta)

    @classmethod
    def from_majorana(cls, window, majorana_form, params=None, **meta):
        m = np.asarray(majorana_form, dtype=float)
        return cls(window, majorana_to_complex(m), m, params, meta)

    @property
    def n_sites(self) -> int:
        return self.window.length

    def block(self, j: int, k: int) -> np.ndarray:
        a, b = self.window.index(j), self.window.index(k)
        return self.complex_form[2 * a : 2 * a + 2, 2 * b : 2 * b + 2]

    def restrict(self, sites) -> "CovarianceTruncation":
        """Compression to a contiguous sub-window given by its sites."""
        sites = list(sites)
        sub = Window(sites[0], sites[-1] + 1)
        if sites != list(range(sub.lo, sub.hi)):
            raise ValueError("restrict expects contiguous ascending sites")
        idx = np.concatenate([[2 * self.window.index(s), 2 * self.window.index(s) + 1] for s in sites])
        return CovarianceTruncation(
            sub,
            self.complex_form[np.ix_(idx, idx)],
            self.majorana_form[np.ix_(idx, idx)],
            self.params,
            dict(self.meta),
        )

    def mode_occupations(self) -> np.ndarray:
        """Eigenvalues of the complex form, ascending."""
        return np.linalg.eigvalsh(self.complex_form)

    def majorana_occupations(self) -> np.ndarray:
        """``(1 +- mu_k) / 2`` from the Majorana spectrum ``+- i mu_k``, ascending."""
        # i M is hermitian with eigenvalues +- mu_k; keep each mu_k once
        mu = np.linalg.eigvalsh(1j * self.majorana_form)[self.n_sites :]
        return np.sort(np.concatenate([0.5 * (1 + mu), 0.5 * (1 - mu)]))

    def gamma_defect(self) -> float:
        """``max |Gamma A Gamma + A - 1|`` over the window."""
        a = self.complex_form
        return float(np.max(np.abs(gamma_conjugate(a) + a - np.eye(a.shape[0]))))

    def to_dict(self) -> dict:
        return {
            "window": [self.window.lo, self.window.hi],
            "params": self.params.as_dict() if self.params else None,
            **self.meta,
        }


def build_truncation(
    params: XYParams,
    window: Window,
    n_grid: int = DEFAULT_GRID,
    tol: float = DEFAULT_QUAD_TOL,
) -> CovarianceTruncation:
    """Compression of the infinite-chain basis projection to ``window``."""
    n = window.length
    blocks = fourier_blocks(params, n - 1, n_grid=n_grid, tol=tol)
    a = toeplitz_from_blocks(blocks, n)
    a = 0.5 * (a + a.conj().T)
    return CovarianceTruncation.from_complex(
        window, a, params, kind="compression", n_grid=n_grid, quad_tol=tol
    )


def ring_projection(params: XYParams, half_width: int) -> CovarianceTruncation:
    """Exact basis projection of the ``2N``-site ring ``[-N, N)``.

    The symbol is sampled on the ``2N``-point offset grid, which is the same
    discretization used for quadrature, taken at the ring size.  The result is
    a projection (not a compression), so finite-size trace identities that need
    ``E^2 = E`` hold to machine precision.
    """
    n = 2 * half_width
    window = Window(-half_width, half_width)
    x = offset_grid(n)
    samples = symbol_samples(params, x)
    u = np.exp(-1j * np.outer(window.sites, x)) / np.sqrt(n)  # unitary on the ring
    a = np.einsum("jm,mst,km->jskt", u, samples, u.conj()).reshape(2 * n, 2 * n)
    a = 0.5 * (a + a.conj().T)
    return CovarianceTruncation.from_complex(window, a, params, kind="ring")
