"""Finite lattice windows and the structural operators on the doubled test space.

A test vector ``h = f1 (+) f2`` lives on a window ``[lo, hi)`` of the integer
chain.  ``f1`` is the creation component and ``f2`` the annihilation component,
so that ``B(h) = sum_j f1_j c_j^dagger + f2_j c_j``.

Dense matrices on the doubled space use *site-major interleaved* ordering:
row ``2 * (j - lo) + s`` holds component ``s`` (0 for ``f1``, 1 for ``f2``) of
site ``j``.  Every module in the package uses this ordering.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Window:
    """Half-open interval ``[lo, hi)`` of lattice sites."""

    lo: int
    hi: int

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"empty window [{self.lo}, {self.hi})")

    @classmethod
    def centered(cls, half_width: int) -> "Window":
        return cls(-half_width, half_width)

    @property
    def length(self) -> int:
        return self.hi - self.lo

    @property
    def sites(self) -> np.ndarray:
        return np.arange(self.lo, self.hi)

    def shifted(self, steps: int) -> "Window":
        return Window(self.lo + steps, self.hi + steps)

    def contains(self, site: int) -> bool:
        return self.lo <= site < self.hi

    def index(self, site: int) -> int:
        if not self.contains(site):
            raise IndexError(f"site {site} outside window [{self.lo}, {self.hi})")
        return site - self.lo

    def __contains__(self, site) -> bool:
        return self.contains(int(site))


@dataclass(frozen=True, eq=False)
class TestVector:
    """Doubled test function ``f1 (+) f2`` restricted to a window."""

    __test__ = False  # keep pytest from collecting this class

    window: Window
    f1: np.ndarray = field(repr=False)
    f2: np.ndarray = field(repr=False)

    def __post_init__(self):
        f1 = np.asarray(self.f1, dtype=complex)
        f2 = np.asarray(self.f2, dtype=complex)
        n = self.window.length
        if f1.shape != (n,) or f2.shape != (n,):
            raise ValueError(
                f"components must have shape ({n},), got {f1.shape} and {f2.shape}"
            )
        object.__setattr__(self, "f1", f1)
        object.__setattr__(self, "f2", f2)

    @classmethod
    def zeros(cls, window: Window) -> "TestVector":
        n = window.length
        return cls(window, np.zeros(n), np.zeros(n))

    @classmethod
    def delta(cls, window: Window, site: int, c1: complex = 1.0, c2: complex = 0.0):
        v = cls.zeros(window)
        i = window.index(site)
        v.f1[i] = c1
        v.f2[i] = c2
        return v

    @classmethod
    def from_array(cls, window: Window, a: np.ndarray) -> "TestVector":
        a = np.asarray(a, dtype=complex).reshape(window.length, 2)
        return cls(window, a[:, 0].copy(), a[:, 1].copy())

    def as_array(self) -> np.ndarray:
        """Interleaved vector ``(f1[lo], f2[lo], f1[lo+1], ...)``."""
        return np.column_stack([self.f1, self.f2]).reshape(-1)

    def scaled(self, alpha: complex) -> "TestVector":
        return TestVector(self.window, alpha * self.f1, alpha * self.f2)

    def __add__(self, other: "TestVector") -> "TestVector":
        if other.window != self.window:
            raise ValueError("windows differ")
        return TestVector(self.window, self.f1 + other.f1, self.f2 + other.f2)

    def allclose(self, other: "TestVector", atol: float = 1e-12) -> bool:
        return (
            self.window == other.window
            and np.allclose(self.f1, other.f1, atol=atol, rtol=0)
            and np.allclose(self.f2, other.f2, atol=atol, rtol=0)
        )


def inner(h1: TestVector, h2: TestVector) -> complex:
    """``(h1, h2)`` on the doubled space, antilinear in the first slot."""
    if h1.window != h2.window:
        raise ValueError("windows differ")
    return complex(np.vdot(h1.f1, h2.f1) + np.vdot(h1.f2, h2.f2))


def shift_apply(v: TestVector, steps: int) -> TestVector:
    """``(u^k f)_j = f_{j-k}``: data and window move together."""
    return TestVector(v.window.shifted(steps), v.f1.copy(), v.f2.copy())


def _left_mask(window: Window) -> np.ndarray:
    return window.sites <= -1


def theta_minus_apply(v: TestVector) -> TestVector:
    sign = np.where(_left_mask(v.window), -1.0, 1.0)
    return TestVector(v.window, sign * v.f1, sign * v.f2)


def half_projection_apply(v: TestVector) -> TestVector:
    keep = np.where(_left_mask(v.window), 0.0, 1.0)
    return TestVector(v.window, keep * v.f1, keep * v.f2)


def gamma_apply(v: TestVector) -> TestVector:
    """The antiunitary involution ``(f1, f2) -> (conj f2, conj f1)``."""
    return TestVector(v.window, np.conj(v.f2), np.conj(v.f1))


# dense realizations (doubled, interleaved ordering)


def theta_minus_matrix(window: Window) -> np.ndarray:
    sign = np.where(_left_mask(window), -1.0, 1.0)
    return np.diag(np.repeat(sign, 2))


def half_projection_matrix(window: Window) -> np.ndarray:
    keep = np.where(_left_mask(window), 0.0, 1.0)
    return np.diag(np.repeat(keep, 2))


def swap_matrix(window: Window) -> np.ndarray:
    """Linear part ``J`` of ``Gamma = J o conj``."""
    return np.kron(np.eye(window.length), np.array([[0.0, 1.0], [1.0, 0.0]]))


def gamma_conjugate(a: np.ndarray) -> np.ndarray:
    """Matrix of ``Gamma A Gamma`` for a linear operator ``A`` on the doubled space."""
    n = a.shape[0] // 2
    j = np.kron(np.eye(n), np.array([[0.0, 1.0], [1.0, 0.0]]))
    return j @ np.conj(a) @ j
