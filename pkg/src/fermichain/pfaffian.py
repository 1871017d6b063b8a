"""Pfaffians of antisymmetric matrices by pivoted Parlett-Reid elimination."""
from __future__ import annotations

import numpy as np


class NotAntisymmetric(ValueError):
    pass


class OddDimension(ValueError):
    pass


def _check(m: np.ndarray, tol: float) -> None:
    if m.ndim < 2 or m.shape[-1] != m.shape[-2]:
        raise ValueError(f"expected square matrices, got shape {m.shape}")
    if m.shape[-1] % 2:
        raise OddDimension(f"dimension {m.shape[-1]} is odd")
    scale = max(1.0, float(np.max(np.abs(m), initial=0.0)))
    if np.max(np.abs(m + np.swapaxes(m, -1, -2)), initial=0.0) > tol * scale:
        raise NotAntisymmetric("matrix is not antisymmetric")


def pfaffian(m, tol: float = 1e-12):
    """Pfaffian of a real or complex antisymmetric matrix.

    Uses the ``L T L^T`` reduction: at step ``k`` the largest entry of column
    ``k`` below the diagonal is pivoted into position ``(k+1, k)`` and the
    trailing block is updated by a rank-2 correction.

    >>> pfaffian(np.array([[0.0, 2.5], [-2.5, 0.0]]))
    2.5
    """
    a = np.array(m, dtype=np.result_type(m, float))
    _check(a, tol)
    n = a.shape[0]
    if n == 0:
        return a.dtype.type(1.0).item()
    pf = a.dtype.type(1.0)
    for k in range(0, n - 1, 2):
        kp = k + 1 + int(np.argmax(np.abs(a[k + 1 :, k])))
        if kp != k + 1:
            a[[k + 1, kp], :] = a[[kp, k + 1], :]
            a[:, [k + 1, kp]] = a[:, [kp, k + 1]]
            pf = -pf
        if a[k + 1, k] == 0.0:
            return a.dtype.type(0.0).item()
        pf = pf * a[k, k + 1]
        if k + 2 < n:
            tau = a[k, k + 2 :] / a[k, k + 1]
            col = a[k + 2 :, k + 1].copy()
            a[k + 2 :, k + 2 :] += np.outer(tau, col) - np.outer(col, tau)
    return pf.item()


def pfaffian_batch(ms, tol: float = 1e-12) -> np.ndarray:
    """Pfaffians of a stack of antisymmetric matrices, shape ``(B, n, n)``."""
    a = np.array(ms, dtype=np.result_type(ms, float))
    if a.ndim != 3:
        raise ValueError("expected a stack of matrices")
    _check(a, tol)
    b, n, _ = a.shape
    pf = np.ones(b, dtype=a.dtype)
    if n == 0 or b == 0:
        return pf
    rows = np.arange(b)
    for k in range(0, n - 1, 2):
        kp = k + 1 + np.argmax(np.abs(a[:, k + 1 :, k]), axis=1)
        swap = kp != k + 1
        if np.any(swap):
            r = rows[swap]
            p = kp[swap]
            tmp = a[r, k + 1, :].copy()
            a[r, k + 1, :] = a[r, p, :]
            a[r, p, :] = tmp
            tmp = a[r, :, k + 1].copy()
            a[r, :, k + 1] = a[r, :, p]
            a[r, :, p] = tmp
            pf[swap] = -pf[swap]
        piv = a[:, k, k + 1]
        zero = piv == 0.0
        pf = pf * piv
        if k + 2 < n:
            safe = np.where(zero, 1.0, piv)
            tau = a[:, k, k + 2 :] / safe[:, None]
            col = a[:, k + 2 :, k + 1].copy()
            a[:, k + 2 :, k + 2 :] += (
                tau[:, :, None] * col[:, None, :] - col[:, :, None] * tau[:, None, :]
            )
    return pf
