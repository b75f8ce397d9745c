"""Finite-difference stencils on uniform grids (Fornberg weights)."""

from __future__ import annotations

import numpy as np

from .errors import InsufficientSmoothness

__all__ = [
    "fornberg_weights",
    "deriv_matrix",
    "one_sided_weights",
    "apply_deriv_axis",
    "trace_deriv_at_zero",
]


def fornberg_weights(z: float, x: np.ndarray, m: int) -> np.ndarray:
    """Weights for derivatives 0..m at z from arbitrary nodes x; shape (m+1, n).

    Computed in extended precision: the weights are consumed by stencils whose
    absolute-weight sums reach 1e3/dx^k, where double-precision weight noise
    would dominate high-order trace extractions.
    """
    x = np.asarray(x, dtype=np.longdouble)
    z = np.longdouble(z)
    n = len(x)
    c = np.zeros((m + 1, n), dtype=np.longdouble)
    c1 = np.longdouble(1.0)
    c4 = x[0] - z
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, m)
        c2 = 1.0
        c5 = c4
        c4 = x[i] - z
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[k, i] = c1 * (k * c[k - 1, i - 1] - c5 * c[k, i - 1]) / c2
                c[0, i] = -c1 * c5 * c[0, i - 1] / c2
            for k in range(mn, 0, -1):
                c[k, j] = (c4 * c[k, j] - k * c[k - 1, j]) / c3
            c[0, j] = c4 * c[0, j] / c3
        c1 = c2
    return c


def deriv_matrix(n: int, dx: float, k: int, acc: int = 8) -> np.ndarray:
    """Dense k-th derivative matrix on n uniform points, one-sided near edges.

    Stencil width k + acc guarantees order ``acc`` on smooth data.
    """
    width = k + acc
    if n < width:
        raise InsufficientSmoothness(
            f"grid with {n} points cannot support order-{k} derivative at accuracy {acc}"
        )
    D = np.zeros((n, n), dtype=np.longdouble)
    half = width // 2
    for i in range(n):
        lo = min(max(i - half, 0), n - width)
        nodes = np.arange(lo, lo + width) * np.longdouble(dx)
        D[i, lo:lo + width] = fornberg_weights(i * np.longdouble(dx), nodes, k)[k]
    return D


def one_sided_weights(k: int, acc: int, dt: float, n_available: int) -> np.ndarray:
    """Weights for d^k/dt^k at t=0 from samples t = 0, dt, 2dt, ...

    Uses k + acc leading samples; raises when the grid is too short.
    """
    width = k + acc
    if n_available < width:
        raise InsufficientSmoothness(
            f"need {width} time samples for order-{k} trace at accuracy {acc}, "
            f"have {n_available}"
        )
    nodes = np.arange(width) * np.longdouble(dt)
    return fornberg_weights(0.0, nodes, k)[k]


def apply_deriv_axis(field: np.ndarray, axis: int, dx: float, k: int, acc: int = 8) -> np.ndarray:
    """k-th derivative along one axis of a uniform non-periodic grid.

    The one-sided boundary stencils carry large weights (sum |w| ~ 1e3/dx^k),
    so the product is taken in extended precision to keep compositions of
    derivative passes from amplifying roundoff.
    """
    field = np.asarray(field)
    n = field.shape[axis]
    D = deriv_matrix(n, dx, k, acc)
    moved = np.moveaxis(field, axis, 0)
    extended = field.dtype in (np.longdouble, np.clongdouble)
    if np.iscomplexobj(moved):
        out = np.tensordot(D, moved.astype(np.clongdouble), axes=(1, 0))
        if not extended:
            out = out.astype(complex)
    else:
        out = np.tensordot(D, moved.astype(np.longdouble), axes=(1, 0))
        if not extended:
            out = out.astype(float)
    return np.moveaxis(out, 0, axis)


def trace_deriv_at_zero(field: np.ndarray, axis: int, dt: float, k: int, acc: int = 8) -> np.ndarray:
    """d^k/dt^k at the left endpoint of ``axis`` via one-sided differences."""
    field = np.asarray(field)
    w = one_sided_weights(k, acc, dt, field.shape[axis])
    moved = np.moveaxis(field, axis, 0)
    extended = field.dtype in (np.longdouble, np.clongdouble)
    if np.iscomplexobj(moved):
        out = np.tensordot(w, moved[: len(w)].astype(np.clongdouble), axes=(0, 0))
        return out if extended else out.astype(complex)
    out = np.tensordot(w, moved[: len(w)].astype(np.longdouble), axes=(0, 0))
    return out if extended else out.astype(float)
