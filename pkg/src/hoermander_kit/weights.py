"""Regularity-index weights on frequency space.

The anisotropic weight pairs one time derivative with two space derivatives:

    mu(xi', xi_k) = (1 + |xi'|^2 + |xi_k|)^(s/2) * phi((1 + |xi'|^2 + |xi_k|)^(1/2))

with the time frequency ``xi_k`` on the last axis.  The isotropic weight uses
``1 + |xi|^2`` instead.  Both are evaluated lazily on frequency meshes; full
grids are cached only below 2**24 lattice points.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch
from .params import FunctionParam, constant

__all__ = [
    "RegularityIndex",
    "isotropic",
    "parabolic_split",
    "eval_weight",
    "weight_on_mesh",
    "check_admissibility",
    "AdmissibilityFit",
]

_GRID_CACHE: dict = {}
_GRID_CACHE_POINT_CAP = 2**24


@dataclass(frozen=True)
class RegularityIndex:
    """Weight mu = rho^s * phi(rho) with rho^2 = 1+|xi|^2 or 1+|xi'|^2+|xi_k|.

    ``spatial_dims`` is k-1 for the parabolic split (the last axis is time);
    it may be 0, which leaves the pure time weight (1+|xi_k|)^(s/2)phi(...)
    used by interval-geometry lateral boundaries.  For the isotropic case
    ``spatial_dims`` equals ``dimension``.
    """

    s: float
    phi: FunctionParam
    anisotropy: str  # "isotropic" | "parabolic"
    dimension: int

    def __post_init__(self):
        if self.anisotropy not in ("isotropic", "parabolic"):
            raise ValueError(f"unknown anisotropy {self.anisotropy!r}")
        if self.dimension < 1:
            raise ValueError("dimension must be >= 1")

    @property
    def spatial_dims(self) -> int:
        return self.dimension - 1 if self.anisotropy == "parabolic" else self.dimension

    def cache_key(self):
        return (self.s, self.phi.cache_key(), self.anisotropy, self.dimension)

    def describe(self) -> str:
        if self.anisotropy == "parabolic":
            return f"H^({self.s:g},{self.s / 2:g};{self.phi.describe()})"
        return f"H^({self.s:g};{self.phi.describe()})"


def isotropic(s: float, phi: FunctionParam | None = None, dimension: int = 1) -> RegularityIndex:
    return RegularityIndex(
        s=float(s), phi=phi if phi is not None else constant(), anisotropy="isotropic",
        dimension=dimension,
    )


def parabolic_split(
    s: float, phi: FunctionParam | None = None, dimension: int = 2
) -> RegularityIndex:
    """Anisotropic index on R^(k-1) x R_t; dimension = k >= 1 (last axis time)."""
    return RegularityIndex(
        s=float(s), phi=phi if phi is not None else constant(), anisotropy="parabolic",
        dimension=dimension,
    )


def _rho_squared(idx: RegularityIndex, xi: np.ndarray) -> np.ndarray:
    if idx.anisotropy == "parabolic":
        spatial = xi[..., :-1]
        time = xi[..., -1]
        return 1.0 + np.sum(spatial**2, axis=-1) + np.abs(time)
    return 1.0 + np.sum(xi**2, axis=-1)


def eval_weight(idx: RegularityIndex, xi) -> np.ndarray:
    """Evaluate mu at frequency vectors; last axis of ``xi`` is the components."""
    xi = np.asarray(xi, dtype=float)
    if xi.shape[-1] != idx.dimension:
        raise DimensionMismatch(
            f"frequency has {xi.shape[-1]} components, index expects {idx.dimension}"
        )
    if not np.all(np.isfinite(xi)):
        raise ValueError("frequencies must be finite")
    rho2 = _rho_squared(idx, xi)
    rho = np.sqrt(rho2)
    return rho2 ** (idx.s / 2.0) * idx.phi(rho)


def weight_on_mesh(idx: RegularityIndex, freq_axes: Sequence[np.ndarray]) -> np.ndarray:
    """Weight array over the tensor mesh of per-axis frequency vectors."""
    if len(freq_axes) != idx.dimension:
        raise DimensionMismatch(
            f"got {len(freq_axes)} frequency axes, index expects {idx.dimension}"
        )
    npoints = int(np.prod([len(a) for a in freq_axes]))
    key = None
    if npoints <= _GRID_CACHE_POINT_CAP:
        key = (idx.cache_key(), tuple(a.tobytes() for a in freq_axes))
        cached = _GRID_CACHE.get(key)
        if cached is not None:
            return cached
    if idx.anisotropy == "parabolic":
        rho2 = np.ones(tuple(len(a) for a in freq_axes))
        for ax, f in enumerate(freq_axes[:-1]):
            shape = [1] * len(freq_axes)
            shape[ax] = len(f)
            rho2 = rho2 + (f**2).reshape(shape)
        shape = [1] * len(freq_axes)
        shape[-1] = len(freq_axes[-1])
        rho2 = rho2 + np.abs(freq_axes[-1]).reshape(shape)
    else:
        rho2 = np.ones(tuple(len(a) for a in freq_axes))
        for ax, f in enumerate(freq_axes):
            shape = [1] * len(freq_axes)
            shape[ax] = len(f)
            rho2 = rho2 + (f**2).reshape(shape)
    out = rho2 ** (idx.s / 2.0) * idx.phi(np.sqrt(rho2))
    if key is not None:
        _GRID_CACHE[key] = out
    return out


@dataclass(frozen=True)
class AdmissibilityFit:
    c: float
    l: float
    max_residual: float
    pairs: int


def check_admissibility(
    idx: RegularityIndex,
    sample_pairs: int = 10_000,
    box: float = 64.0,
    seed: int = 0,
) -> AdmissibilityFit:
    """Empirical fit of mu(xi)/mu(eta) <= c (1+|xi-eta|)^l over random pairs.

    The existential (c, l) of the admissibility bound are estimated from the
    upper convex hull of (log(1+|xi-eta|), log ratio) samples: ``l`` is the
    asymptotic hull slope and ``c`` the smallest constant making the line
    dominate every sample.  ``max_residual`` is the largest signed slack
    (<= 0 means the fitted line dominates all samples).
    """
    if sample_pairs < 100:
        raise ValueError("need at least 100 sample pairs")
    rng = np.random.default_rng(seed)
    k = idx.dimension
    xi = rng.uniform(-box, box, size=(sample_pairs, k))
    eta = rng.uniform(-box, box, size=(sample_pairs, k))
    mu_xi = eval_weight(idx, xi)
    mu_eta = eval_weight(idx, eta)
    y = np.log(mu_xi / mu_eta)
    y = np.concatenate([y, -y])
    L = np.log1p(np.linalg.norm(xi - eta, axis=-1))
    L = np.concatenate([L, L])

    if np.ptp(y) < 1e-13:  # constant weight
        return AdmissibilityFit(c=1.0, l=0.0, max_residual=float(np.max(np.abs(y))),
                                pairs=sample_pairs)

    order = np.argsort(L)
    Ls, ys = L[order], y[order]
    hull: list[tuple[float, float]] = []
    for pt in zip(Ls, ys):
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (y2 - y1) * (pt[0] - x1) <= (pt[1] - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(pt)
    # asymptotic slope: last hull vertex against the vertex at least half a
    # log-unit to its left, to dodge slope noise between near-coincident points
    xe, ye = hull[-1]
    anchor = next(((x, v) for x, v in reversed(hull[:-1]) if x <= xe - 0.5), hull[0])
    slope = (ye - anchor[1]) / (xe - anchor[0]) if xe > anchor[0] else 0.0
    log_c = float(np.max(y - slope * L))
    resid = float(np.max(y - (log_c + slope * L)))
    return AdmissibilityFit(c=float(np.exp(log_c)), l=float(slope),
                            max_residual=resid, pairs=sample_pairs)
