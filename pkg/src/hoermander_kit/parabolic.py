"""Parabolic problems on flat model geometries and their compatibility calculus.

The operator is A u = dt u + sum over |alpha| <= 2 of a_alpha D^alpha u with
D_j = i d/dx_j, on a cylinder over either the unit interval or a periodic
strip (0,1) x circle.  Both geometries have trivial single-chart boundaries
(two points, or two disjoint circles), which makes every boundary space
directly computable: the chart/partition machinery of the general theory is
the identity here.

The module provides the Petrovskii parabolicity and boundary-covering checks
(sampled margins with analytic minimizers over the spectral half-plane), the
recurrence for the initial time-derivative functions v_k built from (f, h),
the compatibility-condition count with its jump sets, residual checks of the
conditions themselves, and the three-component target norms assembled from
quotient norms over embedded periodic boxes.

Grid conventions: closed grids include endpoints, so interval fields have
nx+1 spatial points and nt+1 time levels; strip fields are (nx+1, ny, nt+1)
with the periodic y axis holding ny points.  nx, ny, nt must be powers of two
so the closed grids embed into padded periodic boxes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import spectra
from ._expr import compile_expr
from ._fd import apply_deriv_axis, one_sided_weights, trace_deriv_at_zero
from .errors import (
    DimensionMismatch,
    InsufficientSmoothness,
    NotFirstOrder,
)
from .params import FunctionParam, constant
from .spectra import Lattice, SubdomainMask
from .weights import RegularityIndex, isotropic, parabolic_split

__all__ = [
    "IntervalGeometry",
    "PeriodicStripGeometry",
    "Coefficient",
    "Dirichlet",
    "FirstOrder",
    "ParabolicProblem",
    "heat_problem",
    "problem_from_config",
    "ConditionReport",
    "check_petrovskii",
    "check_covering",
    "compat_count",
    "in_E",
    "continuity_intervals",
    "compute_v",
    "apply_boundary_recurrence",
    "CompatibilityReport",
    "check_compatibility",
    "boundary_values",
    "gamma_norm",
    "target_norm",
    "target_norm_batch",
    "omega_domain",
    "lateral_domain",
    "spatial_domain",
    "quotient_auto",
]


# -- geometries -----------------------------------------------------------------

def _require_pow2(n: int, name: str) -> None:
    if n < 2 or (n & (n - 1)) != 0:
        raise ValueError(f"{name} must be a power of two >= 2, got {n}")


@dataclass(frozen=True)
class IntervalGeometry:
    """G = (0,1); the boundary consists of the two endpoints."""

    nx: int

    def __post_init__(self):
        _require_pow2(self.nx, "nx")

    @property
    def spatial_dim(self) -> int:
        return 1

    @property
    def dx(self) -> float:
        return 1.0 / self.nx

    def x_axis(self) -> np.ndarray:
        return np.arange(self.nx + 1) * self.dx

    def g_shape(self) -> tuple[int, ...]:
        return (self.nx + 1,)


@dataclass(frozen=True)
class PeriodicStripGeometry:
    """G = (0,1)_x x circle_y; the boundary is two disjoint circles."""

    nx: int
    ny: int
    period_y: float = 1.0

    def __post_init__(self):
        _require_pow2(self.nx, "nx")
        _require_pow2(self.ny, "ny")
        if self.period_y <= 0:
            raise ValueError("period_y must be positive")

    @property
    def spatial_dim(self) -> int:
        return 2

    @property
    def dx(self) -> float:
        return 1.0 / self.nx

    def x_axis(self) -> np.ndarray:
        return np.arange(self.nx + 1) * self.dx

    def y_axis(self) -> np.ndarray:
        return np.arange(self.ny) * (self.period_y / self.ny)

    def g_shape(self) -> tuple[int, ...]:
        return (self.nx + 1, self.ny)


Geometry = IntervalGeometry | PeriodicStripGeometry


def _spatial_meshes(geom: Geometry):
    if isinstance(geom, IntervalGeometry):
        return (geom.x_axis(),)
    x = geom.x_axis()[:, None]
    y = geom.y_axis()[None, :]
    return (np.broadcast_to(x, geom.g_shape()), np.broadcast_to(y, geom.g_shape()))


# -- coefficients -----------------------------------------------------------------

@dataclass(frozen=True)
class Coefficient:
    """Smooth coefficient on the closed cylinder.

    ``evaluator(*spatial, t)`` must broadcast over arrays.  Optional exact
    time-derivative evaluators avoid one-sided differencing of the
    coefficient at t = 0; constants short-circuit to zero derivatives.
    """

    evaluator: Callable
    dt_evaluators: tuple[Callable, ...] = ()
    time_constant: bool = False
    label: str = ""

    @classmethod
    def const(cls, value: complex) -> "Coefficient":
        v = complex(value)

        def ev(*args):
            return np.broadcast_arrays(*args)[0] * 0 + v

        return cls(evaluator=ev, time_constant=True, label=f"{value}")

    def on_G(self, geom: Geometry, t: float) -> np.ndarray:
        meshes = _spatial_meshes(geom)
        return np.asarray(self.evaluator(*meshes, t), dtype=complex) + np.zeros(
            geom.g_shape(), dtype=complex
        )

    def dt_on_G(self, geom: Geometry, q: int, tau: float, acc: int = 8) -> np.ndarray:
        """d^q/dt^q of the coefficient at t = 0 on the closed spatial grid."""
        if q == 0:
            return self.on_G(geom, 0.0)
        if self.time_constant:
            return np.zeros(geom.g_shape(), dtype=complex)
        if len(self.dt_evaluators) >= q:
            meshes = _spatial_meshes(geom)
            return np.asarray(
                self.dt_evaluators[q - 1](*meshes, 0.0), dtype=complex
            ) + np.zeros(geom.g_shape(), dtype=complex)
        h = tau / 256.0
        w = one_sided_weights(q, 8, h, q + 8)
        out = np.zeros(geom.g_shape(), dtype=complex)
        for j, wj in enumerate(w):
            out += wj * self.on_G(geom, j * h)
        return out


def _as_coefficient(c) -> Coefficient:
    if isinstance(c, Coefficient):
        return c
    if isinstance(c, (int, float, complex)):
        return Coefficient.const(c)
    return Coefficient(evaluator=c)


@dataclass(frozen=True)
class Dirichlet:
    order = 0


@dataclass(frozen=True)
class FirstOrder:
    """B u = sum b_j D_j u + b_0 u with smooth coefficients on the lateral boundary."""

    b: dict

    order = 1

    def coeff(self, j: int) -> Coefficient:
        return _as_coefficient(self.b.get(j, 0.0))


@dataclass(frozen=True)
class ParabolicProblem:
    """Second-order parabolic problem description on a flat cylinder.

    ``a_coeffs`` maps multi-indices alpha (tuples of length spatial_dim,
    |alpha| <= 2) to coefficients of A u = dt u + sum a_alpha D^alpha u.
    Construction does not run the parabolicity/covering checks; failing
    instances must be constructible so the checks themselves can report on
    them.  Call :func:`check_petrovskii` / :func:`check_covering` (or
    ``verify()``) to validate.
    """

    geometry: Geometry
    tau: float
    a_coeffs: dict
    boundary: Dirichlet | FirstOrder

    def __post_init__(self):
        if self.tau <= 0:
            raise ValueError("tau must be positive")
        n = self.geometry.spatial_dim
        norm_a = {}
        for alpha, c in self.a_coeffs.items():
            alpha = tuple(int(a) for a in alpha)
            if len(alpha) != n or any(a < 0 for a in alpha) or sum(alpha) > 2:
                raise ValueError(f"bad multi-index {alpha} for spatial dimension {n}")
            norm_a[alpha] = _as_coefficient(c)
        object.__setattr__(self, "a_coeffs", norm_a)

    @property
    def n(self) -> int:
        return self.geometry.spatial_dim

    @property
    def order_l(self) -> int:
        return self.boundary.order

    def verify(self, samples: int = 2000, seed: int = 0) -> dict:
        rep: dict = {"petrovskii": check_petrovskii(self, samples, seed)}
        if isinstance(self.boundary, FirstOrder):
            rep["covering"] = check_covering(self, samples, seed)
        return rep


def heat_problem(
    geometry: Geometry,
    tau: float = 1.0,
    boundary: str = "dirichlet",
    diffusion=1.0,
) -> ParabolicProblem:
    """Heat operator dt - diffusion * Laplace with Dirichlet or Neumann-type boundary."""
    n = geometry.spatial_dim
    a = {}
    for j in range(n):
        alpha = tuple(2 if i == j else 0 for i in range(n))
        a[alpha] = _as_coefficient(diffusion)
    if boundary == "dirichlet":
        bnd: Dirichlet | FirstOrder = Dirichlet()
    elif boundary == "neumann":
        # B = nu . D with nu = (1-2x, 0) on the two sheets x in {0, 1}
        bnd = FirstOrder(
            b={1: Coefficient(evaluator=lambda *args: 1.0 - 2.0 * args[0],
                              time_constant=True, label="1-2x")}
        )
    else:
        raise ValueError(f"unknown boundary {boundary!r}")
    return ParabolicProblem(geometry=geometry, tau=tau, a_coeffs=a, boundary=bnd)


def problem_from_config(cfg: dict) -> ParabolicProblem:
    """Build a problem from a JSON-style dict with expression-language coefficients."""
    gcfg = cfg["geometry"]
    if gcfg["kind"] == "interval":
        geom: Geometry = IntervalGeometry(nx=int(gcfg["nx"]))
        variables: tuple[str, ...] = ("x", "t")
    elif gcfg["kind"] == "strip":
        geom = PeriodicStripGeometry(
            nx=int(gcfg["nx"]), ny=int(gcfg["ny"]),
            period_y=float(gcfg.get("period_y", 1.0)),
        )
        variables = ("x", "y", "t")
    else:
        raise ValueError(f"unknown geometry kind {gcfg['kind']!r}")

    def parse_coeff(spec) -> Coefficient:
        if isinstance(spec, (int, float)):
            return Coefficient.const(spec)
        return Coefficient(evaluator=compile_expr(str(spec), variables), label=str(spec))

    a = {}
    for key, spec in cfg["a"].items():
        alpha = tuple(int(s) for s in str(key).split(","))
        a[alpha] = parse_coeff(spec)
    bcfg = cfg.get("boundary", {"kind": "dirichlet"})
    if bcfg["kind"] == "dirichlet":
        boundary: Dirichlet | FirstOrder = Dirichlet()
    else:
        boundary = FirstOrder(
            b={int(j): parse_coeff(spec) for j, spec in bcfg["b"].items()}
        )
    return ParabolicProblem(
        geometry=geom, tau=float(cfg.get("tau", 1.0)), a_coeffs=a, boundary=boundary
    )


# -- spatial derivatives on closed grids -------------------------------------------

def apply_D_alpha(
    geom: Geometry, f: np.ndarray, alpha: tuple[int, ...], acc: int = 8
) -> np.ndarray:
    """D^alpha with D_j = i d/dx_j: x by finite differences, y spectrally."""
    out = np.asarray(f)
    if not np.iscomplexobj(out):
        out = out.astype(complex)
    if alpha[0]:
        out = apply_deriv_axis(out, 0, geom.dx, alpha[0], acc)
    if isinstance(geom, PeriodicStripGeometry) and len(alpha) > 1 and alpha[1]:
        out = out.astype(complex)  # fft has no extended-precision path
        xi = 2.0 * np.pi * np.fft.fftfreq(geom.ny, d=geom.period_y / geom.ny)
        shape = [1] * out.ndim
        shape[1] = geom.ny
        out = np.fft.ifft(
            (1j * xi.reshape(shape)) ** alpha[1] * np.fft.fft(out, axis=1), axis=1
        )
    return (np.clongdouble(1j) ** sum(alpha)) * out if out.dtype == np.clongdouble else (1j ** sum(alpha)) * out


def boundary_values(geom: Geometry, f: np.ndarray) -> np.ndarray:
    """Restrict a closed-grid spatial field to the boundary sheets (x=0, x=1)."""
    return np.stack([f[0], f[-1]])


# -- parabolicity and covering checks ----------------------------------------------

@dataclass(frozen=True)
class ConditionReport:
    passed: bool
    margin: float
    margin_b: float | None
    samples: int
    worst: dict

    def summary(self) -> str:
        parts = [f"margin={self.margin:.3e}"]
        if self.margin_b is not None:
            parts.append(f"margin_b={self.margin_b:.3e}")
        return ("PASS " if self.passed else "FAIL ") + " ".join(parts)


def _principal_symbol(p: ParabolicProblem, spatial_pts, t, xi) -> np.ndarray:
    """sum over |alpha|=2 of a_alpha(x,t) xi^alpha, vectorized over samples."""
    n = p.n
    total = np.zeros(np.broadcast_shapes(t.shape, xi.shape[:-1]), dtype=complex)
    for alpha, coeff in p.a_coeffs.items():
        if sum(alpha) != 2:
            continue
        vals = np.asarray(coeff.evaluator(*spatial_pts, t), dtype=complex)
        mono = np.ones(xi.shape[:-1])
        for j in range(n):
            if alpha[j]:
                mono = mono * xi[..., j] ** alpha[j]
        total = total + vals * mono
    return total


def _sample_cylinder(p: ParabolicProblem, m: int, rng) -> tuple:
    if isinstance(p.geometry, IntervalGeometry):
        pts = (rng.uniform(0.0, 1.0, m),)
    else:
        pts = (rng.uniform(0.0, 1.0, m), rng.uniform(0.0, p.geometry.period_y, m))
    t = rng.uniform(0.0, p.tau, m)
    return pts, t


def check_petrovskii(p: ParabolicProblem, samples: int = 2000, seed: int = 0) -> ConditionReport:
    """Sampled Petrovskii-parabolicity margin.

    Over random (x, t) in the closed cylinder and xi on the unit sphere, the
    modulus |p0 + sum a_alpha xi^alpha| is minimized over the half-plane
    Re p0 >= 0 in closed form (the minimizer is included among the sampled
    p0), so the reported margin is exact per sampled (x, t, xi).  PASS
    requires margin > 1e-9.
    """
    if samples < 1000:
        raise ValueError("need at least 1e3 samples")
    rng = np.random.default_rng(seed)
    pts, t = _sample_cylinder(p, samples, rng)
    if p.n == 1:
        xi = rng.choice([-1.0, 1.0], size=(samples, 1))
    else:
        ang = rng.uniform(0, 2 * np.pi, samples)
        xi = np.column_stack([np.cos(ang), np.sin(ang)])
    q = _principal_symbol(p, pts, t, xi)
    # min over Re p0 >= 0 of |p0 + q| is max(Re q, 0)
    margins = np.maximum(np.real(q), 0.0)
    # a few random p0 draws keep the reported margin a genuine sample minimum
    radius = 1.0 + float(np.max(np.abs(q)))
    pr = rng.uniform(0, radius, samples) * np.exp(
        1j * rng.uniform(-np.pi / 2, np.pi / 2, samples)
    )
    margins = np.minimum(margins, np.abs(pr + q))
    i = int(np.argmin(margins))
    worst = {
        "x": tuple(float(c[i]) for c in pts),
        "t": float(t[i]),
        "xi": tuple(float(v) for v in xi[i]),
        "symbol": complex(q[i]),
    }
    margin = float(margins[i])
    return ConditionReport(
        passed=margin > 1e-9, margin=margin, margin_b=None, samples=samples, worst=worst
    )


def check_covering(p: ParabolicProblem, samples: int = 2000, seed: int = 0) -> ConditionReport:
    """Sampled boundary-covering margins (parts a and b).

    Part a: |sum b_j nu_j| bounded away from zero on the lateral boundary.
    Part b: the ratio zeta built from the tangential component is not a root
    of the principal polynomial in the normal direction.  For real b the
    second part follows from parabolicity; the check confirms it numerically.
    """
    if not isinstance(p.boundary, FirstOrder):
        raise NotFirstOrder("covering check requires a first-order boundary operator")
    if samples < 1000:
        raise ValueError("need at least 1e3 samples")
    rng = np.random.default_rng(seed)
    n = p.n
    m = samples
    sheet = rng.integers(0, 2, m)
    xb = sheet.astype(float)  # x = 0 or 1
    t = rng.uniform(0.0, p.tau, m)
    # deterministic extremes: pure-p samples (w = 0) and pure-eta samples
    # (w = 1, p = 0, admissible since |eta| + |p| = 1) on both sheets
    extremes = np.array([0.0, 0.5, 1.0])
    n_extra = 2 * len(extremes)
    sheet = np.concatenate([sheet, np.repeat([0, 1], len(extremes))])
    xb = sheet.astype(float)
    t = np.concatenate([t, np.zeros(n_extra)])
    m_tot = m + n_extra
    if n == 1:
        spatial = (xb,)
        nu = _sign_column(sheet)[:, None] * np.ones((m_tot, 1))
        eta = np.zeros((m_tot, 1))
    else:
        y = np.concatenate([rng.uniform(0.0, p.geometry.period_y, m), np.zeros(n_extra)])
        spatial = (xb, y)
        nu = np.column_stack([_sign_column(sheet), np.zeros(m_tot)])
        w = np.concatenate([rng.uniform(0.0, 1.0, m), np.tile(extremes, 2)])
        signs = np.concatenate([rng.choice([-1.0, 1.0], m), np.ones(n_extra)])
        eta = np.column_stack([np.zeros(m_tot), w * signs])
    m = m_tot
    b_vals = [
        np.asarray(p.boundary.coeff(j).evaluator(*spatial, t), dtype=complex)
        + np.zeros(m, dtype=complex)
        for j in range(n + 1)
    ]
    b_vec = np.column_stack(b_vals[1:])
    b_nu = np.sum(b_vec * nu, axis=1)
    margin_a = float(np.min(np.abs(b_nu)))
    ia = int(np.argmin(np.abs(b_nu)))

    eta_norm = np.linalg.norm(eta, axis=1)
    p_mod = 1.0 - eta_norm  # |eta| + |p0| = 1 sampling
    p0 = p_mod * np.exp(1j * rng.uniform(-np.pi / 2, np.pi / 2, m))
    ok = np.abs(b_nu) > 1e-12 * (1.0 + np.abs(np.sum(b_vec * eta, axis=1)))
    zeta = np.zeros(m, dtype=complex)
    zeta[ok] = -np.sum(b_vec * eta, axis=1)[ok] / b_nu[ok]
    direction = eta.astype(complex) + zeta[:, None] * nu
    poly = p0 + _principal_symbol(p, spatial, t, direction)
    vals_b = np.abs(poly[ok])
    margin_b = float(np.min(vals_b)) if vals_b.size else float("nan")
    passed = margin_a > 1e-9 and (not vals_b.size or margin_b > 1e-9)
    worst = {
        "x": tuple(float(c[ia]) for c in spatial),
        "t": float(t[ia]),
        "b_nu": complex(b_nu[ia]),
    }
    return ConditionReport(
        passed=passed, margin=margin_a, margin_b=margin_b, samples=samples, worst=worst
    )


def _sign_column(sheet: np.ndarray) -> np.ndarray:
    return np.where(sheet == 0, 1.0, -1.0)


# -- compatibility counting ---------------------------------------------------------

def compat_count(s: float, l: int) -> int:
    """Number of compatibility conditions at smoothness s (2 < s)."""
    if s <= 2:
        raise ValueError("the compatibility calculus requires s > 2")
    if l not in (0, 1):
        raise ValueError("l must be 0 (Dirichlet) or 1 (first-order)")
    m = s / 2.0 - (0.75 if l == 0 else 1.25)
    if m <= 0:
        return 0
    return int(math.ceil(m))


def in_E(s: float, l: int) -> bool:
    """Exact membership in the jump set {2r + 3/2} (l=0) or {2r + 1/2} (l=1), r >= 1."""
    offset = 1.5 if l == 0 else 0.5
    r = (s - offset) / 2.0
    return r >= 1.0 and r == math.floor(r)


def continuity_intervals(l: int, r_max: int = 8) -> list[tuple[float, float]]:
    """Open intervals of s on which the condition count is constant."""
    if l == 0:
        out = [(2.0, 3.5)]
        out += [(2 * r - 0.5, 2 * r + 1.5) for r in range(2, r_max + 1)]
    else:
        out = [(2.0, 2.5)]
        out += [(2 * r + 0.5, 2 * r + 2.5) for r in range(1, r_max + 1)]
    return out


# -- the v_k recurrence ---------------------------------------------------------------

def _omega_shape(geom: Geometry, nt: int) -> tuple[int, ...]:
    return geom.g_shape() + (nt + 1,)


def compute_v(
    p: ParabolicProblem,
    f: np.ndarray,
    h: np.ndarray,
    k_max: int,
    acc_t: int = 8,
    acc_x: int = 8,
) -> list[np.ndarray]:
    """Initial time-derivative functions v_0..v_k_max on the spatial grid.

    v_0 = h and, for k >= 1,

        v_k = - sum_alpha sum_{q<k} C(k-1, q) (dt^(k-1-q) a_alpha)(., 0)
              D^alpha v_q + dt^(k-1) f(., 0).

    Time traces of f use one-sided differences of order ``acc_t``; spatial
    derivatives use order-``acc_x`` differences along x and exact spectral
    differentiation along the periodic axis.
    """
    geom = p.geometry
    f = np.asarray(f)
    h = np.asarray(h)
    extended = f.dtype in (np.longdouble, np.clongdouble) or h.dtype in (
        np.longdouble, np.clongdouble
    )
    work = np.clongdouble if extended else complex
    f = f.astype(work)
    h = h.astype(work)
    if f.shape[: len(geom.g_shape())] != geom.g_shape() or f.ndim != len(geom.g_shape()) + 1:
        raise DimensionMismatch(
            f"f must live on the closed cylinder grid {_omega_shape(geom, 0)[:-1]} x (nt+1)"
        )
    if h.shape != geom.g_shape():
        raise DimensionMismatch("h must live on the closed spatial grid")
    nt = f.shape[-1] - 1
    dt = p.tau / nt
    if k_max >= 1 and nt + 1 < (k_max - 1) + acc_t:
        raise InsufficientSmoothness(
            f"time grid with {nt + 1} levels cannot produce {k_max - 1} trace derivatives"
        )
    f_traces = [
        trace_deriv_at_zero(f, f.ndim - 1, dt, q, acc_t) for q in range(max(k_max, 1))
    ]
    a_derivs: dict = {}
    for alpha, coeff in p.a_coeffs.items():
        a_derivs[alpha] = [
            coeff.dt_on_G(geom, q, p.tau) for q in range(max(k_max, 1))
        ]
    v = [h]
    for k in range(1, k_max + 1):
        acc = np.zeros(geom.g_shape(), dtype=work)
        for alpha in p.a_coeffs:
            for q in range(k):
                w = math.comb(k - 1, q)
                acc += w * a_derivs[alpha][k - 1 - q] * apply_D_alpha(
                    geom, v[q], alpha, acc_x
                )
        v.append(-acc + f_traces[k - 1])
    return v


def apply_boundary_recurrence(
    p: ParabolicProblem, v: Sequence[np.ndarray], k: int, acc_x: int = 8
) -> np.ndarray:
    """B_k[v_0..v_k] on the boundary sheets for a first-order boundary operator.

    B_k = sum_{q<=k} C(k,q) [ sum_j (dt^(k-q) b_j)(.,0) D_j v_q
                              + (dt^(k-q) b_0)(.,0) v_q ], restricted to the
    boundary; the x-normal component flips sign between the two sheets only
    through nu entering D_1 values, which are taken as one-sided traces.
    """
    if not isinstance(p.boundary, FirstOrder):
        raise NotFirstOrder("B_k requires a first-order boundary operator")
    geom = p.geometry
    n = p.n
    out = None
    for q in range(k + 1):
        c = math.comb(k, q)
        term = np.zeros((2,) + geom.g_shape()[1:], dtype=complex)
        for j in range(1, n + 1):
            bj = p.boundary.coeff(j).dt_on_G(geom, k - q, p.tau)
            alpha = tuple(1 if i == j - 1 else 0 for i in range(n))
            dv = apply_D_alpha(geom, v[q], alpha, acc_x)
            term += boundary_values(geom, bj) * boundary_values(geom, dv)
        b0 = p.boundary.coeff(0).dt_on_G(geom, k - q, p.tau)
        term += boundary_values(geom, b0) * boundary_values(geom, v[q])
        out = term * c if out is None else out + c * term
    return out


# -- compatibility residuals -----------------------------------------------------------

@dataclass
class CompatibilityReport:
    s: float
    l: int
    count: int
    count_above: int
    at_jump: bool
    residuals: list[float]
    residual_orders: list[float]
    v_funcs: list[np.ndarray] = field(repr=False)
    tol: float = 1e-8
    trace_acc: int = 8

    @property
    def passed(self) -> bool:
        return all(r < self.tol for r in self.residuals[: self.count])

    def to_dict(self) -> dict:
        return {
            "s": self.s,
            "l": self.l,
            "count": self.count,
            "count_above": self.count_above,
            "at_jump": self.at_jump,
            "residuals": self.residuals,
            "residual_orders": self.residual_orders,
            "passed": self.passed,
            "tol": self.tol,
            "trace_accuracy": self.trace_acc,
        }


def gamma_norm(
    geom: Geometry, vals: np.ndarray, sigma: float, phi: FunctionParam | None = None
) -> float:
    """Boundary-space norm of a field on the two boundary sheets.

    Interval boundaries are two points, so every order gives phi(1) times the
    plain Euclidean norm; strip boundaries are two circles measured in the
    isotropic multiplier norm of order sigma.
    """
    phi = phi if phi is not None else constant()
    vals = np.asarray(vals, dtype=complex)
    if isinstance(geom, IntervalGeometry):
        return float(phi(1.0) * np.linalg.norm(vals))
    total = 0.0
    lat = Lattice(sizes=(geom.ny,), periods=(geom.period_y,))
    idx = isotropic(sigma, phi, dimension=1)
    mu = lat.weight(idx)
    for sheet in range(2):
        coeffs = np.fft.fft(vals[sheet], norm="ortho")
        total += float(np.sum((mu * np.abs(coeffs)) ** 2))
    return math.sqrt(total)


def check_compatibility(
    p: ParabolicProblem,
    f: np.ndarray,
    g: np.ndarray,
    h: np.ndarray,
    s: float,
    tol: float = 1e-8,
    acc_t: int = 8,
    acc_x: int = 8,
) -> CompatibilityReport:
    """Residuals of the compatibility conditions at smoothness s.

    For the Dirichlet problem the k-th condition is dt^k g(.,0) = v_k on the
    boundary; for a first-order boundary operator the right side is
    B_k[v_0..v_k].  Residual k is measured in the boundary norm of order
    s - 3/2 - 2k (respectively s - 5/2 - 2k) with trivial weight factor.  At
    a jump point both adjacent counts are evaluated and flagged.
    """
    geom = p.geometry
    l = p.order_l
    if s <= 2:
        raise ValueError("compatibility checks require s > 2")
    at_jump = in_E(s, l)
    count = compat_count(s, l)
    count_above = compat_count(s + 1e-9, l) if at_jump else count
    n_eval = count_above if at_jump else count
    g = np.asarray(g, dtype=complex)
    expected_g = (2,) + geom.g_shape()[1:]
    if g.shape[:-1] != expected_g:
        raise DimensionMismatch(f"g must have shape {expected_g} x (nt+1)")
    nt_g = g.shape[-1] - 1
    dt_g = p.tau / nt_g

    v = compute_v(p, f, h, max(n_eval - 1, 0), acc_t, acc_x)
    residuals: list[float] = []
    orders: list[float] = []
    for k in range(n_eval):
        lhs = trace_deriv_at_zero(g, g.ndim - 1, dt_g, k, acc_t)
        if l == 0:
            rhs = boundary_values(geom, v[k])
            order = s - 1.5 - 2 * k
        else:
            rhs = apply_boundary_recurrence(p, v, k, acc_x)
            order = s - 2.5 - 2 * k
        residuals.append(gamma_norm(geom, lhs - rhs, order))
        orders.append(order)
    return CompatibilityReport(
        s=s, l=l, count=count, count_above=count_above, at_jump=at_jump,
        residuals=residuals, residual_orders=orders, v_funcs=v, tol=tol,
        trace_acc=acc_t,
    )


# -- target norms ------------------------------------------------------------------------

def omega_domain(geom: Geometry, tau: float, nt: int) -> SubdomainMask:
    """The closed cylinder grid embedded in a doubled periodic box."""
    if isinstance(geom, IntervalGeometry):
        lat = Lattice(sizes=(2 * geom.nx, 2 * nt), periods=(2.0, 2.0 * tau))
        mask = np.zeros(lat.sizes, dtype=bool)
        mask[: geom.nx + 1, : nt + 1] = True
    else:
        lat = Lattice(
            sizes=(2 * geom.nx, geom.ny, 2 * nt),
            periods=(2.0, geom.period_y, 2.0 * tau),
        )
        mask = np.zeros(lat.sizes, dtype=bool)
        mask[: geom.nx + 1, :, : nt + 1] = True
    return SubdomainMask(lat, mask)


def lateral_domain(geom: Geometry, tau: float, nt: int) -> SubdomainMask:
    """One boundary sheet of the lateral boundary, time-padded."""
    if isinstance(geom, IntervalGeometry):
        lat = Lattice(sizes=(2 * nt,), periods=(2.0 * tau,))
        mask = np.zeros(lat.sizes, dtype=bool)
        mask[: nt + 1] = True
    else:
        lat = Lattice(sizes=(geom.ny, 2 * nt), periods=(geom.period_y, 2.0 * tau))
        mask = np.zeros(lat.sizes, dtype=bool)
        mask[:, : nt + 1] = True
    return SubdomainMask(lat, mask)


def spatial_domain(geom: Geometry) -> SubdomainMask:
    """The closed spatial domain embedded in an x-doubled periodic box."""
    if isinstance(geom, IntervalGeometry):
        lat = Lattice(sizes=(2 * geom.nx,), periods=(2.0,))
        mask = np.zeros(lat.sizes, dtype=bool)
        mask[: geom.nx + 1] = True
    else:
        lat = Lattice(sizes=(2 * geom.nx, geom.ny), periods=(2.0, geom.period_y))
        mask = np.zeros(lat.sizes, dtype=bool)
        mask[: geom.nx + 1, :] = True
    return SubdomainMask(lat, mask)


_CG_SPREAD_CAP = 1e8


def _measure_factor(lat: Lattice) -> float:
    """Converts unitary-DFT sample norms to integral (Fourier-series) norms.

    Multiplying a lattice multiplier norm by sqrt(|box| / #points) makes it a
    Riemann approximation of the continuum integral norm, so the three data
    components combine with resolution-independent relative weights.
    """
    return math.sqrt(float(np.prod(lat.periods)) / lat.npoints)


def quotient_auto(
    idx: RegularityIndex,
    data: np.ndarray,
    mask: SubdomainMask,
    tol: float = 1e-8,
) -> float:
    """Quotient norm via CG for mild weight spreads, direct factorization otherwise."""
    mu = mask.lattice.weight(idx)
    spread = float((np.max(mu) / np.min(mu)) ** 2)
    if spread <= _CG_SPREAD_CAP:
        return spectra.quotient_norm(idx, data, mask, tol=tol)
    return spectra.quotient_norm_direct(idx, data, mask)


@dataclass(frozen=True)
class TargetNormBreakdown:
    interior: float
    lateral: float
    initial: float

    @property
    def total(self) -> float:
        return math.sqrt(self.interior**2 + self.lateral**2 + self.initial**2)


def _component_indices(
    geom: Geometry, s: float, l: int, phi: FunctionParam
) -> tuple[RegularityIndex, RegularityIndex, RegularityIndex]:
    k_omega = geom.spatial_dim + 1
    sigma_s = s - 0.5 - l  # s - 1/2 (Dirichlet) or s - 3/2 (first order)
    idx_f = parabolic_split(s - 2.0, phi, dimension=k_omega)
    idx_g = parabolic_split(sigma_s, phi, dimension=k_omega - 1)
    idx_h = isotropic(s - 1.0, phi, dimension=geom.spatial_dim)
    return idx_f, idx_g, idx_h


def target_norm_batch(
    p: ParabolicProblem,
    datas: list[tuple[np.ndarray, np.ndarray, np.ndarray]],
    s: float,
    phi: FunctionParam | None = None,
    nt: int | None = None,
) -> list[TargetNormBreakdown]:
    """Three-component target norms for a batch of (f, g, h) data triples.

    The interior component measures f in the anisotropic quotient norm of
    order s-2 over the cylinder; the lateral component measures g at order
    s-1/2 (Dirichlet) or s-3/2 (first order) summed over the two boundary
    sheets; the initial component measures h isotropically at order s-1.
    All quotient solves share factorizations across the batch.
    """
    phi = phi if phi is not None else constant()
    geom = p.geometry
    if s <= 2:
        raise ValueError("target norms are defined for s > 2")
    f0, g0, h0 = datas[0]
    nt = f0.shape[-1] - 1 if nt is None else nt
    l = p.order_l
    idx_f, idx_g, idx_h = _component_indices(geom, s, l, phi)

    om = omega_domain(geom, p.tau, nt)
    lateral = lateral_domain(geom, p.tau, nt)
    spat = spatial_domain(geom)

    f_vals = spectra.quotient_norm_batch(
        idx_f, [np.asarray(f).reshape(-1) for f, _, _ in datas], om
    ) * _measure_factor(om.lattice)
    g_sheets = []
    for sheet in range(2):
        g_sheets.append(
            spectra.quotient_norm_batch(
                idx_g, [np.asarray(g)[sheet].reshape(-1) for _, g, _ in datas], lateral
            )
        )
    g_vals = np.sqrt(g_sheets[0] ** 2 + g_sheets[1] ** 2) * _measure_factor(lateral.lattice)
    h_vals = spectra.quotient_norm_batch(
        idx_h, [np.asarray(h).reshape(-1) for _, _, h in datas], spat
    ) * _measure_factor(spat.lattice)
    return [
        TargetNormBreakdown(interior=float(fv), lateral=float(gv), initial=float(hv))
        for fv, gv, hv in zip(f_vals, g_vals, h_vals)
    ]


def target_norm(
    p: ParabolicProblem,
    f: np.ndarray,
    g: np.ndarray,
    h: np.ndarray,
    s: float,
    phi: FunctionParam | None = None,
) -> float:
    """l2 combination of the three component norms of one data triple."""
    return target_norm_batch(p, [(f, g, h)], s, phi)[0].total
