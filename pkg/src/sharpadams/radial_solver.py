"""Radial Laplacians, Dirichlet inverses and higher-order gradient norms.

Inverses are computed by quadrature: the Laplace problem through the nested
integral ``u(r) = int_r^R s^{1-n} int_0^s f t^{n-1} dt ds``, the Helmholtz-type
problem ``(-Delta + I) u = f`` through its Bessel-function Green's function.
Forward operators use finite differences (see ``DerivativeLattice``).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from ._numerics import derivative_lattice, fd_matrix
from .constants import SobolevParams, omega_n
from .rearrangement import RadialProfile, lp_norm

__all__ = [
    "CoarseGridError",
    "RadialOperatorSpec",
    "radial_laplacian",
    "radial_derivative",
    "gradient_m",
    "apply_operator",
    "solve_dirichlet_laplace",
    "solve_polyharmonic",
    "solve_helmholtz_like",
    "grad_m_norm",
    "full_norm",
    "ruf_norm",
]

MIN_NODES = 256
MAX_HELMHOLTZ_RADIUS = 300.0


class CoarseGridError(ValueError):
    """Raised when a profile has too few nodes for stencil operations."""


@dataclass(frozen=True)
class RadialOperatorSpec:
    """``(-Delta)^k`` (``kind='laplace'``) or ``(-Delta + I)^k`` on ``B_R``."""

    kind: str
    k: int
    R: float

    def __post_init__(self):
        if self.kind not in ("laplace", "laplace_plus_identity"):
            raise ValueError(f"unknown operator kind {self.kind!r}")
        if self.k < 1:
            raise ValueError("power k must be >= 1")
        if not self.R > 0:
            raise ValueError("domain radius must be positive")


def _check(u: RadialProfile):
    if u.piecewise_constant:
        raise TypeError("stencil operators need a smooth profile")
    if u.radii.size < MIN_NODES:
        raise CoarseGridError(f"need at least {MIN_NODES} nodes, got {u.radii.size}")


def _lattice_laplacian(u: RadialProfile, times: int):
    lat = derivative_lattice(u.radii)
    w = lat.sample(1) @ u.values
    lap = lat.laplacian(u.n)
    for _ in range(times):
        w = lap @ w
    return lat, w


def radial_laplacian(u: RadialProfile, times: int = 1) -> RadialProfile:
    """``Delta^times u`` at the nodes of ``u``."""
    _check(u)
    lat, w = _lattice_laplacian(u, times)
    return u.with_values(lat.back(1) @ w, dirichlet=False)


def radial_derivative(u: RadialProfile) -> RadialProfile:
    """``u'(r)`` by five-point stencils on the native grid (odd in r)."""
    _check(u)
    return u.with_values(fd_matrix(u.radii, 1, parity=1) @ u.values, dirichlet=False)


def gradient_m(u: RadialProfile, m: int) -> tuple[RadialProfile, int]:
    """``Delta^{m/2} u`` (m even) or ``d/dr Delta^{(m-1)/2} u`` (m odd).

    Returns the profile together with its parity in r.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    _check(u)
    if m == 1:
        return radial_derivative(u), -1
    lat, w = _lattice_laplacian(u, m // 2)
    if m % 2 == 0:
        return u.with_values(lat.back(1) @ w, dirichlet=False), 1
    return u.with_values(lat.back(-1) @ (lat.d1() @ w), dirichlet=False), -1


def apply_operator(u: RadialProfile, spec: RadialOperatorSpec) -> RadialProfile:
    """Apply ``(-Delta)^k`` or ``(-Delta + I)^k`` by stencil."""
    _check(u)
    lat = derivative_lattice(u.radii)
    w = lat.sample(1) @ u.values
    lap = lat.laplacian(u.n)
    shift = 1.0 if spec.kind == "laplace_plus_identity" else 0.0
    for _ in range(spec.k):
        w = shift * w - lap @ w
    return u.with_values(lat.back(1) @ w, dirichlet=False)


def _moment(f: RadialProfile) -> np.ndarray:
    """``int_0^r f(t) t^{n-1} dt`` at every node."""
    rule = f.rule
    return rule.cumulative(rule.at_points(f.values, 1) * rule.points ** (f.n - 1))


def solve_dirichlet_laplace(f: RadialProfile) -> RadialProfile:
    """Radial solution of ``-Delta u = f`` in ``B_R`` with ``u(R) = 0``."""
    if f.piecewise_constant:
        raise TypeError("the right-hand side must be a smooth profile")
    r = f.radii
    M = _moment(f)
    # v = -u' = r^{1-n} M(r); odd in r, v(0) = 0
    v = np.zeros_like(r)
    v[1:] = M[1:] / r[1:] ** (f.n - 1)
    rule = f.rule
    head = rule.cumulative(rule.at_points(v, -1))
    u = head[-1] - head
    u[-1] = 0.0
    if not np.all(np.isfinite(u)):
        raise FloatingPointError("quadrature produced non-finite values")
    return f.with_values(u, dirichlet=True)


def solve_polyharmonic(f: RadialProfile, k: int) -> RadialProfile:
    """``(-Delta)^k u = f`` with ``u, Delta u, ..., Delta^{k-1} u`` vanishing at R."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if 2 * k >= f.n:
        raise ValueError(f"need 2k < n, got k={k}, n={f.n}")
    u = f
    for _ in range(k):
        u = solve_dirichlet_laplace(u)
    return u


def _bessel_pair(n: int, R: float, r):
    """Regular solution and the solution vanishing at R of ``-Delta y + y = 0``.

    Both are normalised so that ``r^{n-1}`` times their Wronskian is -1.
    """
    nu = 0.5 * n - 1.0
    r = np.asarray(r, dtype=float)
    ratio = special.kv(nu, R) / special.iv(nu, R)
    with np.errstate(divide="ignore", invalid="ignore"):
        scale = r ** (-nu)
        y1 = scale * special.iv(nu, r)
        y2 = scale * (special.kv(nu, r) - ratio * special.iv(nu, r))
    y1 = np.where(r == 0, 2.0 ** (-nu) / math.gamma(nu + 1.0), y1)
    return y1, y2


def solve_helmholtz_like(f: RadialProfile) -> RadialProfile:
    """Radial solution of ``-Delta u + u = f`` in ``B_R`` with ``u(R) = 0``.

    ``u(r) = y2(r) int_0^r y1 f t^{n-1} + y1(r) int_r^R y2 f t^{n-1}``.
    """
    if f.piecewise_constant:
        raise TypeError("the right-hand side must be a smooth profile")
    R, n = f.R, f.n
    if R > MAX_HELMHOLTZ_RADIUS:
        raise ValueError(f"R must be <= {MAX_HELMHOLTZ_RADIUS} for the Bessel evaluation")
    rule = f.rule
    pts = rule.points
    fp = rule.at_points(f.values, 1) * pts ** (n - 1)
    g1, g2 = _bessel_pair(n, R, pts)
    A = rule.cumulative(fp * g1)
    Bc = rule.cumulative(fp * g2)
    B = Bc[-1] - Bc
    y1, y2 = _bessel_pair(n, R, f.radii)
    u = np.empty_like(f.radii)
    u[1:] = y2[1:] * A[1:] + y1[1:] * B[1:]
    u[0] = y1[0] * B[0]
    u[-1] = 0.0
    if not np.all(np.isfinite(u)):
        raise FloatingPointError("quadrature produced non-finite values")
    return f.with_values(u, dirichlet=True)


def _lp_of(values_profile: RadialProfile, parity: int, p: float) -> float:
    rule = values_profile.rule
    n = values_profile.n
    g = rule.at_points(values_profile.values, parity)
    dens = n * omega_n(n) * rule.points ** (n - 1)
    return float(rule.panel_sums(np.abs(g) ** p * dens).sum()) ** (1.0 / p)


def grad_m_norm(u: RadialProfile, params: SobolevParams, p: float | None = None) -> float:
    """``||nabla^m u||_p`` over ``B_R``, with ``p = n/m`` by default."""
    if params.n != u.n:
        raise ValueError("profile dimension does not match params.n")
    g, parity = gradient_m(u, params.m)
    return _lp_of(g, parity, params.p if p is None else p)


def full_norm(u: RadialProfile, params: SobolevParams) -> float:
    """Norm built from powers of ``(-Delta + I)``, exponent n/m."""
    p, m = params.p, params.m
    if m >= 2:
        w = apply_operator(u, RadialOperatorSpec("laplace_plus_identity", m // 2, u.R))
    else:
        w = u
    if m % 2 == 0:
        return lp_norm(w, p)
    d = radial_derivative(w)
    return (lp_norm(w, p) ** p + _lp_of(d, -1, p) ** p) ** (1.0 / p)


def ruf_norm(u: RadialProfile, params: SobolevParams) -> float:
    """``(||u||_p^p + ||nabla^m u||_p^p)^{1/p}`` with ``p = n/m``."""
    p = params.p
    return (lp_norm(u, p) ** p + grad_m_norm(u, params) ** p) ** (1.0 / p)
