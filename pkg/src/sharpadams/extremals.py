"""Concentrating sequences that saturate the Adams exponent.

``v_j`` has a polynomial plateau on ``|x| <= j^{-1/n}``, the logarithmic
profile ``-c ln|x|`` up to ``|x| = 1`` and a polynomial connector ``xi_j`` on
``[1, 2]``. Adding a weak limit ``v`` that is constant on ``B_2`` gives the
unit-norm sequence ``u_j = v + (1 - alpha^{n/m})^{m/n} v_j / ||nabla^m v_j||``,
whose exponential integral at the improved multiplier grows without bound.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import interpolate, optimize

from ._numerics import radial_grid
from .constants import SobolevParams, beta_nm, omega_n
from .functionals import FunctionalReport, adams_functional_ball
from .radial_solver import grad_m_norm
from .rearrangement import RadialProfile

__all__ = [
    "ConnectorPoly",
    "ExtremalSpec",
    "SweepReport",
    "DEFAULT_J_LIST",
    "DOMAIN_RADIUS",
    "log_slope",
    "build_connector",
    "moser_adams_values",
    "build_moser_adams",
    "weak_limit_bump",
    "normalized_sequence",
    "divergence_sweep",
    "lower_bound_model",
    "fit_lower_bound",
]

DOMAIN_RADIUS = 4.0
BUMP_OUTER = 3.5
DEFAULT_J_LIST = tuple(2 ** e for e in range(3, 13))
ILL_CONDITIONED_ORDER = 6


def log_slope(p: SobolevParams, j: float) -> float:
    """Coefficient ``n beta^{m/n-1} (ln j)^{-m/n}`` of ``-ln|x|`` in ``v_j``."""
    if j < 2:
        raise ValueError("j must be >= 2")
    n, m = p.n, p.m
    return n * beta_nm(p) ** (m / n - 1.0) * math.log(j) ** (-m / n)


@dataclass(frozen=True)
class ConnectorPoly:
    """Polynomial ``xi_j`` on ``[1, 2]`` in Bernstein form.

    ``left`` and ``right`` hold the prescribed jets ``(xi, xi', ...)`` at
    ``r = 1`` and ``r = 2``.
    """

    params: SobolevParams
    j: float
    left: tuple
    right: tuple
    poly: interpolate.BPoly = field(repr=False, compare=False)
    ill_conditioned: bool = False

    @property
    def degree(self) -> int:
        return len(self.left) + len(self.right) - 1

    def __call__(self, r, nu: int = 0):
        r = np.asarray(r, dtype=float)
        return self.poly(r, nu) if nu else self.poly(r)

    def sup(self, nu: int = 0, samples: int = 2001) -> float:
        r = np.linspace(1.0, 2.0, samples)
        return float(np.max(np.abs(self(r, nu))))


def build_connector(p: SobolevParams, j: float, match_log_branch: bool = True) -> ConnectorPoly:
    """Minimal-degree Hermite connector on ``[1, 2]``.

    With ``match_log_branch`` (default) the jet at ``r = 1`` is that of the
    logarithmic branch up to order ``m``, so ``v_j`` is ``C^m`` there and the
    degree is ``2m + 1``. Otherwise the literal boundary conditions
    ``xi^(l)(1) = (-1)^l (l-1)! beta^{m/n-1} (ln j)^{-m/n}``, ``l < m``, are used
    (degree ``2m - 1``); these differ from the log branch by the factor ``n``.
    """
    if j < 2:
        raise ValueError("j must be >= 2")
    n, m = p.n, p.m
    if match_log_branch:
        c, top = log_slope(p, j), m
    else:
        c, top = beta_nm(p) ** (m / n - 1.0) * math.log(j) ** (-m / n), m - 1
    left = [0.0] + [c * (-1) ** l * math.factorial(l - 1) for l in range(1, top + 1)]
    right = [0.0] * (top + 1)
    poly = interpolate.BPoly.from_derivatives([1.0, 2.0], [left, right])
    return ConnectorPoly(p, j, tuple(left), tuple(right), poly, ill_conditioned=m >= ILL_CONDITIONED_ORDER)


def moser_adams_values(p: SobolevParams, j: float, r, connector: ConnectorPoly | None = None) -> np.ndarray:
    """``v_j(r)``, evaluated branch by branch."""
    n, m = p.n, p.m
    r = np.asarray(r, dtype=float)
    L = math.log(j)
    c = log_slope(p, j)
    xi = build_connector(p, j) if connector is None else connector
    seam = j ** (-1.0 / n)
    w = 1.0 - j ** (2.0 / n) * r ** 2
    plateau = (L / beta_nm(p)) ** (1.0 - m / n) + 0.5 * c * sum(w ** l / l for l in range(1, m))
    with np.errstate(divide="ignore"):
        middle = -c * np.log(r)
    outer = np.where((r >= 1.0) & (r <= 2.0), xi(np.clip(r, 1.0, 2.0)), 0.0)
    return np.where(r <= seam, plateau, np.where(r < 1.0, middle, outer))


def build_moser_adams(p: SobolevParams, j: float, radii=None, R: float = DOMAIN_RADIUS,
                      n_nodes: int = 4096) -> RadialProfile:
    """``v_j`` sampled on a graded grid of ``B_R`` (``R >= 2``)."""
    radii = radial_grid(R, n_nodes, r_switch=1.0) if radii is None else np.asarray(radii, dtype=float)
    if radii[-1] < 2.0:
        raise ValueError("the grid must cover B_2")
    vals = moser_adams_values(p, j, radii)
    vals[-1] = 0.0
    return RadialProfile(p.n, radii, vals, dirichlet=True)


def _smoothstep(x):
    """C-infinity step: 0 for x <= 0, 1 for x >= 1."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(x > 0, np.exp(-1.0 / np.where(x > 0, x, 1.0)), 0.0)
        b = np.where(x < 1, np.exp(-1.0 / np.where(x < 1, 1.0 - x, 1.0)), 0.0)
    return a / (a + b)


def weak_limit_bump(p: SobolevParams, alpha: float, radii, outer: float = BUMP_OUTER) -> RadialProfile:
    """Radial ``v`` equal to a constant ``A`` on ``B_2``, vanishing beyond ``outer``,
    with ``||nabla^m v||_{n/m} = alpha``.

    The norm is 1-homogeneous, so the unit-height bump is measured once and
    rescaled.
    """
    if not 0.0 <= alpha < 1.0:
        raise ValueError("alpha must lie in [0, 1)")
    radii = np.asarray(radii, dtype=float)
    if not 2.0 < outer < radii[-1]:
        raise ValueError("need 2 < outer < R")
    shape = _smoothstep((outer - radii) / (outer - 2.0))
    unit = RadialProfile(p.n, radii, shape, dirichlet=True)
    if alpha == 0.0:
        return unit.with_values(np.zeros_like(radii))
    return unit.with_values(shape * (alpha / grad_m_norm(unit, p)))


@dataclass(frozen=True)
class ExtremalSpec:
    params: SobolevParams
    j: float
    alpha: float
    base_profile: RadialProfile = field(repr=False)
    connector: ConnectorPoly = field(repr=False)

    def __post_init__(self):
        if self.j < 2:
            raise ValueError("j must be >= 2")
        if not 0.0 <= self.alpha < 1.0:
            raise ValueError("alpha must lie in [0, 1)")

    @property
    def height(self) -> float:
        """Value ``A`` of the weak limit on ``B_2``."""
        return float(self.base_profile.values[0])


def normalized_sequence(p: SobolevParams, j: float, alpha: float, v: RadialProfile | None = None,
                        R: float = DOMAIN_RADIUS, n_nodes: int = 4096) -> tuple[RadialProfile, dict]:
    """``u_j`` together with the norms used to build it."""
    vj = build_moser_adams(p, j, None if v is None else v.radii, R=R, n_nodes=n_nodes)
    if v is None:
        v = weak_limit_bump(p, alpha, vj.radii)
    elif not np.array_equal(v.radii, vj.radii):
        raise ValueError("weak limit must live on the extremal grid")
    norm_vj = grad_m_norm(vj, p)
    share = (1.0 - alpha ** p.p) ** (1.0 / p.p)
    u = vj.with_values(v.values + share * vj.values / norm_vj)
    return u, {"norm_vj": norm_vj, "share": share, "height": float(v.values[0]), "v": v}


@dataclass(frozen=True)
class SweepReport:
    j: int
    norm_vj: float
    norm_uj: float
    log_value: float
    diverged: bool
    multiplier: float
    center: float
    lower_bound: float
    report: FunctionalReport = field(repr=False, compare=False)

    def as_row(self) -> dict:
        return {"j": self.j, "norm": self.norm_uj, "norm_vj": self.norm_vj, "log_value": self.log_value,
                "diverged": self.diverged, "multiplier": self.multiplier,
                "lower_bound": self.lower_bound}


def lower_bound_model(log_j, C1: float, p: SobolevParams):
    """``(C1 + (ln j)^{(n-m)/n})^{n/(n-m)} - ln j``."""
    L = np.asarray(log_j, dtype=float)
    return (C1 + L ** (1.0 / p.q)) ** p.q - L


def divergence_sweep(p: SobolevParams, alpha: float, mult: float, j_list=DEFAULT_J_LIST,
                     R: float = DOMAIN_RADIUS, n_nodes: int = 4096) -> list[SweepReport]:
    """Functional of ``u_j`` at ``mult * (1 - alpha^{n/m})^{-m/(n-m)} * beta``.

    ``lower_bound`` is ``log omega_n`` plus the plateau estimate
    ``mult (C + (ln j)^{1/q} / ||nabla^m v_j||)^q - ln j`` with
    ``C = beta^{1/q} A / (1 - alpha^{n/m})^{m/n}``.
    """
    j_list = list(j_list)
    if any(b <= a for a, b in zip(j_list, j_list[1:])):
        raise ValueError("j_list must be strictly increasing")
    factor = mult * (1.0 - alpha ** p.p) ** (-p.m / (p.n - p.m))
    radii = radial_grid(R, n_nodes, r_switch=1.0)
    v = weak_limit_bump(p, alpha, radii)
    out = []
    for j in j_list:
        u, info = normalized_sequence(p, j, alpha, v)
        rep = adams_functional_ball(u, p, factor, normalize=False, norm_budget=1.0)
        norm_u = grad_m_norm(u, p) ** p.p
        C = beta_nm(p) ** (1.0 / p.q) * info["height"] / info["share"]
        L = math.log(j)
        lb = math.log(omega_n(p.n)) + mult * (C + L ** (1.0 / p.q) / info["norm_vj"]) ** p.q - L
        out.append(SweepReport(int(j), info["norm_vj"] ** p.p, norm_u, rep.log_value, rep.overflow,
                               factor, float(u.values[0]), lb, rep))
    return out


def fit_lower_bound(reports: list[SweepReport], p: SobolevParams) -> tuple[float, float]:
    """Fit ``log_value ~ offset + lower_bound_model(ln j, C1)``; returns ``(C1, offset)``."""
    L = np.log([r.j for r in reports])
    y = np.array([r.log_value for r in reports])

    def resid(C1):
        model = lower_bound_model(L, C1, p)
        return float(np.sum((y - model - np.mean(y - model)) ** 2))

    best = optimize.minimize_scalar(resid, bounds=(0.0, 10.0), method="bounded")
    C1 = float(best.x)
    return C1, float(np.mean(y - lower_bound_model(L, C1, p)))
