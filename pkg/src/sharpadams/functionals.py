"""Exponential functionals of Adams / Moser-Trudinger type.

Integrals of ``exp(c |u|^q)`` are accumulated in log space so that
concentrating sequences can be followed far past the double-precision
overflow threshold; ``value`` is ``inf`` there while ``log_value`` stays
finite.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .constants import SobolevParams, beta_nm, j_index, omega_n
from .rearrangement import RadialProfile, StepRearrangement, lp_norm

__all__ = [
    "FunctionalReport",
    "phi_nm",
    "log_phi_nm",
    "adams_functional_ball",
    "adams_functional_space",
    "rearranged_functional",
    "subcritical_ratio",
    "fit_subcritical_growth",
    "OVERFLOW_LOG",
]

OVERFLOW_LOG = 700.0
_SERIES_SWITCH = 0.5
_SERIES_TERMS = 30


@dataclass(frozen=True)
class FunctionalReport:
    params: SobolevParams
    exponent: float
    constant: float
    value: float
    log_value: float
    norm_budget: float | None = None
    truncated: bool = False
    overflow: bool = False
    normalized: bool = False
    tail: float = 0.0
    extra: dict = field(default_factory=dict, compare=False)

    def as_dict(self) -> dict:
        return {
            "n": self.params.n,
            "m": self.params.m,
            "exponent": self.exponent,
            "constant": self.constant,
            "value": self.value,
            "log_value": self.log_value,
            "norm_budget": self.norm_budget,
            "truncated": self.truncated,
            "overflow": self.overflow,
            "normalized": self.normalized,
            "tail": self.tail,
        }


def _series(a: int, t: np.ndarray) -> np.ndarray:
    """sum_{j >= a} t^j / j! truncated after a fixed number of terms."""
    term = t ** a / math.factorial(a)
    total = term.copy()
    for j in range(a + 1, a + _SERIES_TERMS):
        term = term * t / j
        total += term
    return total


def phi_nm(p: SobolevParams, t):
    """``e^t`` minus its Taylor polynomial of degree ``j_index - 2``."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("phi_nm is defined for t >= 0")
    a = j_index(p) - 1
    small = t < _SERIES_SWITCH
    with np.errstate(over="ignore"):
        big = np.exp(t) * special.gammainc(a, np.where(small, 1.0, t))
    out = np.where(small, _series(a, np.where(small, t, 0.0)), big)
    return float(out) if out.ndim == 0 else out


def log_phi_nm(p: SobolevParams, t):
    """``log phi_nm(t)``, finite for all ``t > 0`` (``-inf`` at 0)."""
    t = np.asarray(t, dtype=float)
    a = j_index(p) - 1
    small = t < _SERIES_SWITCH
    with np.errstate(divide="ignore"):
        s = np.log(_series(a, np.where(small, t, 0.0)))
        lg = t + np.log(special.gammainc(a, np.where(small, 1.0, t)))
    out = np.where(small, s, lg)
    return float(out) if out.ndim == 0 else out


def _log_integral(u: RadialProfile, log_integrand):
    """``log int_{B_R} exp(log_integrand(u)) dx`` and the nodal maximum."""
    n = u.n
    nodal = log_integrand(np.abs(u.values))
    if u.piecewise_constant:
        with np.errstate(divide="ignore"):
            logw = np.log(u.shell_volumes)
        terms = nodal[:-1] + logw
    else:
        rule = u.rule
        vals = np.abs(rule.at_points(u.values, 1))
        with np.errstate(divide="ignore"):
            logw = np.log(rule.weights * n * omega_n(n) * rule.points ** (n - 1))
        terms = (log_integrand(vals) + logw).ravel()
    return float(special.logsumexp(terms)), float(np.max(nodal))


def adams_functional_ball(u: RadialProfile, p: SobolevParams, mult: float = 1.0,
                          normalize: bool = True, norm_budget: float | None = None) -> FunctionalReport:
    """``(1/|B_R|) int_{B_R} exp(mult * beta(n,m) |u|^{n/(n-m)}) dx``."""
    if mult <= 0:
        raise ValueError("mult must be positive")
    if u.n != p.n:
        raise ValueError("profile dimension does not match params.n")
    c = mult * beta_nm(p)
    q = p.q
    log_val, peak = _log_integral(u, lambda a: c * a ** q)
    if normalize:
        log_val -= math.log(u.volume)
    value = math.exp(log_val) if log_val < 709.0 else math.inf
    return FunctionalReport(p, mult, c, value, log_val, norm_budget=norm_budget,
                            truncated=False, overflow=peak > OVERFLOW_LOG, normalized=normalize)


def adams_functional_space(u: RadialProfile, p: SobolevParams, mult: float = 1.0,
                           lp_mass: float | None = None,
                           norm_budget: float | None = None) -> FunctionalReport:
    """``int phi_nm(mult * beta |u|^{n/(n-m)}) dx`` over the whole space.

    The grid covers ``B_R``. If ``u(R) != 0`` the part outside is bounded via
    the radial envelope ``|u(x)| <= (omega_n |x|^n)^{-m/n} ||u||_{n/m}``:
    below the envelope level ``A`` one has ``phi(t) <= phi(A) (t/A)^{(n-m)/m}``,
    so the tail is at most a multiple of the ``L^{n/m}`` mass outside ``B_R``.
    ``lp_mass`` is ``||u||_{n/m}^{n/m}`` over the whole space; by default the
    profile is taken to vanish outside its grid.
    """
    if mult <= 0:
        raise ValueError("mult must be positive")
    c = mult * beta_nm(p)
    q, pp = p.q, p.p
    log_val, peak = _log_integral(u, lambda a: log_phi_nm(p, c * a ** q))
    inner = lp_norm(u, pp) ** pp
    tail = 0.0
    if u.values[-1] != 0.0 and lp_mass is not None and lp_mass > inner:
        level = (omega_n(u.n) * u.R ** u.n) ** (-1.0 / pp) * lp_mass ** (1.0 / pp)
        A = c * level ** q
        slope = phi_nm(p, A) / A ** ((p.n - p.m) / p.m)
        tail = slope * c ** ((p.n - p.m) / p.m) * (lp_mass - inner)
    inside = math.exp(log_val) if log_val < 709.0 else math.inf
    total = inside + tail
    log_total = math.log(total) if 0 < total < math.inf else (log_val if total else -math.inf)
    return FunctionalReport(p, mult, c, total, log_total, norm_budget=norm_budget, truncated=True,
                            overflow=peak > OVERFLOW_LOG, normalized=False, tail=tail)


def rearranged_functional(r: StepRearrangement, p: SobolevParams, mult: float = 1.0,
                          T: float | None = None, log: bool = False) -> float:
    """``int_0^T exp(mult * beta |u*(s)|^{n/(n-m)}) ds``, exact per step."""
    if mult <= 0:
        raise ValueError("mult must be positive")
    T = r.total_measure if T is None else T
    if T > r.total_measure * (1 + 1e-14):
        raise ValueError("T exceeds the support of the rearrangement")
    lengths = np.clip(np.minimum(r.breakpoints[1:], T) - r.breakpoints[:-1], 0.0, None)
    keep = lengths > 0
    c = mult * beta_nm(p)
    terms = c * r.levels[keep] ** p.q + np.log(lengths[keep])
    lv = float(special.logsumexp(terms)) if terms.size else -math.inf
    if log:
        return lv
    return math.exp(lv) if lv < 709.0 else math.inf


def subcritical_ratio(u: RadialProfile, p: SobolevParams, mult: float, grad_norm: float) -> float:
    """``int phi(mult beta |v|^q) / ||v||_{n/m}^{n/m}`` for ``v = u / grad_norm``.

    ``grad_norm`` is ``||nabla^m u||_{n/m}``, so ``v`` sits on the unit sphere.
    """
    if not 0 < mult < 1:
        raise ValueError("the subcritical regime needs 0 < mult < 1")
    v = u.with_values(u.values / grad_norm)
    rep = adams_functional_space(v, p, mult)
    return rep.value / lp_norm(v, p.p) ** p.p


def fit_subcritical_growth(mults, constants) -> tuple[float, float]:
    """Least-squares fit ``log C = a + b log(1/(1 - mult))``; returns ``(a, b)``.

    A blow-up like ``(1 - mult)^{-1}`` shows up as ``b`` close to 1.
    """
    x = -np.log1p(-np.asarray(mults, dtype=float))
    y = np.log(np.asarray(constants, dtype=float))
    b, a = np.polyfit(x, y, 1)
    return float(a), float(b)
