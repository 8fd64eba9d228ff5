"""Numerical checks of rearrangement inequalities on concrete families.

Each ``check_*`` returns an :class:`InequalityReport` whose slack follows the
convention ``RHS - LHS`` (nonnegative when the inequality holds). For
estimates with an unspecified additive constant, the smallest constant valid
for all node pairs is reported and included in the slack; such estimates pass
when that constant is finite and stable across a family.

Test families are radial, nonnegative and decreasing, so rearrangements are
exact at shell breakpoints and the comparison is free of sorting noise.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._numerics import radial_grid
from .constants import SobolevParams, c_nk, omega_n
from .radial_solver import grad_m_norm, solve_dirichlet_laplace, solve_helmholtz_like, solve_polyharmonic
from .rearrangement import (GridFunction, RadialProfile, StepRearrangement, decreasing_rearrangement,
                            lp_norm)

__all__ = [
    "InequalityReport",
    "SUITES",
    "hardy_sides",
    "maximal_weighted_integral",
    "sample_pairs",
    "shell_measures",
    "max_drawdown",
    "odd_coefficient",
    "check_hardy",
    "check_ms_inequality",
    "check_helmholtz_ms",
    "check_keypropo",
    "check_keyfull",
    "check_odd_estimate",
    "check_radial_lemma",
    "bump_family",
    "constant_stability",
    "run_suite",
]

QUAD_TOL = 1e-6
STABILITY_FACTOR = 2.0
REFINEMENT_TOL = 0.10
RADII = (1.0, 2.0, 4.0)
SUITES = ("hardy", "ms", "keypropo", "keyfull", "odd", "radial")


@dataclass(frozen=True)
class InequalityReport:
    name: str
    cases: int
    min_slack: float
    empirical_constant: float | None
    passed: bool
    tolerance: float = 0.0
    details: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "passed", bool(self.passed))
        object.__setattr__(self, "min_slack", float(self.min_slack))

    def as_dict(self) -> dict:
        return {"name": self.name, "cases": self.cases, "min_slack": self.min_slack,
                "empirical_constant": self.empirical_constant, "pass": self.passed,
                "tolerance": self.tolerance, "details": self.details}


# -- Hardy inequality for u** -------------------------------------------------

_XG, _WG = np.polynomial.legendre.leggauss(16)
_LOG_PANEL = 0.5


def _power_integral_maximal(r: StepRearrangement, p: float) -> float:
    """``int_0^inf (u**)^p`` for a step ``u*``.

    On a step ``u** = c + D/t``; each step is integrated by Gauss-Legendre in
    ``log t`` on panels of log-length <= 0.5, and the tail beyond the support
    is ``S^p t_M^{1-p} / (p - 1)`` in closed form.
    """
    t, c = r.breakpoints, r.levels
    if c.size == 0:
        return 0.0
    S = np.concatenate(([0.0], np.cumsum(r.lengths * c)))
    total = c[0] ** p * t[1]
    for i in range(1, c.size):
        a, b = math.log(t[i]), math.log(t[i + 1])
        D = S[i] - c[i] * t[i]
        k = max(1, math.ceil((b - a) / _LOG_PANEL))
        edges = np.linspace(a, b, k + 1)
        mid = 0.5 * (edges[1:] + edges[:-1])[:, None]
        half = 0.5 * (edges[1:] - edges[:-1])[:, None]
        y = mid + half * _XG
        ty = np.exp(y)
        total += float(np.sum(half * _WG * (c[i] + D / ty) ** p * ty))
    total += S[-1] ** p * t[-1] ** (1.0 - p) / (p - 1.0)
    return total


def hardy_sides(r: StepRearrangement, p: float) -> tuple[float, float]:
    """``(||u**||_p, p' ||u*||_p)``."""
    if not p > 1:
        raise ValueError("need p > 1")
    lhs = _power_integral_maximal(r, p) ** (1.0 / p)
    rhs = p / (p - 1.0) * r.power_integral(p) ** (1.0 / p)
    return lhs, rhs


def check_hardy(steps, p: float) -> InequalityReport:
    """``||u**||_{L^p(0,inf)} <= p' ||u*||_{L^p(0,inf)}`` on step functions."""
    slacks = []
    for r in steps:
        lhs, rhs = hardy_sides(r, p)
        slacks.append(rhs - lhs)
    m = min(slacks) if slacks else 0.0
    return InequalityReport(f"hardy[p={p:g}]", len(slacks), m, None, m >= 0.0, 0.0)


# -- estimates driven by u* and f** --------------------------------------------

def maximal_weighted_integral(r: StepRearrangement, t1, t2, a: float):
    """``int_{t1}^{t2} f**(s) s^{a-1} ds`` in closed form for a step ``f*``.

    On a step ``f** = c + D/s``, so each piece integrates to powers of ``s``
    (or a logarithm when ``a = 1``).
    """
    t, c = r.breakpoints, r.levels
    S = np.concatenate(([0.0], np.cumsum(r.lengths * c)))
    # per-interval coefficients, including the region beyond the support
    cc = np.concatenate((c, [0.0]))
    DD = np.concatenate((S[:-1] - c * t[:-1], [S[-1]]))

    def prim(i, x):
        with np.errstate(divide="ignore", invalid="ignore"):
            first = cc[i] * x ** a / a
            second = DD[i] * (np.log(x) if a == 1.0 else x ** (a - 1.0) / (a - 1.0))
        # D vanishes on the first step, where log / negative powers blow up at 0
        return first + np.where(DD[i] == 0.0, 0.0, second)

    edges = t[1:]
    acc = np.concatenate(([0.0], np.cumsum(prim(np.arange(edges.size), edges)
                                           - prim(np.arange(edges.size), t[:-1]))))

    def G(x):
        x = np.asarray(x, dtype=float)
        i = np.clip(np.searchsorted(t, x, side="right") - 1, 0, cc.size - 1)
        base = acc[np.minimum(i, acc.size - 1)]
        start = t[np.minimum(i, t.size - 1)]
        return base + prim(i, x) - prim(i, start)

    return G(t2) - G(t1)


def shell_measures(u: RadialProfile) -> np.ndarray:
    """``omega_n r_i^n``: the measure coordinate of every node."""
    return omega_n(u.n) * u.radii ** u.n


def sample_pairs(u: RadialProfile, count: int, rng: np.random.Generator) -> np.ndarray:
    """Node index pairs ``(i1 < i2)`` drawn log-uniformly in ``t = omega_n r^n``.

    Fractions of ``|B_R|`` are drawn first and snapped to nodes, so the
    physical ``t`` values barely move when the grid is refined. The pair
    (first positive node, last node) is always included.
    """
    t = shell_measures(u)
    top = t.size - 1
    x = np.sort(np.exp(rng.uniform(math.log(1e-6), 0.0, size=(count - 1, 2))), axis=1)
    idx = np.clip(np.searchsorted(t, x * t[-1]), 1, top)
    idx = idx[idx[:, 0] < idx[:, 1]]
    return np.vstack(([1, top], idx))


def _radial_star(u: RadialProfile) -> StepRearrangement:
    return decreasing_rearrangement(u.to_cells())


def _star_at_nodes(us: StepRearrangement, t: np.ndarray, idx: np.ndarray) -> np.ndarray:
    """``u*(t_i)`` for node indices ``i``, read off mid-cell.

    ``u*`` is constant on ``[t_i, t_{i+1})``; evaluating at ``t_i`` itself
    would be exposed to rounding in the accumulated cell measures.
    """
    nxt = np.minimum(idx + 1, t.size - 1)
    return us(np.where(idx < t.size - 1, 0.5 * (t[idx] + t[nxt]), t[idx]))


def _lhs_and_term(u: RadialProfile, f: RadialProfile, k: int, pairs: np.ndarray):
    n = u.n
    us = _radial_star(u)
    fs = _radial_star(f)
    t = shell_measures(u)
    t1, t2 = t[pairs[:, 0]], t[pairs[:, 1]]
    lhs = _star_at_nodes(us, t, pairs[:, 0]) - _star_at_nodes(us, t, pairs[:, 1])
    # c(n, 1) = 1, which also covers n = 2 where c(n, k) is otherwise undefined
    ck = 1.0 if k == 1 else c_nk(n, k)
    coef = ck / (n * omega_n(n) ** (1.0 / n)) ** (2 * k)
    term = coef * maximal_weighted_integral(fs, t1, t2, 2.0 * k / n)
    return lhs, term, float(us.levels[0])


def _ms_report(name, u, f, pairs, tol=QUAD_TOL):
    lhs, rhs, scale = _lhs_and_term(u, f, 1, pairs)
    slack = rhs - lhs
    m = float(slack.min())
    return InequalityReport(name, int(slack.size), m, None, m >= -tol * scale, tol,
                            {"scale": scale})


def check_ms_inequality(f: RadialProfile, pairs: np.ndarray) -> InequalityReport:
    """``u*(t1) - u*(t2) <= (n^2 omega_n^{2/n})^{-1} int f**(t) t^{2/n-1} dt`` for ``-Delta u = f``."""
    return _ms_report("ms", solve_dirichlet_laplace(f), f, pairs)


def check_helmholtz_ms(f: RadialProfile, pairs: np.ndarray) -> InequalityReport:
    """The same estimate for ``(-Delta + I) u = f``."""
    return _ms_report("helmholtz_ms", solve_helmholtz_like(f), f, pairs)


def max_drawdown(a) -> float:
    """``max_{i <= j} (a_i - a_j)``, which is 0 for a nondecreasing sequence."""
    a = np.asarray(a, dtype=float)
    return float(np.max(np.maximum.accumulate(a) - a)) if a.size else 0.0


def _sup_constant(us: StepRearrangement, fs: StepRearrangement, n: int, k: int) -> float:
    """Smallest ``C`` with ``u*(t1) - u*(t2) <= term(t1, t2) + C`` for all breakpoints.

    The excess is ``b(t1) - b(t2)`` with ``b = u* + coef * G`` and ``G`` the
    running kernel integral, so its supremum is the largest drawdown of ``b``.
    """
    t = us.breakpoints[:-1]
    ck = 1.0 if k == 1 else c_nk(n, k)
    coef = ck / (n * omega_n(n) ** (1.0 / n)) ** (2 * k)
    G = maximal_weighted_integral(fs, np.zeros_like(t), t, 2.0 * k / n)
    return max_drawdown(us.levels + coef * G)


def _constant_report(name, u, f, k, pairs, norm_exp):
    lhs, term, scale = _lhs_and_term(u, f, k, pairs)
    fnorm = lp_norm(f, norm_exp)
    const = _sup_constant(_radial_star(u), _radial_star(f), f.n, k) / fnorm
    # slack with the additive constant included; nonnegative by construction
    return InequalityReport(name, int(lhs.size), float((term + const * fnorm - lhs).min()), const,
                            bool(np.isfinite(const)), QUAD_TOL, {"scale": scale, "f_norm": fnorm})


def check_keypropo(f: RadialProfile, k: int, pairs: np.ndarray) -> InequalityReport:
    """Iterated-Laplacian estimate; the additive constant is reported per ``||f||_{n/2k}``."""
    u = solve_polyharmonic(f, k)
    return _constant_report(f"keypropo[k={k}]", u, f, k, pairs, f.n / (2.0 * k))


def check_keyfull(f: RadialProfile, k: int, pairs: np.ndarray) -> InequalityReport:
    """The same estimate for ``(-Delta + I)^k``."""
    if 2 * k >= f.n:
        raise ValueError(f"need 2k < n, got k={k}, n={f.n}")
    u = f
    for _ in range(k):
        u = solve_helmholtz_like(u)
    return _constant_report(f"keyfull[k={k}]", u, f, k, pairs, f.n / (2.0 * k))


def odd_coefficient(n: int, k: int) -> float:
    """``c(n, k) n^2 / (2k (n - 2k))``, the coefficient of the odd-order estimate."""
    ck = 1.0 if k == 1 else c_nk(n, k)
    return ck * n * n / (2.0 * k * (n - 2.0 * k))


def _gradient_moment(f: RadialProfile, r1, r2, k: int):
    """``int_{r1}^{r2} (-f'(r)) r^{2k} dr`` via integration by parts."""
    rule = f.rule
    fp = rule.at_points(f.values, 1)
    cum = rule.cumulative(fp * rule.points ** (2 * k - 1))
    r = f.radii
    i1 = np.searchsorted(r, r1)
    i2 = np.searchsorted(r, r2)
    v = f.values
    return v[i1] * r1 ** (2 * k) - v[i2] * r2 ** (2 * k) + 2 * k * (cum[i2] - cum[i1])


def check_odd_estimate(f: RadialProfile, k: int, pairs: np.ndarray) -> InequalityReport:
    """Odd-order estimate with ``int (-f*)'(r) r^{2k/n} dr`` under ``||nabla f||_{n/(2k+1)} <= 1``.

    ``f`` is rescaled to meet the gradient budget when needed.
    """
    n = f.n
    if 2 * k + 1 >= n:
        raise ValueError(f"need 2k + 1 < n, got k={k}, n={n}")
    q = n / (2.0 * k + 1.0)
    budget = grad_m_norm(f, SobolevParams(n, 1), p=q)
    if budget > 1.0:
        f = f.with_values(f.values / budget)
        budget = 1.0
    u = solve_polyharmonic(f, k)
    us = _radial_star(u)
    t = shell_measures(u)
    r = f.radii
    i1, i2 = pairs[:, 0], pairs[:, 1]
    lhs = _star_at_nodes(us, t, i1) - _star_at_nodes(us, t, i2)
    om = omega_n(n)
    coef = odd_coefficient(n, k) / (n * om ** (1.0 / n)) ** (2 * k) * om ** (2.0 * k / n)
    term = coef * _gradient_moment(f, r[i1], r[i2], k)
    excess = lhs - term
    # exact supremum over all node pairs, as a drawdown of u* + coef * moment(0, r)
    nodes = np.arange(r.size)
    b = _star_at_nodes(us, t, nodes) + coef * _gradient_moment(f, np.zeros_like(r), r, k)
    const = max_drawdown(b)
    return InequalityReport(f"odd[k={k}]", int(excess.size), float((const - excess).min()), const,
                            bool(np.isfinite(const)), QUAD_TOL,
                            {"scale": float(us.levels[0]), "gradient_budget": budget})


def check_radial_lemma(u: GridFunction, p: float, radii, n: int) -> InequalityReport:
    """``u#(x) <= (omega_n |x|^n)^{-1/p} ||u||_p`` at the given radii."""
    if p < 1:
        raise ValueError("need p >= 1")
    radii = np.asarray(radii, dtype=float)
    if np.any(radii <= 0):
        raise ValueError("radii must be positive")
    star = decreasing_rearrangement(u)
    t = omega_n(n) * radii ** n
    lhs = star(t)
    rhs = t ** (-1.0 / p) * lp_norm(u, p)
    slack = rhs - lhs
    m = float(slack.min()) if slack.size else 0.0
    return InequalityReport(f"radial[p={p:g}]", int(slack.size), m, None, m >= 0.0, 0.0)


# -- built-in families ---------------------------------------------------------

def bump_family(n: int, R: float = 1.0, count: int = 10, n_nodes: int = 4096,
                dilate_order: int | None = None):
    """Nonnegative radial decreasing profiles sampled on ``B_R``.

    Gaussians and compact polynomial bumps with widths between 0.15 and 0.9.
    By default the shapes do not depend on ``R``, so growing ``R``
    approximates the whole-space problem for a fixed source. With
    ``dilate_order = 2k`` the unit-ball shapes are dilated instead,
    ``f_R(x) = R^{-2k} f(x / R)``, which leaves estimates of order ``2k``
    invariant.
    """
    r = radial_grid(R, n_nodes)
    x, amp = (r / R, R ** (-float(dilate_order))) if dilate_order else (r, 1.0)
    out = []
    for i, w in enumerate(np.linspace(0.15, 0.9, count)):
        if i % 2 == 0:
            vals = np.exp(-0.5 * (x / (0.5 * w)) ** 2)
        else:
            vals = np.clip(1.0 - (x / w) ** 2, 0.0, None) ** 3
        out.append(RadialProfile(n, r, amp * vals))
    return out


def _random_steps(rng, count):
    out = []
    for _ in range(count):
        size = int(rng.integers(1, 20))
        levels = np.sort(rng.exponential(1.0, size))[::-1]
        lengths = rng.uniform(0.05, 3.0, size)
        out.append(StepRearrangement.from_lengths(lengths, levels))
    return out


def _stable(consts) -> bool:
    c = np.asarray(consts, dtype=float)
    if not np.all(np.isfinite(c)):
        return False
    if c.max() == 0.0:
        return True
    return bool(c.min() > 0 and c.max() <= STABILITY_FACTOR * c.min())


def _aggregate(name, reports):
    return InequalityReport(name, sum(r.cases for r in reports), min(r.min_slack for r in reports),
                            None, all(r.passed for r in reports), max(r.tolerance for r in reports))


def constant_stability(check, n: int, k: int, radii=RADII, shapes: int = 4, n_nodes: int = 4096,
                       seed: int = 0, dilate: bool = False, name: str | None = None) -> InequalityReport:
    """Empirical constants of ``check`` per source shape, across domain radii and one refinement.

    ``dilate`` selects the dilated source family (see :func:`bump_family`)
    instead of a fixed source on growing balls. Passes when every shape's
    constant is finite, varies by at most a factor ``STABILITY_FACTOR``
    across ``radii`` and moves by at most
    ``REFINEMENT_TOL`` (relative) when the grid is doubled.
    """
    rng = np.random.default_rng(seed)
    table = np.empty((2, shapes, len(radii)))
    reps = []
    for g, nodes in enumerate((n_nodes, 2 * n_nodes - 1)):
        for c, R in enumerate(radii):
            for s_, f in enumerate(bump_family(n, R, shapes, nodes, 2 * k if dilate else None)):
                rep = check(f, k, sample_pairs(f, 100, rng))
                reps.append(rep)
                table[g, s_, c] = rep.empirical_constant
    coarse, fine = table
    with np.errstate(divide="ignore", invalid="ignore"):
        drift = np.where(coarse == fine, 0.0, np.abs(fine / coarse - 1.0))
    across = all(_stable(row) for row in coarse)
    refined = bool(np.all(drift <= REFINEMENT_TOL))
    ok = all(r.passed for r in reps) and across and refined
    return InequalityReport(name or f"{reps[0].name.split('[')[0]}[n={n},k={k}]", sum(r.cases for r in reps),
                            min(r.min_slack for r in reps), float(coarse.max()), ok, QUAD_TOL,
                            {"constants": coarse.tolist(), "refined": fine.tolist(),
                             "max_drift": float(drift.max()), "radii": list(radii), "dilate": dilate,
                             "stable_across_radii": across, "stable_under_refinement": refined})


def run_suite(suite: str = "all", seed: int = 0, n_nodes: int = 4096) -> list[InequalityReport]:
    """Run one named suite (or all of them) on the built-in families."""
    if suite != "all" and suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}; choose from {SUITES + ('all',)}")
    rng = np.random.default_rng(seed)
    names = SUITES if suite == "all" else (suite,)
    out: list[InequalityReport] = []
    for name in names:
        if name == "hardy":
            steps = _random_steps(rng, 1000)
            out.extend(check_hardy(steps, p) for p in (1.5, 2.0, 4.0))
        elif name == "ms":
            for check, label in ((check_ms_inequality, "ms"), (check_helmholtz_ms, "helmholtz_ms")):
                reps = []
                for n in (2, 3, 4):
                    for f in [RadialProfile(n, radial_grid(1.0, n_nodes), np.ones(n_nodes))] + \
                            bump_family(n, 1.0, 10, n_nodes):
                        pairs = sample_pairs(f, 100, rng)
                        reps.append(check(f, pairs))
                out.append(_aggregate(label, reps))
        elif name == "keypropo":
            for n in (5, 6, 8):
                out.append(constant_stability(check_keypropo, n, 2, n_nodes=n_nodes, seed=seed))
        elif name == "keyfull":
            out.append(constant_stability(check_keyfull, 6, 2, n_nodes=n_nodes, seed=seed))
        elif name == "odd":
            for n, k in ((4, 1), (5, 1), (6, 2)):
                out.append(constant_stability(check_odd_estimate, n, k, n_nodes=n_nodes, seed=seed))
        elif name == "radial":
            reps = []
            for _ in range(100):
                size = int(rng.integers(1, 50))
                g = GridFunction(rng.uniform(0.01, 1.0, size), rng.normal(size=size))
                n = int(rng.integers(2, 7))
                radii = rng.uniform(0.01, 2.0, 20)
                for p in (1.0, 2.0, 3.0):
                    reps.append(check_radial_lemma(g, p, radii, n))
            out.append(_aggregate("radial", reps))
    return out
