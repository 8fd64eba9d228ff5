"""Distribution functions and rearrangements of sampled functions.

Three representations are used throughout the package:

* :class:`GridFunction` -- values on the cells of an arbitrary measurable
  partition (each cell carries its measure);
* :class:`RadialProfile` -- a radial function sampled on a radius grid;
* :class:`StepRearrangement` -- a nonincreasing step function of the
  measure variable, i.e. a discrete decreasing rearrangement.

Rearranging is a measure-weighted sort of cells, so equimeasurability holds
exactly rather than up to discretisation error.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._numerics import panel_rule, radial_grid
from .constants import omega_n

__all__ = [
    "GridFunction",
    "RadialProfile",
    "StepRearrangement",
    "radial_grid",
    "distribution_function",
    "decreasing_rearrangement",
    "maximal_function",
    "spherical_rearrangement",
    "truncate_above",
    "truncate_below",
    "lp_norm",
]


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class GridFunction:
    """Piecewise-constant function: ``values[i]`` on a cell of measure ``measures[i]``."""

    measures: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        mu = _frozen(self.measures).ravel()
        v = _frozen(self.values).ravel()
        if mu.shape != v.shape:
            raise ValueError("measures and values must have the same length")
        if np.any(mu <= 0) or not np.all(np.isfinite(mu)):
            raise ValueError("cell measures must be positive and finite")
        if not np.all(np.isfinite(v)):
            raise ValueError("values must be finite")
        object.__setattr__(self, "measures", mu)
        object.__setattr__(self, "values", v)

    @property
    def total_measure(self) -> float:
        return float(self.measures.sum())

    def with_values(self, values) -> "GridFunction":
        return GridFunction(self.measures, values)


@dataclass(frozen=True)
class RadialProfile:
    """Radial function on ``B_R`` in ``R^n`` sampled at ``radii``.

    Smooth profiles are interpolated between nodes (cubic, even in r).
    With ``piecewise_constant=True`` the profile takes ``values[i]`` on the
    shell ``r_i <= |x| < r_{i+1}``; the last value is then unused.
    """

    n: int
    radii: np.ndarray
    values: np.ndarray
    dirichlet: bool = False
    piecewise_constant: bool = False
    _rule: object = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        r = _frozen(self.radii).ravel()
        v = _frozen(self.values).ravel()
        if self.n < 1:
            raise ValueError("dimension must be positive")
        if r.shape != v.shape or r.size < 2:
            raise ValueError("radii and values must have equal length >= 2")
        if r[0] != 0.0 or np.any(np.diff(r) <= 0):
            raise ValueError("radii must start at 0 and increase strictly")
        if not np.all(np.isfinite(v)):
            raise ValueError("values must be finite")
        if self.dirichlet and v[-1] != 0.0:
            raise ValueError("a Dirichlet profile must vanish at r = R")
        object.__setattr__(self, "radii", r)
        object.__setattr__(self, "values", v)

    @property
    def R(self) -> float:
        return float(self.radii[-1])

    @property
    def volume(self) -> float:
        return omega_n(self.n) * self.R ** self.n

    @property
    def shell_volumes(self) -> np.ndarray:
        return omega_n(self.n) * np.diff(self.radii ** self.n)

    @property
    def rule(self):
        if self._rule is None:
            object.__setattr__(self, "_rule", panel_rule(self.radii))
        return self._rule

    def with_values(self, values, dirichlet: bool | None = None) -> "RadialProfile":
        return RadialProfile(self.n, self.radii, values,
                             dirichlet=self.dirichlet if dirichlet is None else dirichlet,
                             piecewise_constant=self.piecewise_constant)

    def to_cells(self) -> GridFunction:
        """Shells with the value at their inner radius."""
        return GridFunction(self.shell_volumes, self.values[:-1])

    def __call__(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        if self.piecewise_constant:
            idx = np.clip(np.searchsorted(self.radii, r, side="right") - 1, 0, len(self.radii) - 2)
            return np.where(r >= self.R, 0.0, self.values[idx])
        from ._numerics import interpolate
        return interpolate(self.radii, self.values, r)

    def integrate(self, func=None) -> float:
        """``int_{B_R} func(u(x)) dx``; ``func`` acts elementwise on values."""
        func = (lambda x: x) if func is None else func
        if self.piecewise_constant:
            return float(np.sum(self.shell_volumes * func(self.values[:-1])))
        rule = self.rule
        vals = rule.at_points(self.values, parity=1)
        dens = self.n * omega_n(self.n) * rule.points ** (self.n - 1)
        return float(rule.panel_sums(func(vals) * dens).sum())


@dataclass(frozen=True)
class StepRearrangement:
    """Right-continuous nonincreasing step function on ``[0, inf)``.

    ``levels[i]`` is the value on ``[breakpoints[i], breakpoints[i+1])``; the
    function vanishes beyond ``breakpoints[-1]``.
    """

    breakpoints: np.ndarray
    levels: np.ndarray

    def __post_init__(self):
        t = _frozen(self.breakpoints).ravel()
        c = _frozen(self.levels).ravel()
        if t.size != c.size + 1:
            raise ValueError("need len(breakpoints) == len(levels) + 1")
        if t[0] != 0.0 or np.any(np.diff(t) <= 0):
            raise ValueError("breakpoints must start at 0 and increase strictly")
        if np.any(c < 0) or np.any(np.diff(c) > 0):
            raise ValueError("levels must be nonnegative and nonincreasing")
        object.__setattr__(self, "breakpoints", t)
        object.__setattr__(self, "levels", c)

    @classmethod
    def from_lengths(cls, lengths, levels) -> "StepRearrangement":
        return cls(np.concatenate(([0.0], np.cumsum(lengths))), levels)

    @property
    def total_measure(self) -> float:
        return float(self.breakpoints[-1])

    @property
    def lengths(self) -> np.ndarray:
        return np.diff(self.breakpoints)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < 0):
            raise ValueError("u* is defined for t >= 0")
        idx = np.searchsorted(self.breakpoints, t, side="right") - 1
        inside = idx < self.levels.size
        return np.where(inside, self.levels[np.minimum(idx, self.levels.size - 1)], 0.0)

    def cumulative(self, t):
        """``int_0^t u*(s) ds``, exact."""
        t = np.asarray(t, dtype=float)
        head = np.concatenate(([0.0], np.cumsum(self.lengths * self.levels)))
        idx = np.clip(np.searchsorted(self.breakpoints, t, side="right") - 1, 0, self.levels.size)
        level = np.where(idx < self.levels.size, self.levels[np.minimum(idx, self.levels.size - 1)], 0.0)
        start = self.breakpoints[np.minimum(idx, self.levels.size)]
        return head[idx] + level * np.maximum(t - start, 0.0)

    def maximal(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t <= 0):
            raise ValueError("u** is defined for t > 0")
        return self.cumulative(t) / t

    def power_integral(self, p: float) -> float:
        """``int_0^inf u*(t)^p dt``."""
        return float(np.sum(self.lengths * self.levels ** p))

    def map_levels(self, func) -> "StepRearrangement":
        """Compose with a nondecreasing map fixing 0 (keeps the step structure)."""
        return StepRearrangement(self.breakpoints, func(self.levels))


def _cells(u):
    if isinstance(u, GridFunction):
        return u.measures, u.values
    if isinstance(u, RadialProfile):
        c = u.to_cells()
        return c.measures, c.values
    if isinstance(u, StepRearrangement):
        return u.lengths, u.levels
    raise TypeError(f"unsupported function type {type(u).__name__}")


def distribution_function(u, s):
    """Measure of ``{|u| > s}``."""
    mu, v = _cells(u)
    s = np.asarray(s, dtype=float)
    if np.any(s < 0):
        raise ValueError("s must be nonnegative")
    a = np.abs(v)
    order = np.argsort(a)
    sorted_a = a[order]
    tail = np.concatenate((np.cumsum(mu[order][::-1])[::-1], [0.0]))
    idx = np.searchsorted(sorted_a, s, side="right")
    out = tail[idx]
    return float(out) if out.ndim == 0 else out


def decreasing_rearrangement(u) -> StepRearrangement:
    """Discrete ``u*``: cells sorted by ``|value|`` with tied levels merged."""
    mu, v = _cells(u)
    a = np.abs(v)
    order = np.argsort(-a, kind="stable")
    a, mu = a[order], mu[order]
    # merge ties so that the breakpoints are the jumps of u*
    new = np.concatenate(([True], a[1:] != a[:-1]))
    starts = np.flatnonzero(new)
    lengths = np.add.reduceat(mu, starts)
    return StepRearrangement.from_lengths(lengths, a[starts])


def maximal_function(r: StepRearrangement, t):
    """``u**(t) = (1/t) int_0^t u*``, in closed form."""
    return r.maximal(t)


def spherical_rearrangement(u, n: int | None = None) -> RadialProfile:
    """Radial decreasing rearrangement on the ball of the same measure.

    The result is a piecewise-constant profile whose shells are the level
    sets of ``u*`` mapped through ``t = omega_n r^n``.
    """
    if isinstance(u, RadialProfile):
        n = u.n if n is None else n
    if n is None:
        raise ValueError("dimension n is required for grid functions")
    star = u if isinstance(u, StepRearrangement) else decreasing_rearrangement(u)
    radii = (star.breakpoints / omega_n(n)) ** (1.0 / n)
    radii[0] = 0.0
    values = np.concatenate((star.levels, [0.0]))
    return RadialProfile(n, radii, values, piecewise_constant=True)


def _map(u, func):
    if isinstance(u, (GridFunction, RadialProfile)):
        return u.with_values(func(u.values))
    if isinstance(u, StepRearrangement):
        return u.map_levels(func)
    out = func(np.asarray(u, dtype=float))
    return float(out) if out.ndim == 0 else out


def truncate_above(u, L: float):
    """Bounded part ``sign(v) * min(|v|, L)``."""
    if L <= 0:
        raise ValueError("truncation level must be positive")
    return _map(u, lambda v: np.sign(v) * np.minimum(np.abs(v), L))


def truncate_below(u, L: float):
    """Excess part ``v - sign(v) * min(|v|, L)``."""
    if L <= 0:
        raise ValueError("truncation level must be positive")
    return _map(u, lambda v: v - np.sign(v) * np.minimum(np.abs(v), L))


def lp_norm(u, p: float) -> float:
    """L^p norm of a grid function, profile or rearrangement."""
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    if isinstance(u, RadialProfile):
        return u.integrate(lambda v: np.abs(v) ** p) ** (1.0 / p)
    mu, v = _cells(u)
    return float(np.sum(mu * np.abs(v) ** p)) ** (1.0 / p)
