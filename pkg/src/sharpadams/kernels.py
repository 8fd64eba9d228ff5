"""The base kernel ``g(t, s)`` and its iterated compositions ``g_i``.

``g_i(t, s) = int_0^inf g_{i-1}(t, s1) g(s1, s) ds1`` is evaluated by adaptive
quadrature on ``(0, min) + (min, max) + (max, inf)``. The last piece is mapped
to ``[0, 1)`` by ``s1 = max / (1 - tau)^gamma``; the integrand decays like
``s1^{-2 + c}`` with ``c = 2(i-1)/n``, and ``gamma = 2/(1-c)`` makes the mapped
integrand vanish at ``tau = 1``. The integral converges as long as ``c < 1``.

Every ``g_i`` is homogeneous of degree ``2i/n - 1``; tables exploit this by
evaluating ``g_i(rho, 1)`` once per distinct ratio ``rho = t/s``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate, interpolate

__all__ = [
    "KernelEval",
    "KernelQuadratureError",
    "g_base",
    "g_iter",
    "g_bound",
    "kernel_table",
    "log_grid",
    "verify_derivative_identity",
    "split_formula",
    "DEFAULT_TOL",
    "MAX_NESTED_ORDER",
]

DEFAULT_TOL = 1e-8
MAX_NESTED_ORDER = 3
_LIMIT = 200


class KernelQuadratureError(RuntimeError):
    """Adaptive quadrature failed to reach the requested tolerance."""


def _check_order(n: int, i: int):
    if i < 1:
        raise ValueError("order i must be >= 1")
    if 2 * (i - 1) >= n:
        raise ValueError(f"g_{i} diverges in dimension {n}: need 2(i-1) < n")
    if i > MAX_NESTED_ORDER:
        raise ValueError(f"nested quadrature is limited to i <= {MAX_NESTED_ORDER}; use g_bound")


def g_base(n: int, t, s):
    """``s^{-1+2/n}`` for ``t <= s`` and ``t^{-1} s^{2/n}`` for ``t > s``."""
    t = np.asarray(t, dtype=float)
    s = np.asarray(s, dtype=float)
    if np.any(t <= 0) or np.any(s <= 0):
        raise ValueError("g is defined for t, s > 0")
    a = 2.0 / n
    out = np.where(t <= s, s ** (a - 1.0), s ** a / t)
    return float(out) if out.ndim == 0 else out


def _g1(a: float, t: float, s: float) -> float:
    return s ** (a - 1.0) if t <= s else s ** a / t


def g_bound(n: int, i: int, t, s):
    """Envelope ``s^{-1+2i/n}`` (t <= s) or ``t^{-1+2(i-1)/n} s^{2/n}`` (t > s)."""
    t = np.asarray(t, dtype=float)
    s = np.asarray(s, dtype=float)
    a = 2.0 / n
    out = np.where(t <= s, s ** (i * a - 1.0), t ** ((i - 1) * a - 1.0) * s ** a)
    return float(out) if out.ndim == 0 else out


def _quad(f, lo, hi, tol):
    # quadpack warns when roundoff caps the attainable accuracy; the error
    # estimate it returns is propagated instead
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = integrate.quad(f, lo, hi, epsabs=tol, epsrel=1e-10, limit=_LIMIT)
    return val, err


def _quad_tail(f, b, tol, gamma=2.0):
    def mapped(tau):
        one = 1.0 - tau
        if one <= 0.0:
            return 0.0
        w = one ** -gamma
        return f(b * w) * b * gamma * w / one

    return _quad(mapped, 0.0, 1.0, tol)


def _split_integral(f, p1: float, p2: float, tol: float, gamma: float = 2.0):
    lo, hi = min(p1, p2), max(p1, p2)
    pieces = [_quad(f, 0.0, lo, tol / 3)]
    if hi > lo:
        # power-law integrand over possibly many decades: integrate in log s1
        pieces.append(_quad(lambda y: f(np.exp(y)) * np.exp(y), np.log(lo), np.log(hi), tol / 3))
    pieces.append(_quad_tail(f, hi, tol / 3, gamma))
    return sum(v for v, _ in pieces), sum(e for _, e in pieces)


def _gamma(n: int, i: int) -> float:
    return 2.0 / (1.0 - 2.0 * (i - 1) / n)


class _Table:
    """Cubic spline of ``log g_i(e^y, 1)`` in ``y``, split at the kink ``y = 0``.

    Used for the inner level of nested quadrature. Outside the tabulated
    range the log-log slope at the end is continued linearly.
    """

    SPAN = 40.0
    STEP = 0.05

    def __init__(self, n: int, i: int, tol: float):
        y = np.arange(-self.SPAN, self.SPAN + self.STEP / 2, self.STEP)
        y[np.abs(y) < self.STEP / 4] = 0.0
        vals = [_h(n, i, float(np.exp(v)), tol) for v in y]
        g = np.array([v for v, _ in vals])
        self.abs_error = max(e for _, e in vals)
        lg = np.log(g)
        left, right = y <= 0, y >= 0
        self._left = interpolate.CubicSpline(y[left], lg[left])
        self._right = interpolate.CubicSpline(y[right], lg[right])
        self._ends = (y[0], lg[0], self._left(y[0], 1), y[-1], lg[-1], self._right(y[-1], 1))
        # spline error probed at midpoints against direct quadrature
        probe = y[:-1:40] + self.STEP / 2
        direct = np.array([_h(n, i, float(np.exp(v)), tol)[0] for v in probe])
        self.rel_error = float(np.max(np.abs(np.exp(self.log_value(probe)) / direct - 1.0)))

    def log_value(self, y):
        y = np.asarray(y, dtype=float)
        y0, l0, d0, y1, l1, d1 = self._ends
        out = np.where(y <= 0, self._left(np.clip(y, y0, 0.0)), self._right(np.clip(y, 0.0, y1)))
        out = np.where(y < y0, l0 + d0 * (y - y0), out)
        return np.where(y > y1, l1 + d1 * (y - y1), out)

    def __call__(self, rho: float) -> float:
        return float(np.exp(self.log_value(np.log(rho))))


@lru_cache(maxsize=32)
def _table(n: int, i: int, tol: float) -> _Table:
    return _Table(n, i, tol)


@lru_cache(maxsize=65536)
def _h(n: int, i: int, rho: float, tol: float) -> tuple[float, float]:
    """``g_i(rho, 1)`` with its error estimate."""
    a = 2.0 / n
    if i == 1:
        return _g1(a, rho, 1.0), 0.0
    d_prev = (i - 1) * a - 1.0
    if i == 2:
        def f(x):
            return _g1(a, rho, x) * _g1(a, x, 1.0)
        extra = 0.0
    else:
        inner = _table(n, i - 1, tol * 1e-2)

        def f(x):
            return x ** d_prev * inner(rho / x) * _g1(a, x, 1.0)
        extra = inner.rel_error

    val, err = _split_integral(f, rho, 1.0, tol, _gamma(n, i))
    return val, err + extra * abs(val)


def g_iter(n: int, i: int, t: float, s: float, tol: float = DEFAULT_TOL) -> tuple[float, float]:
    """``(g_i(t, s), error estimate)`` by nested adaptive quadrature."""
    if t <= 0 or s <= 0:
        raise ValueError("g_i is defined for t, s > 0")
    _check_order(n, i)
    val, err = _h(n, i, float(t) / float(s), float(tol))
    scale = s ** (i * 2.0 / n - 1.0)
    if not np.isfinite(val):
        raise KernelQuadratureError(f"g_{i}({t}, {s}) did not converge")
    return val * scale, err * scale


def log_grid(lo: float = 1e-3, hi: float = 1e3, size: int = 20) -> np.ndarray:
    return np.geomspace(lo, hi, size)


@dataclass(frozen=True)
class KernelEval:
    """``g_i`` on the tensor grid ``t x s`` (rows t, columns s)."""

    n: int
    order: int
    t: np.ndarray
    s: np.ndarray
    values: np.ndarray
    quad_error: np.ndarray
    bound_ratio: np.ndarray

    @property
    def sup_ratio(self) -> float:
        return float(self.bound_ratio.max())

    def rows(self):
        """Flat ``(t, s, value, error, bound_ratio)`` records."""
        T, S = np.meshgrid(self.t, self.s, indexing="ij")
        return np.column_stack([T.ravel(), S.ravel(), self.values.ravel(),
                                self.quad_error.ravel(), self.bound_ratio.ravel()])


def kernel_table(n: int, i: int, t=None, s=None, tol: float = DEFAULT_TOL) -> KernelEval:
    t = log_grid() if t is None else np.asarray(t, dtype=float)
    s = log_grid() if s is None else np.asarray(s, dtype=float)
    _check_order(n, i)
    T, S = np.meshgrid(t, s, indexing="ij")
    # ratios repeat along diagonals of a log grid; round to share cache entries
    rho = T / S
    keys = np.round(np.log(rho), 12)
    uniq, inverse = np.unique(keys, return_inverse=True)
    hv = np.empty(uniq.size)
    he = np.empty(uniq.size)
    for k, lr in enumerate(uniq):
        hv[k], he[k] = _h(n, i, float(np.exp(lr)), float(tol))
    scale = S ** (i * 2.0 / n - 1.0)
    values = hv[inverse].reshape(T.shape) * scale
    errors = he[inverse].reshape(T.shape) * scale
    if not np.all(np.isfinite(values)):
        raise KernelQuadratureError("non-finite kernel values")
    ratio = values / g_bound(n, i, T, S)
    return KernelEval(n, i, t, s, values, errors, ratio)


def _moment(n: int, i: int, t: float, s: float, tol: float) -> float:
    """``int_0^t s1^{2/n} g_{i-1}(s1, s) ds1``."""
    a = 2.0 / n
    if i - 1 == 1:
        f = lambda x: x ** a * _g1(a, x, s)
    else:
        f = lambda x: x ** a * g_iter(n, i - 1, x, s, tol * 1e-2)[0]
    pts = [0.0, min(t, s), t] if s < t else [0.0, t]
    return sum(_quad(f, lo, hi, tol)[0] for lo, hi in zip(pts[:-1], pts[1:]) if hi > lo)


def verify_derivative_identity(n: int, i: int, t: float, s: float, h: float = 1e-3,
                               tol: float = DEFAULT_TOL) -> float:
    """``|central difference of d/dt g_i - (-t^{-2} int_0^t s1^{2/n} g_{i-1}(s1,s) ds1)|``."""
    if i < 2:
        raise ValueError("the identity concerns i >= 2")
    if not 0 < h < t:
        raise ValueError("need 0 < h < t")
    fd = (g_iter(n, i, t + h, s, tol)[0] - g_iter(n, i, t - h, s, tol)[0]) / (2 * h)
    rhs = -_moment(n, i, t, s, tol) / t ** 2
    return abs(fd - rhs)


def split_formula(n: int, i: int, t: float, s: float, tol: float = DEFAULT_TOL) -> float:
    """``(1/t) int_0^t s1^{2/n} g_{i-1}(s1,s) + int_t^inf s1^{-1+2/n} g_{i-1}(s1,s)``."""
    if i < 2:
        raise ValueError("the split formula concerns i >= 2")
    a = 2.0 / n
    if i - 1 == 1:
        prev = lambda x: _g1(a, x, s)
    else:
        prev = lambda x: g_iter(n, i - 1, x, s, tol * 1e-2)[0]
    head = _moment(n, i, t, s, tol) / t
    f = lambda x: x ** (a - 1.0) * prev(x)
    pts = [t, s] if s > t else [t]
    tail = 0.0
    for lo, hi in zip(pts[:-1], pts[1:]):
        tail += _quad(f, lo, hi, tol)[0]
    tail += _quad_tail(f, pts[-1], tol, _gamma(n, i))[0]
    return head + tail
