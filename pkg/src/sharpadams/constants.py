"""Sharp constants and exponents for Moser-Trudinger / Adams inequalities.

All quantities are computed in double precision. Gamma-function ratios go
through ``math.lgamma`` so that large dimensions do not overflow.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "SobolevParams",
    "ImprovementExponent",
    "omega_n",
    "alpha_n",
    "beta_nm",
    "c_nk",
    "j_index",
    "c_epsilon",
    "improvement_exponent",
]


@dataclass(frozen=True)
class SobolevParams:
    """Dimension ``n`` and derivative order ``m`` of ``W^{m, n/m}``."""

    n: int
    m: int

    def __post_init__(self):
        if int(self.n) != self.n or int(self.m) != self.m:
            raise ValueError("n and m must be integers")
        if self.n < 2:
            raise ValueError(f"dimension n must be >= 2, got {self.n}")
        if not 1 <= self.m < self.n:
            raise ValueError(f"order m must satisfy 1 <= m < n, got m={self.m}, n={self.n}")

    @property
    def k(self) -> int:
        return self.m // 2

    @property
    def odd(self) -> bool:
        return self.m % 2 == 1

    @property
    def p(self) -> float:
        """Integrability exponent n/m."""
        return self.n / self.m

    @property
    def q(self) -> float:
        """Critical growth exponent n/(n-m)."""
        return self.n / (self.n - self.m)


@dataclass(frozen=True)
class ImprovementExponent:
    """Improved multiplier ``(1 - norm)^(-m/(n-m))``; ``math.inf`` when norm == 1."""

    kind: str
    value: float

    @property
    def finite(self) -> bool:
        return math.isfinite(self.value)


def _log_omega(n: float) -> float:
    return 0.5 * n * math.log(math.pi) - math.lgamma(0.5 * n + 1.0)


def omega_n(n: int) -> float:
    """Volume of the unit ball in R^n."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if n <= 300:
        # direct form is a few ulps more accurate than exp(log-gamma)
        return math.pi ** (0.5 * n) / math.gamma(0.5 * n + 1.0)
    return math.exp(_log_omega(n))


def alpha_n(n: int) -> float:
    """Moser's sharp constant ``n^{n/(n-1)} omega_n^{1/(n-1)}``."""
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    return math.exp((n * math.log(n) + _log_omega(n)) / (n - 1))


def beta_nm(p: SobolevParams) -> float:
    """Adams' sharp constant beta(n, m)."""
    n, m = p.n, p.m
    if m % 2 == 1:
        lg = math.lgamma((m + 1) / 2) - math.lgamma((n - m + 1) / 2)
    else:
        lg = math.lgamma(m / 2) - math.lgamma((n - m) / 2)
    inner = 0.5 * n * math.log(math.pi) + m * math.log(2.0) + lg
    return math.exp(inner * n / (n - m) - _log_omega(n))


def c_nk(n: int, k: int) -> float:
    """Leading coefficient of the iterated-Laplacian rearrangement estimate.

    Defined for ``1 <= k < n/2``; outside that range a ``ValueError`` is raised.
    """
    if k < 1 or 2 * k >= n:
        raise ValueError(f"c(n,k) requires 1 <= k < n/2, got n={n}, k={k}")
    if k == 1:
        return 1.0
    denom = 2.0 ** (k - 1) * math.factorial(k - 1)
    for j in range(1, k):
        denom *= n - 2 * j
    return float(n) ** (2 * (k - 1)) / denom


def j_index(p: SobolevParams) -> int:
    """Smallest integer >= n/m."""
    return -(-p.n // p.m)


def c_epsilon(p_exp: float, eps: float) -> float:
    """Constant in ``(a+b)^p <= (1+eps) a^p + C_eps b^p``."""
    if p_exp <= 1:
        raise ValueError(f"p_exp must be > 1, got {p_exp}")
    if eps <= 0:
        raise ValueError(f"eps must be > 0, got {eps}")
    # 1 - (1+eps)^(-1/(p-1)), without cancellation for small eps
    gap = -math.expm1(-math.log1p(eps) / (p_exp - 1.0))
    return gap ** (1.0 - p_exp)


_KINDS = ("P", "Q", "R", "eta")


def improvement_exponent(kind: str, norm_value: float, p: SobolevParams) -> ImprovementExponent:
    """Concentration-compactness exponent for a weak limit of given norm.

    ``norm_value`` is the relevant norm of the weak limit raised to the power
    n/m, so it lies in [0, 1].
    """
    if kind not in _KINDS:
        raise ValueError(f"kind must be one of {_KINDS}, got {kind!r}")
    if not 0.0 <= norm_value <= 1.0:
        raise ValueError(f"norm_value must lie in [0, 1], got {norm_value}")
    if norm_value == 1.0:
        return ImprovementExponent(kind, math.inf)
    return ImprovementExponent(kind, (1.0 - norm_value) ** (-p.m / (p.n - p.m)))
