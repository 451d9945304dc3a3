"""Exact finite-blocklength rates for the isotropic qubit source.

Counting argument: codewords within distortion radius k of a reference
word number S_k = sum_{j<=k} C(n,j) 3^j.  Everything downstream (converse
rate, random-coding achievability, asymptotic estimate) is exact big-integer
combinatorics plus log-space probability arithmetic, so blocklengths in the
thousands stay cheap and stable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

LOG2_3 = math.log2(3.0)


@dataclass(frozen=True)
class IsotropicParams:
    n: int
    D: float
    eps: float
    M: int = 1

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be a positive integer")
        if not 0.0 <= self.D <= 1.0:
            raise ValueError("D must lie in [0, 1]")
        if not 0.0 < self.eps < 1.0:
            raise ValueError("eps must lie in (0, 1)")
        if self.M < 1:
            raise ValueError("M must be a positive integer")
        if not (math.isfinite(self.D) and math.isfinite(self.eps)):
            raise ValueError("parameters must be finite")


def s_k(n: int, k: int) -> int:
    """Exact S_k = sum_{j=0}^{k} C(n,j) 3^j as a big integer."""
    if not 0 <= k <= n:
        raise ValueError("require 0 <= k <= n")
    total = 0
    comb = 1  # C(n, 0)
    pow3 = 1
    for j in range(k + 1):
        total += comb * pow3
        comb = comb * (n - j) // (j + 1)
        pow3 *= 3
    return total


def log2_bigint(v: int) -> float:
    """log2 of a positive big integer from its top 64 bits (>= 60-bit exact)."""
    if v <= 0:
        raise ValueError("need a positive integer")
    bits = v.bit_length()
    if bits <= 64:
        return math.log2(v)
    shift = bits - 64
    return math.log2(v >> shift) + shift


def converse_rate(n: int, D: float, eps: float) -> float:
    """Lower bound on the per-copy qubit rate of any (n, M, D, eps) code."""
    _check_region(n, D, eps)
    k = math.floor(n * D)
    return 1.0 - log2_bigint(s_k(n, k)) / (2 * n) + math.log2(1.0 - eps) / (2 * n)


def achievability_eps(n: int, M: int, D: float) -> float:
    """Excess-distortion probability (1 - S_k 4^{-n})^M of the random code."""
    if n < 1 or M < 1:
        raise ValueError("n and M must be positive integers")
    if not 0.0 <= D <= 1.0:
        raise ValueError("D must lie in [0, 1]")
    k = math.floor(n * D)
    s = s_k(n, min(k, n))
    x = s / (1 << (2 * n))  # correctly rounded big-int ratio
    if x >= 1.0:
        return 0.0
    log_val = M * math.log1p(-x)
    if log_val < -745.0:  # exp underflow
        return 0.0
    return math.exp(log_val)


def m_star(n: int, D: float, eps: float) -> int:
    """Smallest classical codebook size with achievability_eps <= eps."""
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie in (0, 1)")
    if achievability_eps(n, 1, D) <= eps:
        return 1
    lo, hi = 1, 2
    while achievability_eps(n, hi, D) > eps:
        lo, hi = hi, hi * 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if achievability_eps(n, mid, D) <= eps:
            hi = mid
        else:
            lo = mid
    return hi


def achievability_rate(n: int, D: float, eps: float, quantum: bool = True) -> float:
    """Per-copy rate of the explicit random code at blocklength n.

    The classical rate is (1/n) log2 M*; super-dense coding over the
    entanglement assistance halves it for the qubit rate.
    """
    m = m_star(n, D, eps)
    rate_c = log2_bigint(m) / n if m > 1 else 0.0
    return 0.5 * rate_c if quantum else rate_c


def asymptotic_estimate(n: int, D: float) -> float:
    """n h2(D) + n D log2(3) - (1/2) log2 n, an estimate of log2 S_{nD}.

    The O(1) term is deliberately omitted; callers compare residuals
    instead of asserting a constant.
    """
    _check_region(n, D, 0.5)
    h2 = -D * math.log2(D) - (1 - D) * math.log2(1 - D)
    return n * h2 + n * D * LOG2_3 - 0.5 * math.log2(n)


def rate_limit(D: float) -> float:
    """Asymptotic per-copy qubit rate 1 - (1/2)[h2(D) + D log2 3]."""
    if not 0.0 < D < 0.75:
        raise ValueError("D must lie in (0, 3/4)")
    h2 = -D * math.log2(D) - (1 - D) * math.log2(1 - D)
    return 1.0 - 0.5 * (h2 + D * LOG2_3)


def rate_approx(n: int, D: float, eps: float) -> float:
    """rate_limit(D) + (1/4n) log2 n; the eps-dependence is O(1/n).

    Uses the plus sign inside rate_limit, matching the closed-form
    entanglement-assisted rate-distortion value at every D.
    """
    _check_region(n, D, eps)
    return rate_limit(D) + math.log2(n) / (4 * n)


def _check_region(n: int, D: float, eps: float) -> None:
    if n < 1:
        raise ValueError("n must be a positive integer")
    if not 0.0 < D < 0.75:
        raise ValueError("D must lie in (0, 3/4)")
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie in (0, 1)")
