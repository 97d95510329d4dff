"""Binomial mass, cumulative mass and strict tails computed in log space.

Every term is evaluated as ``exp(log_pmf)`` with log-gamma coefficients, so
masses far below the double-precision range of a direct product (down to
~1e-300) stay representable. Sums are accumulated with :func:`math.fsum`
over terms ordered largest first.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .errors import DomainError


@dataclass(frozen=True)
class BinomialSpec:
    """Trial count ``n`` and success probability ``beta``."""

    n: int
    beta: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 0:
            raise DomainError(f"trial count must be a nonnegative integer, got {self.n!r}")
        if not 0.0 <= self.beta <= 1.0:
            raise DomainError(f"success probability must lie in [0, 1], got {self.beta!r}")


def _check_count(j: int, spec: BinomialSpec) -> None:
    if not 0 <= j <= spec.n:
        raise DomainError(f"count {j} outside [0, {spec.n}]")


def log_pmf_array(js, spec: BinomialSpec) -> np.ndarray:
    """Vectorized ``ln f(j; n, beta)`` for integer ``js`` inside ``[0, n]``.

    Degenerate probabilities (0 or 1) yield ``-inf`` off the single atom.
    """
    js = np.asarray(js, dtype=np.int64)
    n, beta = spec.n, spec.beta
    out = gammaln(n + 1.0) - gammaln(js + 1.0) - gammaln(n - js + 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        if beta == 0.0:
            return np.where(js == 0, 0.0, -np.inf)
        if beta == 1.0:
            return np.where(js == n, 0.0, -np.inf)
        out = out + js * math.log(beta) + (n - js) * math.log1p(-beta)
    return out


def log_pmf(j: int, spec: BinomialSpec) -> float:
    _check_count(j, spec)
    return float(log_pmf_array([j], spec)[0])


def pmf(j: int, spec: BinomialSpec) -> float:
    return math.exp(log_pmf(j, spec))


def pmf_array(js, spec: BinomialSpec) -> np.ndarray:
    return np.exp(log_pmf_array(js, spec))


def _sum_desc(values: np.ndarray) -> float:
    if values.size == 0:
        return 0.0
    return math.fsum(np.sort(values)[::-1].tolist())


def cdf(j: int, spec: BinomialSpec) -> float:
    """``F(j; n, beta)``, the mass of ``{0, ..., j}``.

    Summed directly rather than as ``1 - tail`` so that small left tails
    keep their relative precision.
    """
    _check_count(j, spec)
    total = _sum_desc(pmf_array(np.arange(0, j + 1), spec))
    return min(total, 1.0)


def tail_strict(threshold: float, spec: BinomialSpec) -> float:
    """Mass of the integers ``j`` with ``threshold < j <= n``.

    The inequality is strict and evaluated in double precision as given:
    an integral threshold excludes itself.
    """
    n = spec.n
    if threshold >= n:
        return 0.0
    if threshold < 0:
        return 1.0
    lo = math.floor(threshold) + 1
    total = _sum_desc(pmf_array(np.arange(lo, n + 1), spec))
    return min(total, 1.0)
