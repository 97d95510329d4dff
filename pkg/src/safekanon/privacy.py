"""Privacy accounting for sampling followed by safe k-anonymization.

The central quantity is the failure mass

    d(k, beta, eps) = max_{n >= ceil(k/gamma - 1)} P[Bin(n, beta) > gamma * n],
    gamma = (e^eps - 1 + beta) / e^eps,

which is the delta of a strongly-safe k-anonymizer run on a Bernoulli(beta)
sample. An eps1-safe anonymizer (scheme chosen by an eps1-DP step) pays the
same mass at ``eps - eps1``.
"""

from __future__ import annotations

import bisect
import logging
import math
from dataclasses import dataclass
from functools import lru_cache

from .binomial import BinomialSpec, tail_strict
from .errors import DomainError

logger = logging.getLogger(__name__)

EPSILON_STEP = 1e-3
EPSILON_OFFSET = 1e-9
EPSILON_CEILING = 10.0
K_CEILING = 10_000


@dataclass(frozen=True)
class PrivacyParams:
    beta: float
    epsilon: float
    delta: float
    k: int

    def __post_init__(self):
        if not 0.0 < self.beta < 1.0:
            raise DomainError(f"beta must lie in (0, 1), got {self.beta}")
        if not self.epsilon > 0.0:
            raise DomainError(f"epsilon must be positive, got {self.epsilon}")
        if not 0.0 <= self.delta < 1.0:
            raise DomainError(f"delta must lie in [0, 1), got {self.delta}")
        if int(self.k) != self.k or self.k < 1:
            raise DomainError(f"k must be an integer >= 1, got {self.k}")

    @property
    def meaningful(self) -> bool:
        """A sampling guarantee says nothing unless beta exceeds delta."""
        return self.beta > self.delta


@dataclass(frozen=True)
class AmplifiedParams:
    epsilon2: float
    delta2: float
    ratio: float


@dataclass(frozen=True)
class EsafeParams:
    epsilon1: float
    params: PrivacyParams

    def __post_init__(self):
        if self.epsilon1 < 0:
            raise DomainError(f"epsilon1 must be >= 0, got {self.epsilon1}")
        floor = min_epsilon(self.params.beta) + self.epsilon1
        if self.params.epsilon < floor:
            raise DomainError(
                f"epsilon={self.params.epsilon} below -ln(1-beta) + epsilon1 = {floor:.6g}"
            )


@dataclass(frozen=True)
class DeltaBound:
    """Result of the maximization over class sizes.

    ``capped`` is set when the scan stopped at the hard size cap rather
    than on the Chernoff certificate.
    """

    delta: float
    argmax_n: int
    n_min: int
    n_last: int
    gamma: float
    capped: bool


def _check_beta(beta: float) -> None:
    if not 0.0 < beta < 1.0:
        raise DomainError(f"beta must lie in (0, 1), got {beta}")


def _check_k(k: int) -> None:
    if int(k) != k or k < 1:
        raise DomainError(f"k must be an integer >= 1, got {k}")


def gamma(epsilon: float, beta: float) -> float:
    """Largest fraction ``j/n`` of a class that may survive without a ratio violation."""
    if not epsilon > 0:
        raise DomainError(f"epsilon must be positive, got {epsilon}")
    _check_beta(beta)
    # (e^eps - 1 + beta) / e^eps written to avoid overflow for large eps
    return 1.0 - (1.0 - beta) * math.exp(-epsilon)


def min_epsilon(beta: float) -> float:
    _check_beta(beta)
    return -math.log1p(-beta)


def _chernoff_tail(n: int, g: float, beta: float) -> float:
    """Multiplicative Chernoff bound on P[Bin(n, beta) >= g n] for g > beta.

    Decreasing in n, so once it drops below the running maximum no larger
    class size can beat it.
    """
    rate = g * math.log(g / beta) - (g - beta)
    return math.exp(-n * rate)


@lru_cache(maxsize=4096)
def _scan(k: int, beta: float, epsilon: float) -> DeltaBound:
    g = gamma(epsilon, beta)
    n_min = max(math.ceil(k / g - 1), 1)
    cap = max(10 * n_min, n_min + 2000)
    best, best_n = -1.0, n_min
    n = n_min
    while True:
        t = tail_strict(g * n, BinomialSpec(n, beta))
        if t > best:
            best, best_n = t, n
        if _chernoff_tail(n, g, beta) < best:
            capped = False
            break
        if n >= cap:
            capped = True
            logger.warning("class-size cap %d reached for k=%d beta=%g eps=%g", cap, k, beta, epsilon)
            break
        n += 1
    return DeltaBound(
        delta=min(max(best, 0.0), 1.0),
        argmax_n=best_n,
        n_min=n_min,
        n_last=n,
        gamma=g,
        capped=capped,
    )


def strongly_safe_bound(k: int, beta: float, epsilon: float) -> DeltaBound:
    """Evaluate ``d(k, beta, epsilon)`` together with its maximizing class size.

    Class sizes are scanned upward from ``ceil(k/gamma - 1)``; the maximum is
    not always at the first size because of the floor in ``j > gamma n``.
    """
    _check_k(k)
    _check_beta(beta)
    floor = min_epsilon(beta)
    if not epsilon >= floor:
        raise DomainError(f"epsilon={epsilon} below the admissible bound -ln(1-beta) = {floor:.6g}")
    return _scan(int(k), float(beta), float(epsilon))


def delta_strongly_safe(k: int, beta: float, epsilon: float) -> float:
    return strongly_safe_bound(k, beta, epsilon).delta


def delta_esafe(k: int, beta: float, epsilon: float, epsilon1: float) -> float:
    """Delta of an eps1-safe k-anonymizer on a Bernoulli(beta) sample."""
    if epsilon1 < 0:
        raise DomainError(f"epsilon1 must be >= 0, got {epsilon1}")
    _check_beta(beta)
    floor = min_epsilon(beta) + epsilon1
    if not epsilon >= floor:
        raise DomainError(
            f"epsilon={epsilon} below -ln(1-beta) + epsilon1 = {floor:.6g}"
        )
    if epsilon1 == 0:
        return delta_strongly_safe(k, beta, epsilon)
    return delta_strongly_safe(k, beta, max(epsilon - epsilon1, min_epsilon(beta)))


def amplify(epsilon1: float, delta1: float, beta1: float, beta2: float) -> AmplifiedParams:
    """Guarantee obtained by lowering the sampling rate from beta1 to beta2.

    ``e^eps - 1`` and ``delta`` both scale by ``beta2 / beta1``.
    """
    if not 0.0 < beta2 <= beta1 <= 1.0:
        raise DomainError(f"need 0 < beta2 <= beta1 <= 1, got beta1={beta1}, beta2={beta2}")
    if epsilon1 < 0:
        raise DomainError(f"epsilon1 must be >= 0, got {epsilon1}")
    if not 0.0 <= delta1 <= 1.0:
        raise DomainError(f"delta1 must lie in [0, 1], got {delta1}")
    ratio = beta2 / beta1
    if ratio == 1.0:
        return AmplifiedParams(epsilon1, delta1, 1.0)
    return AmplifiedParams(
        epsilon2=math.log1p(ratio * math.expm1(epsilon1)),
        delta2=ratio * delta1,
        ratio=ratio,
    )


def _check_delta_max(delta_max: float) -> None:
    if not delta_max > 0:
        raise DomainError(f"delta_max must be positive, got {delta_max}")


def solve_min_epsilon(k: int, beta: float, delta_max: float) -> float | None:
    """Smallest epsilon with ``d(k, beta, epsilon) <= delta_max``, or None.

    The grid is ``min_epsilon(beta) + 1e-9 + i * 1e-3`` up to epsilon = 10.
    Because d is assumed nonincreasing in epsilon, the first feasible grid
    point is located by binary search over grid indices; the answer is then
    refined by bisection between that point and its predecessor.
    """
    _check_k(k)
    _check_delta_max(delta_max)
    start = min_epsilon(beta) + EPSILON_OFFSET
    if start > EPSILON_CEILING:
        return None
    n_grid = int(math.floor((EPSILON_CEILING - start) / EPSILON_STEP)) + 1

    def at(i: int) -> float:
        return start + i * EPSILON_STEP

    def ok(eps: float) -> bool:
        return delta_strongly_safe(k, beta, eps) <= delta_max

    if ok(at(0)):
        return at(0)
    if not ok(at(n_grid - 1)):
        return None
    i = bisect.bisect_left(range(n_grid), True, key=lambda idx: ok(at(idx)))
    lo, hi = at(i - 1), at(i)
    if ok(lo) or not ok(hi):
        raise ArithmeticError(f"delta not monotone in epsilon on [{lo}, {hi}]")
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        if ok(mid):
            hi = mid
        else:
            lo = mid
        if hi - lo < 1e-12:
            break
    return hi


def solve_min_k(beta: float, epsilon: float, delta_max: float, k_max: int = K_CEILING) -> int | None:
    """Smallest k <= k_max with ``d(k, beta, epsilon) <= delta_max``, or None."""
    _check_beta(beta)
    _check_delta_max(delta_max)
    floor = min_epsilon(beta)
    if not epsilon >= floor:
        raise DomainError(f"epsilon={epsilon} below the admissible bound -ln(1-beta) = {floor:.6g}")

    def ok(k: int) -> bool:
        return delta_strongly_safe(k, beta, epsilon) <= delta_max

    if ok(1):
        return 1
    # exponential search for a feasible upper bracket, then binary search
    lo, hi = 1, 2
    while hi < k_max and not ok(hi):
        lo, hi = hi, min(2 * hi, k_max)
    if not ok(hi):
        return None
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    if ok(hi - 1):
        raise ArithmeticError(f"delta not monotone in k near k={hi}")
    return hi
