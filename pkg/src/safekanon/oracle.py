"""Exact-distribution checks of the privacy bounds.

The oracle never uses the gamma threshold or the ``n >= ceil(k/gamma - 1)``
restriction. It writes down the published-count law of one generalized class
under neighbouring inputs (n vs n-1 copies of a tuple), compares the two laws
outcome by outcome, and maximizes over every class size up to ``n_max``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Hashable, Mapping

import numpy as np

from .binomial import BinomialSpec, pmf_array
from .errors import DomainError
from .privacy import amplify, min_epsilon, strongly_safe_bound

MASS_TOL = 1e-12


class FiniteDistribution(Mapping):
    """Immutable outcome -> probability table.

    Outcomes with zero mass are kept if given; absent outcomes read as 0.
    """

    def __init__(self, masses: Mapping[Hashable, float], *, check: bool = True):
        self._masses = {x: float(p) for x, p in masses.items()}
        if check:
            if any(p < 0 for p in self._masses.values()):
                raise DomainError("negative probability mass")
            total = math.fsum(self._masses.values())
            if abs(total - 1.0) > MASS_TOL:
                raise DomainError(f"masses sum to {total!r}, not 1")

    def __getitem__(self, outcome):
        return self._masses.get(outcome, 0.0)

    def __iter__(self):
        return iter(self._masses)

    def __len__(self):
        return len(self._masses)

    def __contains__(self, outcome):
        return outcome in self._masses

    def __repr__(self):
        return f"FiniteDistribution({self._masses!r})"

    def support(self) -> set:
        return {x for x, p in self._masses.items() if p > 0}

    def total(self) -> float:
        return math.fsum(self._masses.values())


@dataclass(frozen=True)
class CensoredBinomial:
    """Published size of a class of ``n`` tuples after Bernoulli sampling and suppression below ``k``."""

    n: int
    k: int
    beta: float
    dist: FiniteDistribution = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 0:
            raise DomainError(f"class size must be a nonnegative integer, got {self.n}")
        if int(self.k) != self.k or self.k < 1:
            raise DomainError(f"k must be an integer >= 1, got {self.k}")
        masses = _censored_masses(self.n, self.k, self.beta)
        table = {0: masses[0]}
        table.update({j: masses[j] for j in range(self.k, self.n + 1)})
        object.__setattr__(self, "dist", FiniteDistribution(table))


@dataclass(frozen=True)
class NeighborPair:
    """Output laws under D (``p``) and under D with one tuple removed (``q``)."""

    p: FiniteDistribution
    q: FiniteDistribution

    def outcomes(self) -> list:
        seen = dict.fromkeys(self.p)
        seen.update(dict.fromkeys(self.q))
        return list(seen)

    def swapped(self) -> "NeighborPair":
        return NeighborPair(self.q, self.p)


def _censored_masses(n: int, k: int, beta: float) -> np.ndarray:
    """Array ``m`` with ``m[j]`` the probability of publishing ``j`` copies."""
    if not 0.0 <= beta <= 1.0:
        raise DomainError(f"beta must lie in [0, 1], got {beta}")
    f = pmf_array(np.arange(n + 1), BinomialSpec(n, beta))
    out = np.zeros(n + 1)
    low = min(k - 1, n)
    out[0] = min(math.fsum(f[: low + 1].tolist()), 1.0)
    out[k:] = f[k:]
    return out


def censored_binomial(n: int, k: int, beta: float) -> CensoredBinomial:
    return CensoredBinomial(n, k, beta)


def _aligned(pair: NeighborPair) -> tuple[np.ndarray, np.ndarray]:
    xs = pair.outcomes()
    return (np.array([pair.p[x] for x in xs], dtype=float),
            np.array([pair.q[x] for x in xs], dtype=float))


def _hockey_stick(p: np.ndarray, q: np.ndarray, epsilon: float) -> float:
    excess = p - math.exp(epsilon) * q
    return math.fsum(excess[excess > 0].tolist())


def _violation_mass(p: np.ndarray, q: np.ndarray, epsilon: float) -> float:
    """P-mass of outcomes whose ratio p/q leaves ``[e^-eps, e^eps]``.

    0/0 counts as inside the band and p/0 with p > 0 as outside.
    """
    hi, lo = math.exp(epsilon), math.exp(-epsilon)
    bad = (p > hi * q) | (p < lo * q)
    return math.fsum(p[bad].tolist())


def hockey_stick_delta(pair: NeighborPair, epsilon: float) -> float:
    """Smallest delta with ``P(O) <= e^eps Q(O) + delta`` for every event O."""
    return _hockey_stick(*_aligned(pair), epsilon)


def ratio_violation_mass(pair: NeighborPair, epsilon: float) -> float:
    return _violation_mass(*_aligned(pair), epsilon)


def _worst_case(k: int, beta: float, epsilon: float, n_max: int, measure) -> tuple[float, int]:
    if int(k) != k or k < 1:
        raise DomainError(f"k must be an integer >= 1, got {k}")
    floor = min_epsilon(beta)
    if not epsilon >= floor:
        raise DomainError(f"epsilon={epsilon} below the admissible bound -ln(1-beta) = {floor:.6g}")
    best, best_n = 0.0, 0
    prev = _censored_masses(0, k, beta)
    for n in range(1, n_max + 1):
        cur = _censored_masses(n, k, beta)
        q = np.zeros(n + 1)
        q[:n] = prev
        v = max(measure(cur, q, epsilon), measure(q, cur, epsilon))
        if v > best:
            best, best_n = v, n
        prev = cur
    return best, best_n


def worst_case_search(k: int, beta: float, epsilon: float, n_max: int) -> tuple[float, int]:
    """Largest ratio-violation mass over class sizes ``1..n_max``, in both directions.

    Returns the mass and the class size achieving it (0 when nothing violates).
    """
    return _worst_case(k, beta, epsilon, n_max, _violation_mass)


def worst_case_delta(k: int, beta: float, epsilon: float, n_max: int) -> float:
    return worst_case_search(k, beta, epsilon, n_max)[0]


def worst_case_hockey_stick(k: int, beta: float, epsilon: float, n_max: int) -> float:
    """Tightest event-level delta of the mechanism over class sizes ``1..n_max``.

    Neighbouring inputs differ in one class only, so the joint law's
    hockey-stick divergence equals that of the differing class.
    """
    return _worst_case(k, beta, epsilon, n_max, _hockey_stick)[0]


def pushforward(dist: FiniteDistribution, fn: Callable[[Any], Hashable]) -> FiniteDistribution:
    buckets: dict[Hashable, list[float]] = {}
    for x, p in dist.items():
        buckets.setdefault(fn(x), []).append(p)
    return FiniteDistribution({y: math.fsum(ps) for y, ps in buckets.items()}, check=False)


def mixture(d1: FiniteDistribution, d2: FiniteDistribution, p: float) -> FiniteDistribution:
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"mixing weight must lie in [0, 1], got {p}")
    outcomes = dict.fromkeys(d1)
    outcomes.update(dict.fromkeys(d2))
    return FiniteDistribution({x: p * d1[x] + (1.0 - p) * d2[x] for x in outcomes}, check=False)


def product(d1: FiniteDistribution, d2: FiniteDistribution) -> FiniteDistribution:
    """Joint law of two independent components, outcomes as pairs."""
    return FiniteDistribution({(x, y): px * py for x, px in d1.items() for y, py in d2.items()},
                              check=False)


def report(check: str, params: Mapping[str, Any], observed: float, bound: float, passed: bool) -> dict:
    return {"check": check, "params": dict(params), "observed": observed, "bound": bound, "pass": bool(passed)}


def verify_strongly_safe(k: int, beta: float, epsilon: float, n_max: int, rel_tol: float = 1e-10) -> dict:
    """Compare the oracle's worst case with the closed-form bound.

    Passes when the oracle never exceeds the bound and, if the bound's
    maximizing class size is within reach, matches it to ``rel_tol``.
    """
    analytic = strongly_safe_bound(k, beta, epsilon)
    observed, n_obs = worst_case_search(k, beta, epsilon, n_max)
    in_range = analytic.argmax_n <= n_max
    below = observed <= analytic.delta * (1.0 + rel_tol) + 1e-15
    matches = abs(observed - analytic.delta) <= rel_tol * analytic.delta if in_range else True
    out = report("oracle", {"k": k, "beta": beta, "epsilon": epsilon, "n_max": n_max},
                 observed, analytic.delta, below and matches)
    out.update(argmax_n=analytic.argmax_n, oracle_argmax_n=n_obs, argmax_in_range=in_range)
    return out


def verify_amplification(k: int, beta1: float, ratio: float, epsilon1: float, n_max: int) -> dict:
    """Check that lowering the sampling rate by ``ratio`` keeps the amplified guarantee.

    Both sides use the event-level (hockey-stick) delta, the notion the
    amplification statement is about. The base delta is the oracle's worst
    case at ``(beta1, epsilon1)``; the amplified pair ``(epsilon2, delta2)``
    is then checked against the worst case at ``(beta1 * ratio, epsilon2)``.
    The pointwise ratio-violation masses are reported alongside; they are not
    expected to shrink linearly with ``ratio``.
    """
    if not 0.0 < ratio <= 1.0:
        raise DomainError(f"ratio must lie in (0, 1], got {ratio}")
    delta1 = worst_case_hockey_stick(k, beta1, epsilon1, n_max)
    amp = amplify(epsilon1, delta1, 1.0, ratio)
    beta2 = beta1 * ratio
    observed = worst_case_hockey_stick(k, beta2, amp.epsilon2, n_max)
    passed = observed <= amp.delta2 + 1e-15
    out = report("amplification",
                 {"k": k, "beta1": beta1, "ratio": ratio, "epsilon1": epsilon1, "n_max": n_max},
                 observed, amp.delta2, passed)
    out.update(
        delta1=delta1,
        epsilon2=amp.epsilon2,
        beta2=beta2,
        pointwise_delta1=worst_case_delta(k, beta1, epsilon1, n_max),
        pointwise_observed=worst_case_delta(k, beta2, amp.epsilon2, n_max),
    )
    return out


def compose_attack_demo(
    m_per_gender: int = 1000,
    threshold: int = 100,
    beta: float = 0.5,
    eps2: float = 1.0,
    trials: int = 100_000,
    seed: int = 0,
) -> tuple[float, float]:
    """Monte-Carlo estimate of how a sampling-only guarantee breaks under composition.

    ``D`` holds ``m_per_gender`` males and females; ``D'`` adds one female
    target tuple. Over Bernoulli(beta) samples ``T``:

    * A1(T) = (males > females) XOR (target in T) if |T| >= threshold, else False
    * A2(T) = male fraction of T + Laplace(1 / (eps2 * beta * 2 m_per_gender))

    Returns the estimated probabilities of ``A1 = False and A2 >= 0.5``
    under D and under D'. Per-gender counts are drawn as binomials, which
    has the same law as per-tuple coin flips.
    """
    if trials < 1:
        raise DomainError(f"trials must be >= 1, got {trials}")
    if m_per_gender < 0 or threshold < 0:
        raise DomainError("m_per_gender and threshold must be nonnegative")
    if not 0.0 < beta < 1.0:
        raise DomainError(f"beta must lie in (0, 1), got {beta}")
    if not eps2 > 0:
        raise DomainError(f"eps2 must be positive, got {eps2}")
    rng = np.random.default_rng(seed)
    scale = 1.0 / (eps2 * beta * 2 * m_per_gender) if m_per_gender else 1.0 / eps2
    estimates = []
    for present in (False, True):
        males = rng.binomial(m_per_gender, beta, trials)
        females = rng.binomial(m_per_gender, beta, trials)
        target = rng.random(trials) < beta if present else np.zeros(trials, dtype=bool)
        females = females + target
        size = males + females
        a1 = np.where(size >= threshold, (males > females) ^ target, False)
        frac = np.divide(males, size, out=np.zeros(trials), where=size > 0)
        a2 = frac + rng.laplace(0.0, scale, trials)
        estimates.append(float(np.mean(~a1 & (a2 >= 0.5))))
    return estimates[0], estimates[1]


def random_distribution(rng: np.random.Generator, outcomes: int, sparsity: float = 0.3) -> FiniteDistribution:
    """Dirichlet-distributed masses with some outcomes zeroed out."""
    w = rng.dirichlet(np.ones(outcomes))
    w[rng.random(outcomes) < sparsity] = 0.0
    if w.sum() == 0:
        w[rng.integers(outcomes)] = 1.0
    w = w / w.sum()
    return FiniteDistribution(dict(enumerate(w.tolist())), check=False)


def check_postprocessing(pairs: int = 500, seed: int = 0, slack: float = 1e-12) -> dict:
    """Random pairs and random maps: delta never grows under a pushforward."""
    rng = np.random.default_rng(seed)
    worst = -math.inf
    failures = 0
    for _ in range(pairs):
        m = int(rng.integers(1, 9))
        pair = NeighborPair(random_distribution(rng, m), random_distribution(rng, m))
        eps = float(rng.uniform(0.0, 2.0))
        image = rng.integers(0, int(rng.integers(1, m + 1)), size=m)
        fn = lambda x, image=image: int(image[x])
        mapped = NeighborPair(pushforward(pair.p, fn), pushforward(pair.q, fn))
        gap = hockey_stick_delta(mapped, eps) - hockey_stick_delta(pair, eps)
        worst = max(worst, gap)
        failures += gap > slack
    return report("postprocess", {"pairs": pairs, "seed": seed, "slack": slack},
                  worst, slack, failures == 0) | {"failures": failures}


def check_convexity(pairs: int = 500, seed: int = 0, slack: float = 1e-12) -> dict:
    """Random mixtures: the mixed delta is at most the mixed deltas."""
    rng = np.random.default_rng(seed)
    worst = -math.inf
    failures = 0
    for _ in range(pairs):
        m = int(rng.integers(1, 9))
        p1, q1, p2, q2 = (random_distribution(rng, m) for _ in range(4))
        w = float(rng.uniform())
        eps = float(rng.uniform(0.0, 2.0))
        d1 = hockey_stick_delta(NeighborPair(p1, q1), eps)
        d2 = hockey_stick_delta(NeighborPair(p2, q2), eps)
        mixed = hockey_stick_delta(NeighborPair(mixture(p1, p2, w), mixture(q1, q2, w)), eps)
        gap = max(mixed - (w * d1 + (1 - w) * d2), w * d1 + (1 - w) * d2 - max(d1, d2))
        worst = max(worst, gap)
        failures += gap > slack
    return report("convexity", {"pairs": pairs, "seed": seed, "slack": slack},
                  worst, slack, failures == 0) | {"failures": failures}
