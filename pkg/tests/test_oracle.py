import itertools
import math

import numpy as np
import pytest
from scipy.stats import binom, laplace

from safekanon.errors import DomainError
from safekanon.oracle import (
    CensoredBinomial,
    FiniteDistribution,
    NeighborPair,
    check_convexity,
    check_postprocessing,
    compose_attack_demo,
    hockey_stick_delta,
    mixture,
    product,
    pushforward,
    ratio_violation_mass,
    verify_amplification,
    verify_strongly_safe,
    worst_case_delta,
    worst_case_hockey_stick,
    worst_case_search,
)
from safekanon.privacy import delta_strongly_safe, min_epsilon

from conftest import exact_pmf


def exact_censored(n, k, beta):
    """Published-count law by direct enumeration in rationals."""
    out = {0: sum(exact_pmf(j, n, beta) for j in range(min(k, n + 1)))}
    out.update({j: exact_pmf(j, n, beta) for j in range(k, n + 1)})
    return out


def test_censored_example():
    d = CensoredBinomial(3, 2, 0.5).dist
    assert dict(d) == pytest.approx({0: 0.5, 2: 0.375, 3: 0.125}, rel=1e-14)


@pytest.mark.parametrize("n, k, beta", [(0, 1, 0.3), (1, 1, 0.3), (6, 3, 0.2), (9, 9, 0.7), (4, 10, 0.5)])
def test_censored_matches_enumeration(n, k, beta):
    d = CensoredBinomial(n, k, beta).dist
    for j, p in exact_censored(n, k, beta).items():
        assert d[j] == pytest.approx(float(p), rel=1e-12, abs=1e-300)
    assert d.support() <= {0} | set(range(k, n + 1))


def test_distribution_validation():
    with pytest.raises(DomainError):
        FiniteDistribution({0: 0.6, 1: 0.6})
    with pytest.raises(DomainError):
        FiniteDistribution({0: 1.1, 1: -0.1})
    d = FiniteDistribution({"a": 1.0, "b": 0.0})
    assert d["zzz"] == 0.0 and d.support() == {"a"}


def reference_pair():
    return NeighborPair(CensoredBinomial(3, 2, 0.5).dist, FiniteDistribution({0: 0.75, 2: 0.25}))


def test_hockey_stick_example():
    # only j = 3 escapes: 0.125 - 2 * 0 ; j = 2: 0.375 - 2 * 0.25 < 0
    assert hockey_stick_delta(reference_pair(), math.log(2)) == pytest.approx(0.125, rel=1e-14)


def test_ratio_mass_example():
    pair = reference_pair()
    assert ratio_violation_mass(pair, 50.0) == pytest.approx(0.125, rel=1e-14)
    assert ratio_violation_mass(pair.swapped(), 50.0) == 0.0


def test_zero_over_zero_is_inside():
    pair = NeighborPair(FiniteDistribution({0: 1.0, 5: 0.0}), FiniteDistribution({0: 1.0}))
    assert ratio_violation_mass(pair, 0.1) == 0.0


@pytest.mark.parametrize("eps", [0.0, 0.3, 1.0, 3.0])
def test_pointwise_dominates_hockey_stick(eps):
    rng = np.random.default_rng(7)
    for _ in range(200):
        p, q = rng.dirichlet(np.ones(6)), rng.dirichlet(np.ones(6))
        pair = NeighborPair(FiniteDistribution(dict(enumerate(p))), FiniteDistribution(dict(enumerate(q))))
        assert hockey_stick_delta(pair, eps) <= ratio_violation_mass(pair, eps) + 1e-15


def test_worst_case_examples():
    assert worst_case_delta(5, 0.3, 1.0, 4) == 0.0
    assert worst_case_search(5, 0.3, 1.0, 4) == (0.0, 0)
    assert worst_case_delta(2, 0.5, 0.8, 400) == pytest.approx(delta_strongly_safe(2, 0.5, 0.8), rel=1e-10)
    assert worst_case_delta(20, 0.1, 0.5, 2000) == pytest.approx(1.61e-9, rel=0.02)
    with pytest.raises(DomainError):
        worst_case_delta(5, 0.5, 0.5, 100)


def test_hockey_stick_below_pointwise_in_worst_case():
    for k, beta, eps in [(2, 0.2, 0.5), (5, 0.4, 1.0), (20, 0.1, 0.5)]:
        assert worst_case_hockey_stick(k, beta, eps, 300) <= worst_case_delta(k, beta, eps, 300)


def test_pushforward_and_mixture():
    d = CensoredBinomial(3, 2, 0.5).dist
    merged = pushforward(d, lambda j: "big" if j >= 2 else j)
    assert dict(merged) == pytest.approx({0: 0.5, "big": 0.5}, rel=1e-14)
    m = mixture(FiniteDistribution({0: 1.0}), FiniteDistribution({1: 1.0}), 0.25)
    assert dict(m) == {0: 0.25, 1: 0.75}
    with pytest.raises(DomainError):
        mixture(m, m, 1.5)


@pytest.mark.parametrize("a, b, k", [(3, 2, 2), (5, 4, 3), (8, 6, 2), (4, 8, 4), (7, 1, 1)])
@pytest.mark.parametrize("beta", [0.2, 0.5])
def test_factorization_over_classes(a, b, k, beta):
    # D has classes of sizes a and b; D' loses one tuple from the first class
    eps = min_epsilon(beta) + 0.2
    other = CensoredBinomial(b, k, beta).dist
    joint = NeighborPair(product(CensoredBinomial(a, k, beta).dist, other),
                         product(CensoredBinomial(a - 1, k, beta).dist, other))
    single = NeighborPair(CensoredBinomial(a, k, beta).dist, CensoredBinomial(a - 1, k, beta).dist)
    for pair, ref in ((joint, single), (joint.swapped(), single.swapped())):
        assert hockey_stick_delta(pair, eps) == pytest.approx(hockey_stick_delta(ref, eps), abs=1e-15)
        assert ratio_violation_mass(pair, eps) == pytest.approx(ratio_violation_mass(ref, eps), abs=1e-15)


def test_factorization_by_enumeration():
    # brute force over every sampled subset of a tiny table
    k, beta, eps = 2, 0.5, 0.9
    d_rows = ["a", "a", "a", "b", "b"]
    d_minus = d_rows[1:]

    def law(rows):
        out = {}
        for keep in itertools.product((0, 1), repeat=len(rows)):
            w = math.prod(beta if x else 1 - beta for x in keep)
            counts = {}
            for r, x in zip(rows, keep):
                counts[r] = counts.get(r, 0) + x
            release = tuple(sorted((r, c) for r, c in counts.items() if c >= k))
            out[release] = out.get(release, 0.0) + w
        return FiniteDistribution(out)

    full = NeighborPair(law(d_rows), law(d_minus))
    single = NeighborPair(CensoredBinomial(3, k, beta).dist, CensoredBinomial(2, k, beta).dist)
    assert hockey_stick_delta(full, eps) == pytest.approx(hockey_stick_delta(single, eps), abs=1e-15)


def test_verify_strongly_safe_report():
    r = verify_strongly_safe(20, 0.1, 0.5, 500)
    assert r["pass"] and r["check"] == "oracle"
    assert r["oracle_argmax_n"] == r["argmax_n"] and r["argmax_in_range"]
    short = verify_strongly_safe(20, 0.2, 0.3, 40)
    assert short["pass"] and short["observed"] <= short["bound"]


def test_verify_amplification_example():
    r = verify_amplification(5, 0.4, 0.5, 1.0, 400)
    assert r["pass"]
    assert r["observed"] <= r["bound"] == pytest.approx(0.5 * r["delta1"])
    assert r["beta2"] == pytest.approx(0.2)


def test_closure_checks():
    for check in (check_postprocessing, check_convexity):
        r = check(pairs=300, seed=3)
        assert r["pass"] and r["failures"] == 0


def exact_demo(m, threshold, beta, eps2):
    """Exact probabilities of (not A1 and A2 >= 0.5) under D and D'."""
    pm = binom.pmf(np.arange(m + 1), m, beta)
    males, females = np.meshgrid(np.arange(m + 1), np.arange(m + 1), indexing="ij")
    weight = np.outer(pm, pm)
    scale = 1.0 / (eps2 * beta * 2 * m)

    def branch(females, target):
        size = males + females
        frac = np.divide(males, size, out=np.zeros(size.shape), where=size > 0)
        a2 = laplace.sf(0.5 - frac, scale=scale)
        a1 = (size >= threshold) & ((males > females) ^ target)
        return float(np.sum(weight * np.where(a1, 0.0, a2)))

    on_d = branch(females, False)
    on_d_prime = (1 - beta) * on_d + beta * branch(females + 1, True)
    return on_d, on_d_prime


def test_demo_degenerate_small_population():
    # below the threshold A1 never fires, so only the noisy male fraction matters
    trials = 40_000
    p, p_prime = compose_attack_demo(m_per_gender=5, threshold=100, trials=trials, seed=1)
    exact = exact_demo(5, 100, 0.5, 1.0)
    assert exact[0] == pytest.approx(0.5, abs=0.02)
    assert exact[1] < exact[0]  # an extra female pulls the fraction down
    for g, e in zip((p, p_prime), exact):
        assert abs(g - e) <= 5 * math.sqrt(e * (1 - e) / trials)


def test_demo_deterministic():
    assert compose_attack_demo(trials=5000, seed=4) == compose_attack_demo(trials=5000, seed=4)


@pytest.mark.parametrize("m, threshold", [(150, 20), (300, 40)])
def test_demo_matches_exact_summation(m, threshold):
    trials = 100_000
    exact = exact_demo(m, threshold, 0.5, 1.0)
    got = compose_attack_demo(m_per_gender=m, threshold=threshold, trials=trials, seed=11)
    for g, e in zip(got, exact):
        assert abs(g - e) <= 5 * math.sqrt(e * (1 - e) / trials)
    assert exact[1] > exact[0]
