"""Sampling, recoding and suppression: the publishing mechanism.

Randomness comes from numpy's PCG64 generator seeded through
``numpy.random.default_rng``. In :func:`sample`, row ``i`` is kept iff the
``i``-th uniform draw of the seeded stream is below ``beta``, so a row's fate
depends only on ``(seed, i)``.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from .data import Dataset, Row
from .errors import DomainError
from .hierarchy import HierarchySpec, RecodingScheme, row_recoder
from .privacy import delta_esafe, delta_strongly_safe, min_epsilon

# Selection draws come from a stream distinct from the sampling stream.
SELECTION_STREAM = 1


@dataclass
class AnonymizedDataset:
    """Generalized tuples with their published multiplicities.

    Every class in ``counts`` has multiplicity at least ``k``.
    """

    columns: tuple[str, ...]
    counts: Counter
    k: int
    suppressed_classes: int = 0
    suppressed_rows: int = 0

    def rows(self) -> list[Row]:
        return sorted(Counter(self.counts).elements())

    def __len__(self) -> int:
        return sum(self.counts.values())


@dataclass
class Release:
    data: AnonymizedDataset
    report: dict[str, Any] = field(default_factory=dict)


def _check_beta(beta: float) -> None:
    if not 0.0 < beta < 1.0:
        raise DomainError(f"beta must lie in (0, 1), got {beta}")


def _check_k(k: int) -> None:
    if int(k) != k or k < 1:
        raise DomainError(f"k must be an integer >= 1, got {k}")


def sample(d: Dataset, beta: float, seed: int) -> Dataset:
    """Keep each row independently with probability ``beta``."""
    _check_beta(beta)
    draws = np.random.default_rng(seed).random(len(d.rows))
    kept = [row for row, u in zip(d.rows, draws) if u < beta]
    return Dataset(d.columns, kept, kinds=d.kinds)


def generalized_counts(g: RecodingScheme, h: HierarchySpec, d: Dataset) -> Counter:
    recode_row = row_recoder(g, h, d.columns)
    return Counter(recode_row(row) for row in d.rows)


def apply_suppress(g: RecodingScheme, h: HierarchySpec, d: Dataset, k: int) -> AnonymizedDataset:
    """Recode every row, then drop each generalized tuple seen fewer than ``k`` times."""
    _check_k(k)
    counts = generalized_counts(g, h, d)
    kept = Counter({t: c for t, c in counts.items() if c >= k})
    small = [c for c in counts.values() if c < k]
    return AnonymizedDataset(d.columns, kept, int(k), len(small), sum(small))


def quality(g: RecodingScheme, h: HierarchySpec, d: Dataset, k: int) -> int:
    """Negated number of generalized classes that would be suppressed.

    Adding or removing one tuple moves one class count by one, so this
    changes by at most 1 between neighbours.
    """
    return -sum(1 for c in generalized_counts(g, h, d).values() if 1 <= c < k)


def selection_probabilities(qualities: Sequence[float], sensitivity: float, epsilon1: float) -> np.ndarray:
    if not len(qualities):
        raise DomainError("no candidates to select from")
    if not sensitivity > 0:
        raise DomainError(f"sensitivity must be positive, got {sensitivity}")
    if not epsilon1 > 0:
        raise DomainError(f"epsilon1 must be positive, got {epsilon1}")
    scores = np.asarray(qualities, dtype=float) * (epsilon1 / (2.0 * sensitivity))
    w = np.exp(scores - scores.max())
    return w / w.sum()


def exp_mech_select(
    candidates: Sequence[RecodingScheme],
    qualities: Sequence[float],
    sensitivity: float,
    epsilon1: float,
    seed,
) -> RecodingScheme:
    """Exponential mechanism: pick candidate ``i`` w.p. proportional to ``exp(eps1 q_i / (2 sens))``."""
    if len(candidates) != len(qualities):
        raise DomainError("candidates and qualities differ in length")
    probs = selection_probabilities(qualities, sensitivity, epsilon1)
    u = np.random.default_rng(seed).random()
    i = int(np.searchsorted(np.cumsum(probs), u, side="right"))
    return candidates[min(i, len(candidates) - 1)]


def _report(d, sampled, out, g, h, k, beta, seed, epsilon, epsilon1, delta) -> dict[str, Any]:
    return {
        "k": int(k),
        "beta": beta,
        "epsilon": epsilon,
        "epsilon1": epsilon1,
        "delta": delta,
        "seed": seed,
        "input_rows": len(d),
        "sampled_rows": len(sampled),
        "published_rows": len(out),
        "suppressed_classes": out.suppressed_classes,
        "scheme": g.describe(h),
    }


def strongly_safe_publish(
    d: Dataset,
    g: RecodingScheme,
    h: HierarchySpec,
    k: int,
    beta: float,
    seed: int,
    epsilon: float | None = None,
) -> Release:
    """Sample, then recode with the fixed scheme ``g`` and suppress small classes.

    ``g`` must be chosen without looking at ``d``. When ``epsilon`` is given
    the report carries the matching delta.
    """
    _check_k(k)
    _check_beta(beta)
    g.check(h)
    if epsilon is not None and epsilon < min_epsilon(beta):
        raise DomainError(f"epsilon={epsilon} below -ln(1-beta) = {min_epsilon(beta):.6g}")
    sampled = sample(d, beta, seed)
    out = apply_suppress(g, h, sampled, k)
    delta = None if epsilon is None else delta_strongly_safe(k, beta, epsilon)
    return Release(out, _report(d, sampled, out, g, h, k, beta, seed, epsilon, 0.0, delta))


def esafe_publish(
    d: Dataset,
    h: HierarchySpec,
    candidates: Sequence[RecodingScheme],
    epsilon1: float,
    k: int,
    beta: float,
    seed: int,
    epsilon: float | None = None,
) -> Release:
    """Choose a scheme privately on the full input, then publish as in the fixed-scheme case."""
    _check_k(k)
    _check_beta(beta)
    if not candidates:
        raise DomainError("no candidate schemes")
    if epsilon is not None and epsilon < min_epsilon(beta) + epsilon1:
        raise DomainError(
            f"epsilon={epsilon} below -ln(1-beta) + epsilon1 = {min_epsilon(beta) + epsilon1:.6g}"
        )
    qualities = [quality(g, h, d, k) for g in candidates]
    g = exp_mech_select(candidates, qualities, 1.0, epsilon1, [seed, SELECTION_STREAM])
    sampled = sample(d, beta, seed)
    out = apply_suppress(g, h, sampled, k)
    delta = None if epsilon is None else delta_esafe(k, beta, epsilon, epsilon1)
    report = _report(d, sampled, out, g, h, k, beta, seed, epsilon, epsilon1, delta)
    report["candidate_qualities"] = qualities
    return Release(out, report)
