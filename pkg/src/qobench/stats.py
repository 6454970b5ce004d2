"""Statistical primitives for comparing execution-time distributions.

The Mann-Whitney U test is the workhorse: execution times are not plausibly
normal, so comparisons are rank-based. For small samples (both sides <= 12)
the p-value is exact, computed over the full permutation distribution of the
observed midranks via a subset-sum dynamic program; larger samples use the
tie-corrected normal approximation with continuity correction.

Also here: speedup/slowdown ratios, the coefficient of determination, and
seeded percentile-bootstrap confidence intervals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from .errors import QobenchError

EXACT_LIMIT = 12  # exact permutation p whenever both samples are at most this

Alternative = Literal["two_sided", "less", "greater"]


class StatsError(QobenchError):
    pass


class EmptySample(StatsError):
    pass


class NonPositiveTime(StatsError):
    pass


class LengthMismatch(StatsError):
    pass


class ZeroVariance(StatsError):
    pass


class TooFewPoints(StatsError):
    pass


@dataclass(frozen=True)
class TestResult:
    statistic: float
    p_value: float
    alternative: Alternative
    method: Literal["exact_permutation", "normal_approx"]


def _midranks(values: Sequence[float]) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    order = np.argsort(arr, kind="mergesort")
    ranks = np.empty(len(arr), dtype=float)
    i = 0
    while i < len(arr):
        j = i
        while j + 1 < len(arr) and arr[order[j + 1]] == arr[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def _exact_cdf(ranks2: list[int], n1: int) -> tuple[np.ndarray, float]:
    """Distribution of the doubled x-rank-sum over all C(N, n1) subsets.

    ``ranks2`` are the pooled midranks times two (integers even under ties).
    Returns (counts indexed by doubled rank sum, total subset count).
    """
    max_sum = sum(sorted(ranks2, reverse=True)[:n1])
    counts = np.zeros((n1 + 1, max_sum + 1), dtype=float)
    counts[0][0] = 1.0
    for r in ranks2:
        for k in range(min(n1, len(ranks2)) - 1, -1, -1):
            row = counts[k]
            nz = np.nonzero(row)[0]
            for s in nz[::-1]:
                if s + r <= max_sum:
                    counts[k + 1][s + r] += row[s]
    total = math.comb(len(ranks2), n1)
    return counts[n1], float(total)


def mann_whitney_u(
    x: Sequence[float],
    y: Sequence[float],
    alternative: Alternative = "two_sided",
) -> TestResult:
    """Rank-sum test of x against y; statistic is U for the first sample.

    ``less`` asks whether x is stochastically smaller than y (small U),
    ``greater`` the reverse. Ties get midranks in both the statistic and the
    exact permutation distribution.
    """
    if alternative not in ("two_sided", "less", "greater"):
        raise ValueError(f"unknown alternative {alternative!r}")
    n1, n2 = len(x), len(y)
    if n1 == 0 or n2 == 0:
        raise EmptySample("both samples must be non-empty")
    pooled = list(x) + list(y)
    ranks = _midranks(pooled)
    r1 = float(ranks[:n1].sum())
    u1 = r1 - n1 * (n1 + 1) / 2.0

    if n1 <= EXACT_LIMIT and n2 <= EXACT_LIMIT:
        ranks2 = [int(round(2 * r)) for r in ranks]
        dist, total = _exact_cdf(ranks2, n1)
        # doubled rank sum s corresponds to U = s/2 - n1(n1+1)/2
        target2 = int(round(2 * r1))
        sums = np.arange(len(dist))
        p_le = float(dist[sums <= target2].sum()) / total
        p_ge = float(dist[sums >= target2].sum()) / total
        if alternative == "less":
            p = p_le
        elif alternative == "greater":
            p = p_ge
        else:
            p = min(1.0, 2.0 * min(p_le, p_ge))
        return TestResult(statistic=u1, p_value=p, alternative=alternative, method="exact_permutation")

    # Tie-corrected normal approximation with continuity correction.
    n = n1 + n2
    _, tie_counts = np.unique(np.asarray(pooled, dtype=float), return_counts=True)
    tie_term = float(((tie_counts**3) - tie_counts).sum())
    sigma_sq = n1 * n2 / 12.0 * ((n + 1) - tie_term / (n * (n - 1)))
    if sigma_sq <= 0:
        # every pooled value identical: no evidence either way
        return TestResult(statistic=u1, p_value=1.0, alternative=alternative, method="normal_approx")
    mu = n1 * n2 / 2.0
    sd = math.sqrt(sigma_sq)

    def sf(z: float) -> float:
        return 0.5 * math.erfc(z / math.sqrt(2.0))

    if alternative == "less":
        p = 1.0 - sf((u1 + 0.5 - mu) / sd)
    elif alternative == "greater":
        p = sf((u1 - 0.5 - mu) / sd)
    else:
        z = (abs(u1 - mu) - 0.5) / sd
        p = min(1.0, 2.0 * sf(max(z, 0.0)))
    return TestResult(statistic=u1, p_value=p, alternative=alternative, method="normal_approx")


@dataclass(frozen=True)
class SpeedupResult:
    factor: float
    direction: Literal["speedup", "slowdown"]

    def __str__(self) -> str:
        return f"{self.factor:.1f}x {self.direction}"


def speedup_factor(baseline_ms: float, candidate_ms: float) -> SpeedupResult:
    """Ratio of the slower to the faster time, >= 1, with a direction flag.

    ``speedup`` when the candidate beats the baseline; equal times report a
    1.0x slowdown (the direction is moot at factor one).
    """
    if baseline_ms <= 0 or candidate_ms <= 0:
        raise NonPositiveTime(f"times must be positive, got {baseline_ms}, {candidate_ms}")
    if candidate_ms < baseline_ms:
        return SpeedupResult(factor=baseline_ms / candidate_ms, direction="speedup")
    return SpeedupResult(factor=candidate_ms / baseline_ms, direction="slowdown")


def r_squared(y: Sequence[float], y_hat: Sequence[float]) -> float:
    """Coefficient of determination, 1 - SS_res/SS_tot.

    Negative whenever the predictions do worse than the observed mean.
    """
    if len(y) != len(y_hat):
        raise LengthMismatch(f"{len(y)} observed vs {len(y_hat)} predicted")
    if len(y) < 2:
        raise LengthMismatch("need at least 2 points")
    obs = np.asarray(y, dtype=float)
    pred = np.asarray(y_hat, dtype=float)
    ss_tot = float(((obs - obs.mean()) ** 2).sum())
    if ss_tot == 0.0:
        raise ZeroVariance("observed values are all equal")
    ss_res = float(((obs - pred) ** 2).sum())
    return 1.0 - ss_res / ss_tot


def bootstrap_ci(
    sample: Sequence[float],
    statistic: Literal["mean", "sum"] = "mean",
    level: float = 0.95,
    seed: int = 0,
    resamples: int = 10_000,
) -> tuple[float, float]:
    """Seeded percentile bootstrap interval for the mean or the sum."""
    if len(sample) < 2:
        raise TooFewPoints("bootstrap needs at least 2 points")
    if not 0.0 < level < 1.0:
        raise ValueError(f"level must be in (0, 1), got {level}")
    if statistic not in ("mean", "sum"):
        raise ValueError(f"unknown statistic {statistic!r}")
    arr = np.asarray(sample, dtype=float)
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, len(arr), size=(resamples, len(arr)))
    draws = arr[idx].mean(axis=1) if statistic == "mean" else arr[idx].sum(axis=1)
    alpha = (1.0 - level) / 2.0
    low, high = np.quantile(draws, [alpha, 1.0 - alpha])
    return float(low), float(high)


def format_factor(result: SpeedupResult) -> str:
    """One-decimal presentation used in comparison tables."""
    return f"{result.factor:.1f}x {result.direction}"


def format_p(p: float) -> str:
    """Three-decimal presentation used in comparison tables."""
    return f"{p:.3f}"
