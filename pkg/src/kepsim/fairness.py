"""Group welfare: weighted power means over cPRA-group utilities.

A group's utility is its population weight divided by its end-of-run queue
count, so utilities fall as a group accumulates in the pool and as the pool
grows.  The power mean's exponent selects the welfare notion: 1 utilitarian,
0 Nash (weighted geometric mean), -inf egalitarian (minimum).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .model import BAND_ALPHAS

UTILITARIAN_RHO = 1.0
NASH_RHO = 0.0
EGALITARIAN_RHO = float("-inf")


class ZeroQueueWarning(UserWarning):
    """A group had an empty queue; its count was floored at 1 to keep scores finite."""


@dataclass(frozen=True)
class GroupProfile:
    """Population weights and queue counts for the five cPRA groups."""

    queue_counts: tuple[float, ...]
    alphas: tuple[float, ...] = BAND_ALPHAS

    def __post_init__(self) -> None:
        if len(self.queue_counts) != len(self.alphas):
            raise ValueError("queue_counts and alphas must have equal length")
        if abs(math.fsum(self.alphas) - 1.0) > 1e-12:
            raise ValueError("alphas must sum to 1")
        if any(not math.isfinite(q) or q < 0 for q in self.queue_counts):
            raise ValueError("queue counts must be finite and non-negative")


def group_utilities(profile: GroupProfile) -> np.ndarray:
    """u_j = alpha_j / q_j, with empty queues floored at one member.

    The floor keeps the score finite; it is flagged with
    :class:`ZeroQueueWarning` so reports can mark the run.
    """
    q = np.asarray(profile.queue_counts, dtype=float)
    if np.any(q == 0):
        warnings.warn(
            ZeroQueueWarning(
                f"empty queue for groups {list(np.nonzero(q == 0)[0] + 1)}; "
                "counts floored at 1"
            ),
            stacklevel=2,
        )
        q = np.maximum(q, 1.0)
    return np.asarray(profile.alphas, dtype=float) / q


def power_mean(u: Sequence[float], alphas: Sequence[float], rho: float) -> float:
    """Weighted power mean of utilities with exponent rho.

    rho = 0 is evaluated in log space, rho = +/-inf as max/min; other finite
    values via the defining expression (sum alpha_i u_i^rho)^(1/rho).
    """
    uu = np.asarray(u, dtype=float)
    aa = np.asarray(alphas, dtype=float)
    if uu.shape != aa.shape:
        raise ValueError("utilities and weights must have equal length")
    if abs(math.fsum(aa.tolist()) - 1.0) > 1e-12:
        raise ValueError("alphas must sum to 1")
    if rho <= 0 and np.any(uu <= 0):
        raise ValueError("non-positive utilities are undefined for rho <= 0")
    if np.any(uu < 0):
        raise ValueError("utilities must be non-negative")
    if math.isinf(rho):
        return float(np.min(uu)) if rho < 0 else float(np.max(uu))
    if rho == 0:
        return float(np.exp(np.sum(aa * np.log(uu))))
    return float(np.sum(aa * np.power(uu, rho)) ** (1.0 / rho))


def scaled_measure(score: float, baseline_score: float) -> float:
    """Welfare score rescaled so the baseline system sits at exactly 1."""
    if not baseline_score > 0:
        raise ValueError(f"baseline score must be positive, got {baseline_score}")
    return score / baseline_score


@dataclass(frozen=True)
class WelfareScores:
    """The three headline welfare scores of one queue profile."""

    utilitarian: float
    nash: float
    egalitarian: float

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.utilitarian, self.nash, self.egalitarian)

    def scaled_by(self, baseline: "WelfareScores") -> "WelfareScores":
        return WelfareScores(
            utilitarian=scaled_measure(self.utilitarian, baseline.utilitarian),
            nash=scaled_measure(self.nash, baseline.nash),
            egalitarian=scaled_measure(self.egalitarian, baseline.egalitarian),
        )


def welfare_scores(
    queue_counts: Sequence[float], alphas: Sequence[float] = BAND_ALPHAS
) -> WelfareScores:
    """Utilitarian, Nash and egalitarian scores of one queue composition."""
    profile = GroupProfile(tuple(queue_counts), tuple(alphas))
    u = group_utilities(profile)
    return WelfareScores(
        utilitarian=power_mean(u, profile.alphas, UTILITARIAN_RHO),
        nash=power_mean(u, profile.alphas, NASH_RHO),
        egalitarian=power_mean(u, profile.alphas, EGALITARIAN_RHO),
    )
