"""Iterated-simulation weight learning.

Each outer iteration plays a full multi-period market with the current
weight table, measures how over- or under-represented every pair type is in
the closing queue relative to the arrival population, and maps that ratio
through a monotone update function to get the next table.  Tables are
rescaled after every update so the smallest weight is exactly 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .enumeration import EnumerationLimits
from .harness import simulate_replication
from .model import PairType, all_pair_types
from .pool import PoolConfig, population_proportion
from .solver import DEFAULT_TIMEOUT
from .weights import Scheme, WeightTable

LIN = "lin"
EXP = "exp"

# The a-parameters of the seven stock learners.
STOCK_RULES = (("lin", 1.0), ("lin", 2.0), ("exp", 1.0), ("exp", 3.0),
               ("exp", 5.0), ("exp", 7.0), ("exp", 9.0))


class LearningError(RuntimeError):
    """A learning run aborted; the message names the failing iteration."""


@dataclass(frozen=True)
class UpdateRule:
    """A monotone map from queue/population ratios to raw weights.

    The linear family is f(x) = 1 + x/a.  The exponential family is
    f(x) = (a+1) - a*exp(-x): increasing, f(0) = 1, approaching a+1 from
    below, so amplification is bounded.  ``literal_exp_sign`` flips the
    exponent to the decreasing variant f(x) = (a+1) - a*exp(x); that form is
    kept only for auditing, since it inverts the intended ordering and goes
    negative for large x.
    """

    family: str
    a: float
    literal_exp_sign: bool = False

    def __post_init__(self) -> None:
        if self.family not in (LIN, EXP):
            raise ValueError(f"unknown update family {self.family!r}")
        if self.a <= 0:
            raise ValueError("update parameter a must be positive")

    @classmethod
    def lin(cls, a: float) -> "UpdateRule":
        return cls(LIN, a)

    @classmethod
    def exp(cls, a: float) -> "UpdateRule":
        return cls(EXP, a)

    @property
    def label(self) -> str:
        suffix = int(self.a) if float(self.a).is_integer() else self.a
        return f"{self.family.capitalize()}({suffix})"

    def raw_weight(self, x: float) -> float:
        if not math.isfinite(x) or x < 0:
            raise LearningError(f"queue/population ratio must be finite, got {x}")
        if self.family == LIN:
            return 1.0 + x / self.a
        if self.literal_exp_sign:
            return (self.a + 1.0) - self.a * math.exp(x)
        return (self.a + 1.0) - self.a * math.exp(-x)


def update_weights(
    rule: UpdateRule,
    que: Mapping[PairType, float],
    pop: Mapping[PairType, float],
    ndad_penalty: float = 0.0,
) -> WeightTable:
    """Next weight table from queue and population proportions.

    Types absent from the queue get ratio 0, hence raw weight f(0) = 1.  All
    raw weights are divided by their minimum so the table bottoms out at
    exactly 1 and ratios between types are preserved.
    """
    raw: dict[PairType, float] = {}
    for tau in all_pair_types():
        p = pop.get(tau, 0.0)
        if p <= 0:
            raise LearningError(f"population proportion must be positive for {tau}")
        raw[tau] = rule.raw_weight(que.get(tau, 0.0) / p)
    lowest = min(raw.values())
    if lowest <= 0:
        raise LearningError(
            f"minimum raw weight {lowest} is not positive; cannot rescale "
            "(the literal exponential sign does this for large ratios)"
        )
    return WeightTable({tau: w / lowest for tau, w in raw.items()}, ndad_penalty)


@dataclass(frozen=True)
class LearningConfig:
    """One learning run: market setup, caps, penalty, and the outer loop length."""

    pool: PoolConfig = PoolConfig()
    max_cycle: int = 5
    max_chain: int = 5
    ndad_penalty: float = 0.0
    outer_iterations: int = 50
    seed: int = 0
    queue_window: int = 1  # trailing periods averaged into the queue snapshot
    solver_timeout: float = DEFAULT_TIMEOUT
    candidate_budget: int = 5_000_000

    def __post_init__(self) -> None:
        if self.outer_iterations < 1:
            raise ValueError("outer_iterations must be at least 1")
        if self.queue_window < 1:
            raise ValueError("queue_window must be at least 1")

    def limits(self) -> EnumerationLimits:
        return EnumerationLimits(
            max_cycle=self.max_cycle,
            max_chain=self.max_chain,
            candidate_budget=self.candidate_budget,
        )


@dataclass(frozen=True)
class LearningStep:
    """What one outer iteration saw and produced."""

    iteration: int
    queue_proportions: dict[PairType, float]
    table: WeightTable


def run_learning(
    cfg: LearningConfig,
    rule: UpdateRule,
    trace: list[LearningStep] | None = None,
) -> WeightTable:
    """Learn a weight table by repeated simulation.

    Starts from the all-ones table, plays ``outer_iterations`` full runs
    (each on its own child stream of ``cfg.seed``), and updates after each.
    Returns the table produced by the final update.  Pass ``trace`` to record
    every step.
    """
    pop = {tau: population_proportion(cfg.pool, tau) for tau in all_pair_types()}
    table = WeightTable.uniform(1.0, cfg.ndad_penalty)
    limits = cfg.limits()
    children = np.random.SeedSequence(cfg.seed).spawn(cfg.outer_iterations)
    for t, child in enumerate(children):
        scheme = Scheme.learned(table, cfg.ndad_penalty)
        try:
            result = simulate_replication(
                scheme,
                cfg.pool,
                limits,
                child,
                replication=t,
                solver_timeout=cfg.solver_timeout,
                track_type_history=cfg.queue_window > 1,
            )
        except Exception as exc:
            raise LearningError(f"iteration {t} aborted: {exc}") from exc
        if cfg.queue_window > 1 and result.type_history:
            window = result.type_history[-cfg.queue_window:]
            que = {
                tau: math.fsum(h[tau] for h in window) / len(window)
                for tau in all_pair_types()
            }
        else:
            que = result.type_proportions
        table = update_weights(rule, que, pop, cfg.ndad_penalty)
        if trace is not None:
            trace.append(LearningStep(iteration=t, queue_proportions=que, table=table))
    return table
