"""Dynamic waiting pool: Poisson arrivals, matched-node removal, wait ledger.

One :class:`WaitingPool` lives for one simulated run.  Node ids are handed
out sequentially in arrival order (pairs and altruists share the counter) so
every downstream tie-break is reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .model import (
    BAND_ALPHAS,
    BLOOD_TYPES,
    CPRA_BANDS,
    BloodType,
    NdadNode,
    PairNode,
    PairType,
    Selection,
    all_pair_types,
    pair_type_of,
)

MONTHS_PER_PERIOD = 4

# Blood-type frequencies over (O, A, B, AB), applied to donors and patients
# alike.  The 3% O share is what the program's registrant statistics give;
# it is kept verbatim here and is configurable, not corrected.
DEFAULT_BLOOD_DIST: tuple[float, float, float, float] = (0.03, 0.46, 0.42, 0.09)

DEFAULT_PAIR_RATE = 37.0
DEFAULT_NDAD_RATE = 4.5625
DEFAULT_PERIODS = 50


class PoolDesyncError(RuntimeError):
    """A selection referenced a node that is not currently waiting."""


@dataclass(frozen=True)
class PoolConfig:
    """Arrival rates and type distributions for one simulated market."""

    pair_rate: float = DEFAULT_PAIR_RATE
    ndad_rate: float = DEFAULT_NDAD_RATE
    blood_dist: tuple[float, float, float, float] = DEFAULT_BLOOD_DIST
    band_dist: tuple[float, ...] = BAND_ALPHAS
    periods: int = DEFAULT_PERIODS

    def __post_init__(self) -> None:
        if self.pair_rate < 0 or self.ndad_rate < 0:
            raise ValueError("arrival rates must be non-negative")
        if self.periods < 0:
            raise ValueError("periods must be non-negative")
        for name, dist, n in (
            ("blood_dist", self.blood_dist, 4),
            ("band_dist", self.band_dist, len(CPRA_BANDS)),
        ):
            if len(dist) != n:
                raise ValueError(f"{name} needs {n} entries")
            if any(p < 0 for p in dist):
                raise ValueError(f"{name} has a negative probability")
            if abs(math.fsum(dist) - 1.0) > 1e-12:
                raise ValueError(f"{name} must sum to 1, got {math.fsum(dist)!r}")


def poisson_draw(rng: np.random.Generator, lam: float) -> int:
    """Poisson sample by CDF inversion: one uniform, then a sequential search.

    Keeps the consumption of the underlying stream independent of library
    internals, so a seed pins the whole arrival history.
    """
    if lam < 0:
        raise ValueError("Poisson rate must be non-negative")
    if lam == 0:
        return 0
    u = rng.random()
    k = 0
    p = math.exp(-lam)
    cdf = p
    while u > cdf and p > 0.0 and k < 100_000:
        k += 1
        p *= lam / k
        cdf += p
    return k


def draw_categorical(rng: np.random.Generator, probs: tuple[float, ...]) -> int:
    """Index sampled from a probability vector, by inversion of one uniform."""
    u = rng.random()
    cdf = 0.0
    for i, p in enumerate(probs):
        cdf += p
        if u < cdf:
            return i
    return len(probs) - 1


def draw_blood_type(rng: np.random.Generator, cfg: PoolConfig) -> BloodType:
    return BLOOD_TYPES[draw_categorical(rng, cfg.blood_dist)]


def draw_cpra(rng: np.random.Generator, cfg: PoolConfig) -> float:
    """Pick a band from the configured distribution, then a uniform cPRA in it."""
    band = CPRA_BANDS[draw_categorical(rng, cfg.band_dist)]
    return band.lower + rng.random() * (band.upper - band.lower)


@dataclass
class WaitLedger:
    """Arrival and (optional) match periods per node id."""

    arrival: dict[int, int] = field(default_factory=dict)
    matched: dict[int, int] = field(default_factory=dict)

    def record_arrival(self, node_id: int, period: int) -> None:
        self.arrival[node_id] = period

    def record_match(self, node_id: int, period: int) -> None:
        if period < self.arrival[node_id]:
            raise ValueError("match period precedes arrival")
        self.matched[node_id] = period

    def wait_months(self, node_id: int, horizon: int) -> int:
        """Months waited until the match, or until the horizon if unmatched."""
        end = self.matched.get(node_id, horizon)
        return MONTHS_PER_PERIOD * (end - self.arrival[node_id])


@dataclass(frozen=True)
class QueueComposition:
    """Waiting pairs grouped by the 80 types and the 5 bands; altruists apart."""

    by_type: dict[PairType, int]
    by_band: tuple[int, int, int, int, int]
    n_ndads: int


class WaitingPool:
    """Waiting pairs and altruists for one run, plus the wait-time ledger."""

    def __init__(self) -> None:
        self.pairs: dict[int, PairNode] = {}
        self.ndads: dict[int, NdadNode] = {}
        self.ledger = WaitLedger()
        self.pairs_arrived = 0
        self.ndads_arrived = 0
        self._next_id = 0

    def _take_id(self) -> int:
        nid = self._next_id
        self._next_id += 1
        return nid

    def arrivals(
        self, cfg: PoolConfig, period: int, rng: np.random.Generator
    ) -> tuple[list[PairNode], list[NdadNode]]:
        """Draw this period's Poisson arrivals and add them to the pool."""
        if period < 0:
            raise ValueError("period must be non-negative")
        n_pairs = poisson_draw(rng, cfg.pair_rate)
        n_ndads = poisson_draw(rng, cfg.ndad_rate)
        new_pairs = []
        for _ in range(n_pairs):
            node = PairNode(
                id=self._take_id(),
                donor_blood=draw_blood_type(rng, cfg),
                patient_blood=draw_blood_type(rng, cfg),
                cpra=draw_cpra(rng, cfg),
                arrival_period=period,
            )
            self.pairs[node.id] = node
            self.ledger.record_arrival(node.id, period)
            new_pairs.append(node)
        new_ndads = []
        for _ in range(n_ndads):
            node = NdadNode(
                id=self._take_id(),
                donor_blood=draw_blood_type(rng, cfg),
                arrival_period=period,
            )
            self.ndads[node.id] = node
            new_ndads.append(node)
        self.pairs_arrived += n_pairs
        self.ndads_arrived += n_ndads
        return new_pairs, new_ndads

    def remove_matched(self, sel: Selection, period: int) -> None:
        """Clear every matched pair and used altruist; record match periods."""
        for cand in sel.candidates:
            ids = cand.node_ids if cand.kind == "cycle" else cand.node_ids[1:]
            for nid in ids:
                if nid not in self.pairs:
                    raise PoolDesyncError(f"matched pair {nid} is not waiting")
            if cand.kind == "chain":
                ndad_id = cand.node_ids[0]
                if ndad_id not in self.ndads:
                    raise PoolDesyncError(f"chain altruist {ndad_id} is not waiting")
                del self.ndads[ndad_id]
            for nid in ids:
                del self.pairs[nid]
                self.ledger.record_match(nid, period)

    def queue_composition(self) -> QueueComposition:
        by_type = {tau: 0 for tau in all_pair_types()}
        by_band = [0, 0, 0, 0, 0]
        for node in self.pairs.values():
            tau = pair_type_of(node)
            by_type[tau] += 1
            by_band[tau.band - 1] += 1
        return QueueComposition(
            by_type=by_type, by_band=tuple(by_band), n_ndads=len(self.ndads)
        )

    def type_proportions(self) -> dict[PairType, float]:
        """Share of each pair type among waiting pairs (all zero when empty)."""
        comp = self.queue_composition()
        total = sum(comp.by_type.values())
        if total == 0:
            return {tau: 0.0 for tau in comp.by_type}
        return {tau: n / total for tau, n in comp.by_type.items()}


def population_proportion(cfg: PoolConfig, tau: PairType) -> float:
    """Probability that a fresh pair has type ``tau`` under the configured draws."""
    return (
        cfg.blood_dist[int(tau.donor_blood)]
        * cfg.blood_dist[int(tau.patient_blood)]
        * cfg.band_dist[tau.band - 1]
    )
