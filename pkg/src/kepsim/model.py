"""Domain types for the exchange graph: nodes, arcs, candidates and selections.

Pairs and altruistic (non-directed) donors are plain immutable records; the
graph, candidates and selections carry enough structure to be validated
independently of whoever produced them.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple


class BloodType(enum.IntEnum):
    """The four blood groups, ordered O < A < B < AB for stable serialization."""

    O = 0
    A = 1
    B = 2
    AB = 3

    def __str__(self) -> str:
        return self.name

    @classmethod
    def parse(cls, text: str) -> "BloodType":
        try:
            return cls[text.strip().upper()]
        except KeyError:
            raise ValueError(f"unknown blood type {text!r}") from None


BLOOD_TYPES: tuple[BloodType, ...] = (
    BloodType.O,
    BloodType.A,
    BloodType.B,
    BloodType.AB,
)


@dataclass(frozen=True)
class CpraBand:
    """One of the five sensitization intervals, with its population probability."""

    index: int  # 1-based
    lower: float
    upper: float
    alpha: float


CPRA_BANDS: tuple[CpraBand, ...] = (
    CpraBand(1, 0.00, 0.00, 0.24),
    CpraBand(2, 0.01, 0.50, 0.29),
    CpraBand(3, 0.51, 0.94, 0.24),
    CpraBand(4, 0.95, 0.96, 0.10),
    CpraBand(5, 0.97, 1.00, 0.13),
)

BAND_ALPHAS: tuple[float, ...] = tuple(b.alpha for b in CPRA_BANDS)
N_BANDS = len(CPRA_BANDS)


def band_of(cpra: float) -> CpraBand:
    """Map a cPRA value in [0, 1] to its band.

    Bands are closed intervals tried lowest-index-first.  Values falling in
    the gaps between intervals (only reachable with a custom cPRA
    distribution) resolve to the first band whose upper end covers them, so
    the mapping is total; in particular anything in (0, 0.01) lands in band 2.
    """
    if not 0.0 <= cpra <= 1.0:
        raise ValueError(f"cpra must be in [0, 1], got {cpra}")
    for band in CPRA_BANDS:
        if cpra <= band.upper:
            return band
    return CPRA_BANDS[-1]


@dataclass(frozen=True)
class PairNode:
    """An incompatible patient-donor pair waiting in the program."""

    id: int
    donor_blood: BloodType
    patient_blood: BloodType
    cpra: float
    arrival_period: int

    def __post_init__(self) -> None:
        if not 0.0 <= self.cpra <= 1.0:
            raise ValueError(f"cpra out of range for node {self.id}: {self.cpra}")


@dataclass(frozen=True)
class NdadNode:
    """A non-directed anonymous donor; only ever the source of a chain."""

    id: int
    donor_blood: BloodType
    arrival_period: int


class PairType(NamedTuple):
    """(donor blood, patient blood, cPRA band index) classification of a pair."""

    donor_blood: BloodType
    patient_blood: BloodType
    band: int


def pair_type_of(node: PairNode) -> PairType:
    """Classify a pair by donor blood, patient blood and cPRA band."""
    return PairType(node.donor_blood, node.patient_blood, band_of(node.cpra).index)


def all_pair_types() -> tuple[PairType, ...]:
    """The 80 pair types in canonical (donor, patient, band) order."""
    return tuple(
        PairType(d, p, b.index)
        for d in BLOOD_TYPES
        for p in BLOOD_TYPES
        for b in CPRA_BANDS
    )


CYCLE = "cycle"
CHAIN = "chain"


@dataclass(frozen=True)
class Candidate:
    """A feasible cycle or chain together with its score under some weighting.

    ``node_ids`` lists the nodes in traversal order.  A cycle is canonicalized
    to start at its minimum node id; a chain always starts at its altruistic
    donor.  Lengths are counted in patients: a cycle of k pairs has k
    patients, a chain of k+1 nodes has k.
    """

    kind: str
    node_ids: tuple[int, ...]
    weight: float

    def __post_init__(self) -> None:
        if self.kind not in (CYCLE, CHAIN):
            raise ValueError(f"unknown candidate kind {self.kind!r}")
        if self.kind == CYCLE and len(self.node_ids) < 2:
            raise ValueError("a cycle needs at least two pairs")
        if self.kind == CHAIN and len(self.node_ids) < 2:
            raise ValueError("a chain needs its donor plus at least one pair")

    @property
    def n_patients(self) -> int:
        return len(self.node_ids) - (1 if self.kind == CHAIN else 0)


@dataclass(frozen=True)
class Selection:
    """A node-disjoint set of candidates with their summed objective."""

    candidates: tuple[Candidate, ...]
    objective: float

    @property
    def n_transplants(self) -> int:
        return sum(c.n_patients for c in self.candidates)

    def node_ids(self) -> set[int]:
        ids: set[int] = set()
        for cand in self.candidates:
            ids.update(cand.node_ids)
        return ids


@dataclass
class ExchangeGraph:
    """Directed compatibility graph over one matching period's waiting pool."""

    pairs: dict[int, PairNode]
    ndads: dict[int, NdadNode]
    arcs: frozenset[tuple[int, int]]
    _succ: dict[int, tuple[int, ...]] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        known = self.pairs.keys() | self.ndads.keys()
        if self.pairs.keys() & self.ndads.keys():
            raise ValueError("pair and altruist ids overlap")
        succ: dict[int, list[int]] = {nid: [] for nid in known}
        for tail, head in self.arcs:
            if tail == head:
                raise ValueError(f"self-arc on node {tail}")
            if tail not in known:
                raise ValueError(f"arc tail {tail} is not a node")
            if head not in self.pairs:
                raise ValueError(f"arc head {head} is not a pair node")
            succ[tail].append(head)
        self._succ = {nid: tuple(sorted(heads)) for nid, heads in succ.items()}

    def successors(self, node_id: int) -> tuple[int, ...]:
        return self._succ[node_id]

    def has_arc(self, tail: int, head: int) -> bool:
        return (tail, head) in self.arcs

    @property
    def n_nodes(self) -> int:
        return len(self.pairs) + len(self.ndads)


def candidate_is_feasible(
    graph: ExchangeGraph, cand: Candidate, max_cycle: int, max_chain: int
) -> bool:
    """Structural check of one candidate against a graph and the length caps."""
    ids = cand.node_ids
    if len(set(ids)) != len(ids):
        return False
    if cand.kind == CYCLE:
        if not 2 <= len(ids) <= max_cycle:
            return False
        if any(i not in graph.pairs for i in ids):
            return False
        closing = [(ids[-1], ids[0])]
        edges = list(zip(ids, ids[1:])) + closing
    else:
        if ids[0] not in graph.ndads:
            return False
        patients = ids[1:]
        if not 1 <= len(patients) <= max_chain:
            return False
        if any(i not in graph.pairs for i in patients):
            return False
        edges = list(zip(ids, ids[1:]))
    return all(graph.has_arc(t, h) for t, h in edges)


def validate_selection(
    graph: ExchangeGraph, sel: Selection, max_cycle: int, max_chain: int
) -> bool:
    """True iff every candidate is feasible, caps hold, and candidates are disjoint."""
    seen: set[int] = set()
    for cand in sel.candidates:
        if not candidate_is_feasible(graph, cand, max_cycle, max_chain):
            return False
        if seen & set(cand.node_ids):
            return False
        seen.update(cand.node_ids)
    return True
