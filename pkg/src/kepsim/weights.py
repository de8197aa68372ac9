"""Arc scoring schemes: unit weights, the KPD point system, learned tables.

All three schemes realize node weights on the delivering arc: the score of an
arc is the score of the patient receiving the kidney (plus, for the point
system, terms that look at the donor).  A chain additionally pays the
altruist penalty W once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Union

from .model import (
    BloodType,
    Candidate,
    ExchangeGraph,
    NdadNode,
    PairNode,
    PairType,
    all_pair_types,
    pair_type_of,
)

MYOPIC = "myopic"
KPD = "kpd"
LEARNED = "learned"

# Point values of the expert scheme, restricted to the attributes the
# simulated population actually carries (blood groups and cPRA).
KPD_ANY_TRANSPLANT = 100.0
KPD_HIGHLY_SENSITIZED = 125.0
KPD_SENSITIZED_THRESHOLD = 0.80
KPD_O_TO_O = 75.0
KPD_IDENTICAL_ABO = 5.0  # A to A, B to B, AB to AB; O to O has its own bonus

# Conventional penalties for the "+" variants of the two baselines.
MYOPIC_PLUS_PENALTY = -2.0
KPD_PLUS_PENALTY = -150.0


@dataclass(frozen=True)
class WeightTable:
    """Learned score per pair type, plus the altruist penalty it was tuned with."""

    pair_weight: Mapping[PairType, float]
    ndad_penalty: float = 0.0

    def __post_init__(self) -> None:
        missing = [tau for tau in all_pair_types() if tau not in self.pair_weight]
        if missing:
            raise ValueError(f"weight table is missing {len(missing)} pair types")

    def min_weight(self) -> float:
        return min(self.pair_weight.values())

    @classmethod
    def uniform(cls, value: float = 1.0, ndad_penalty: float = 0.0) -> "WeightTable":
        return cls({tau: value for tau in all_pair_types()}, ndad_penalty)


@dataclass(frozen=True)
class Scheme:
    """A weighting rule for arcs plus the altruist penalty W."""

    kind: str
    ndad_penalty: float = 0.0
    table: WeightTable | None = None

    def __post_init__(self) -> None:
        if self.kind not in (MYOPIC, KPD, LEARNED):
            raise ValueError(f"unknown scheme kind {self.kind!r}")
        if self.kind == LEARNED and self.table is None:
            raise ValueError("a learned scheme needs a weight table")

    @classmethod
    def myopic(cls, ndad_penalty: float = 0.0) -> "Scheme":
        return cls(MYOPIC, ndad_penalty)

    @classmethod
    def myopic_plus(cls) -> "Scheme":
        return cls(MYOPIC, MYOPIC_PLUS_PENALTY)

    @classmethod
    def kpd(cls, ndad_penalty: float = 0.0) -> "Scheme":
        return cls(KPD, ndad_penalty)

    @classmethod
    def kpd_plus(cls) -> "Scheme":
        return cls(KPD, KPD_PLUS_PENALTY)

    @classmethod
    def learned(cls, table: WeightTable, ndad_penalty: float | None = None) -> "Scheme":
        if ndad_penalty is None:
            ndad_penalty = table.ndad_penalty
        return cls(LEARNED, ndad_penalty, table)

    @property
    def label(self) -> str:
        return self.kind


DonorNode = Union[PairNode, NdadNode]


def arc_weight(scheme: Scheme, donor: DonorNode, patient: PairNode) -> float:
    """Score of the transplant delivered along (donor -> patient)."""
    if scheme.kind == MYOPIC:
        return 1.0
    if scheme.kind == LEARNED:
        assert scheme.table is not None
        return scheme.table.pair_weight[pair_type_of(patient)]
    points = KPD_ANY_TRANSPLANT
    if patient.cpra >= KPD_SENSITIZED_THRESHOLD:
        points += KPD_HIGHLY_SENSITIZED
    if donor.donor_blood == BloodType.O and patient.patient_blood == BloodType.O:
        points += KPD_O_TO_O
    elif donor.donor_blood == patient.patient_blood:
        points += KPD_IDENTICAL_ABO
    return points


def candidate_weight(scheme: Scheme, cand: Candidate, graph: ExchangeGraph) -> float:
    """Total score of a candidate: its arcs, plus W once if it is a chain.

    Summation uses ``math.fsum`` so the result is independent of arc order.
    """
    ids = cand.node_ids
    edges = list(zip(ids, ids[1:]))
    if cand.kind == "cycle":
        edges.append((ids[-1], ids[0]))
    terms = []
    for tail, head in edges:
        donor = graph.pairs.get(tail) or graph.ndads[tail]
        terms.append(arc_weight(scheme, donor, graph.pairs[head]))
    if cand.kind == "chain":
        terms.append(scheme.ndad_penalty)
    return math.fsum(terms)


# ---------------------------------------------------------------------------
# Weight-file format: one "donor patient band weight" line per pair type in
# canonical order, then a final "W <value>" line.
# ---------------------------------------------------------------------------


def format_weight_table(table: WeightTable) -> str:
    lines = [
        f"{tau.donor_blood} {tau.patient_blood} {tau.band} {table.pair_weight[tau]!r}"
        for tau in all_pair_types()
    ]
    lines.append(f"W {table.ndad_penalty!r}")
    return "\n".join(lines) + "\n"


def parse_weight_table(text: str) -> WeightTable:
    pair_weight: dict[PairType, float] = {}
    ndad_penalty = 0.0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if parts[0] == "W":
            if len(parts) != 2:
                raise ValueError(f"line {lineno}: malformed W line {raw!r}")
            ndad_penalty = float(parts[1])
            continue
        if len(parts) != 4:
            raise ValueError(f"line {lineno}: expected 4 fields, got {raw!r}")
        tau = PairType(BloodType.parse(parts[0]), BloodType.parse(parts[1]), int(parts[2]))
        if not 1 <= tau.band <= 5:
            raise ValueError(f"line {lineno}: band out of range in {raw!r}")
        if tau in pair_weight:
            raise ValueError(f"line {lineno}: duplicate pair type {tau}")
        pair_weight[tau] = float(parts[3])
    return WeightTable(pair_weight, ndad_penalty)


def save_weight_table(table: WeightTable, path: str) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(format_weight_table(table))


def load_weight_table(path: str) -> WeightTable:
    with open(path, "r", encoding="ascii") as fh:
        return parse_weight_table(fh.read())
