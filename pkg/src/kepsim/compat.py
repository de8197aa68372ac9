"""Blood-group compatibility and stochastic crossmatch arc generation."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Union

import numpy as np

from .model import BloodType, ExchangeGraph, NdadNode, PairNode

if TYPE_CHECKING:
    from .pool import WaitingPool

DonorNode = Union[PairNode, NdadNode]


def blood_compatible(donor: BloodType, patient: BloodType) -> bool:
    """O donates to anyone; AB receives from anyone; otherwise groups must match."""
    return donor == BloodType.O or donor == patient or patient == BloodType.AB


@dataclass
class CompatibilityCache:
    """Memoized crossmatch verdicts keyed by (donor node id, patient node id).

    A verdict is sampled once, the first time a donor and patient meet, and
    never re-sampled: tissue-level incompatibility is a fixed fact about the
    two people, not something that changes between matching rounds.
    """

    decided: dict[tuple[int, int], bool] = field(default_factory=dict)


def sample_arc(
    rng: np.random.Generator,
    donor: DonorNode,
    patient: PairNode,
    cache: CompatibilityCache,
) -> bool:
    """Decide whether donor's kidney can go to patient.

    Blood-incompatible combinations are always rejected.  Blood-compatible
    ones are rejected with probability equal to the patient's cPRA, drawn
    once per (donor, patient) encounter and memoized in ``cache``.
    """
    if donor.id == patient.id:
        raise ValueError("a pair's own donor never points to its own patient")
    if not blood_compatible(donor.donor_blood, patient.patient_blood):
        return False
    key = (donor.id, patient.id)
    verdict = cache.decided.get(key)
    if verdict is None:
        verdict = bool(rng.random() >= patient.cpra)
        cache.decided[key] = verdict
    return verdict


def build_graph(
    pool: "WaitingPool",
    cache: CompatibilityCache,
    rng: np.random.Generator,
) -> ExchangeGraph:
    """Assemble the exchange graph for the current waiting pool.

    Every waiting node appears; arcs run from any donor (paired or altruistic)
    to any other pair's patient that passes :func:`sample_arc`.  New verdicts
    are drawn in ascending (donor id, patient id) order so a given rng stream
    always produces the same graph.
    """
    pairs = dict(sorted(pool.pairs.items()))
    ndads = dict(sorted(pool.ndads.items()))
    patients = list(pairs.values())
    arcs: list[tuple[int, int]] = []
    donors: list[DonorNode] = list(pairs.values()) + list(ndads.values())
    donors.sort(key=lambda n: n.id)
    for donor in donors:
        for patient in patients:
            if donor.id == patient.id:
                continue
            if sample_arc(rng, donor, patient, cache):
                arcs.append((donor.id, patient.id))
    return ExchangeGraph(pairs=pairs, ndads=ndads, arcs=frozenset(arcs))
