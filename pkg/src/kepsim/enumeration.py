"""Exhaustive enumeration of feasible cycles and chains under length caps.

Cycles are emitted canonicalized to start at their minimum node id, chains
prefix-closed (every shorter realization of a path is its own candidate, so
the packing step is free to stop a chain early).  Output order is
deterministic: cycles first, then chains, each in lexicographic node-id
order.
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import CHAIN, CYCLE, Candidate, ExchangeGraph
from .weights import Scheme, candidate_weight

DEFAULT_CANDIDATE_BUDGET = 5_000_000


class EnumerationBudgetExceeded(RuntimeError):
    """Raised instead of silently truncating a combinatorial blow-up."""

    def __init__(self, count: int, budget: int):
        super().__init__(
            f"candidate budget exhausted: {count} candidates generated, budget {budget}"
        )
        self.count = count
        self.budget = budget


@dataclass(frozen=True)
class EnumerationLimits:
    """Caps on cycle pairs (C), chain patients (P), and total candidates."""

    max_cycle: int = 5
    max_chain: int = 5
    candidate_budget: int = DEFAULT_CANDIDATE_BUDGET

    def __post_init__(self) -> None:
        if self.max_cycle < 2:
            raise ValueError("max_cycle must be at least 2")
        if self.max_chain < 0:
            raise ValueError("max_chain must be non-negative")
        if self.candidate_budget <= 0:
            raise ValueError("candidate_budget must be positive")


def _scored(
    kind: str, ids: tuple[int, ...], scheme: Scheme | None, graph: ExchangeGraph
) -> Candidate:
    cand = Candidate(kind, ids, 0.0)
    if scheme is None:
        return cand
    return Candidate(kind, ids, candidate_weight(scheme, cand, graph))


def enumerate_cycles(
    graph: ExchangeGraph,
    max_cycle: int,
    scheme: Scheme | None = None,
    budget: int = DEFAULT_CANDIDATE_BUDGET,
) -> list[Candidate]:
    """All simple directed cycles of 2..max_cycle pairs, each exactly once.

    A cycle is discovered only from its minimum node id, which both
    deduplicates rotations and yields lexicographic emission order.
    """
    if max_cycle < 2:
        raise ValueError("max_cycle must be at least 2")
    out: list[Candidate] = []
    arcs = graph.arcs

    def extend(start: int, path: list[int], node: int) -> None:
        # Current candidate is path + [node]; its size is len(path) + 1 >= 2.
        if (node, start) in arcs:
            out.append(_scored(CYCLE, tuple(path) + (node,), scheme, graph))
            if len(out) > budget:
                raise EnumerationBudgetExceeded(len(out), budget)
        if len(path) + 1 >= max_cycle:
            return
        path.append(node)
        in_path = set(path)
        for nxt in graph.successors(node):
            if nxt > start and nxt not in in_path:
                extend(start, path, nxt)
        path.pop()

    for start in sorted(graph.pairs):
        for nxt in graph.successors(start):
            if nxt > start:
                extend(start, [start], nxt)
    return out


def enumerate_chains(
    graph: ExchangeGraph,
    max_chain: int,
    scheme: Scheme | None = None,
    budget: int = DEFAULT_CANDIDATE_BUDGET,
) -> list[Candidate]:
    """All simple chains of 1..max_chain patients from each altruistic donor.

    Prefix-closed: every path is emitted together with all its prefixes.
    """
    if max_chain < 0:
        raise ValueError("max_chain must be non-negative")
    out: list[Candidate] = []
    if max_chain == 0:
        return out

    def extend(path: list[int]) -> None:
        out.append(_scored(CHAIN, tuple(path), scheme, graph))
        if len(out) > budget:
            raise EnumerationBudgetExceeded(len(out), budget)
        if len(path) - 1 >= max_chain:
            return
        in_path = set(path)
        for nxt in graph.successors(path[-1]):
            if nxt not in in_path:
                path.append(nxt)
                extend(path)
                path.pop()

    for ndad_id in sorted(graph.ndads):
        for first in graph.successors(ndad_id):
            extend([ndad_id, first])
    return out


def enumerate_candidates(
    graph: ExchangeGraph,
    limits: EnumerationLimits,
    scheme: Scheme | None = None,
) -> list[Candidate]:
    """Every feasible cycle and chain, in the canonical candidate order."""
    cycles = enumerate_cycles(graph, limits.max_cycle, scheme, limits.candidate_budget)
    remaining = limits.candidate_budget - len(cycles)
    try:
        chains = enumerate_chains(graph, limits.max_chain, scheme, max(remaining, 0))
    except EnumerationBudgetExceeded as exc:
        raise EnumerationBudgetExceeded(
            len(cycles) + exc.count, limits.candidate_budget
        ) from None
    return cycles + chains
