"""Shared fixtures: seeded random graphs and schemes for oracle comparisons."""

import random

from kepsim.model import BloodType, ExchangeGraph, NdadNode, PairNode, all_pair_types
from kepsim.weights import Scheme, WeightTable


def random_exchange_graph(rng: random.Random, n_pairs: int, n_ndads: int, p: float):
    pairs = {}
    ndads = {}
    nid = 0
    for _ in range(n_pairs):
        pairs[nid] = PairNode(
            nid,
            BloodType(rng.randrange(4)),
            BloodType(rng.randrange(4)),
            rng.random(),
            0,
        )
        nid += 1
    for _ in range(n_ndads):
        ndads[nid] = NdadNode(nid, BloodType(rng.randrange(4)), 0)
        nid += 1
    arcs = {
        (t, h)
        for t in list(pairs) + list(ndads)
        for h in pairs
        if t != h and rng.random() < p
    }
    return ExchangeGraph(pairs, ndads, frozenset(arcs))


def random_scheme(rng: random.Random, penalties=(0.0, -2.0, -15.0)) -> Scheme:
    ndad_penalty = rng.choice(penalties)
    kind = rng.choice(["myopic", "kpd", "learned"])
    if kind == "myopic":
        return Scheme.myopic(ndad_penalty)
    if kind == "kpd":
        return Scheme.kpd(ndad_penalty)
    table = WeightTable({tau: 1.0 + rng.random() for tau in all_pair_types()})
    return Scheme.learned(table, ndad_penalty)
