import numpy as np
import pytest

from kepsim.compat import CompatibilityCache, blood_compatible, build_graph, sample_arc
from kepsim.model import BloodType, NdadNode, PairNode
from kepsim.pool import WaitingPool

O, A, B, AB = BloodType.O, BloodType.A, BloodType.B, BloodType.AB

# Donor -> allowed recipients, written out in full as an independent record
# of the compatibility arrows.
ALLOWED = {
    O: {O, A, B, AB},
    A: {A, AB},
    B: {B, AB},
    AB: {AB},
}


def make_pair(nid, donor=O, patient=A, cpra=0.0):
    return PairNode(nid, donor, patient, cpra, 0)


class TestBloodCompatible:
    def test_full_truth_table(self):
        for donor in BloodType:
            for patient in BloodType:
                assert blood_compatible(donor, patient) == (patient in ALLOWED[donor])

    def test_named_examples(self):
        assert blood_compatible(O, A)
        assert not blood_compatible(AB, O)
        assert blood_compatible(B, B)


class TestSampleArc:
    def test_cpra_zero_always_accepts(self):
        rng = np.random.default_rng(0)
        cache = CompatibilityCache()
        donor = make_pair(0, donor=O)
        for i in range(1, 200):
            assert sample_arc(rng, donor, make_pair(i, patient=A, cpra=0.0), cache)

    def test_cpra_one_always_rejects(self):
        rng = np.random.default_rng(0)
        cache = CompatibilityCache()
        donor = make_pair(0, donor=O)
        for i in range(1, 200):
            assert not sample_arc(rng, donor, make_pair(i, patient=A, cpra=1.0), cache)

    def test_blood_incompatible_never_queried(self):
        rng = np.random.default_rng(0)
        cache = CompatibilityCache()
        donor = make_pair(0, donor=AB)
        assert not sample_arc(rng, donor, make_pair(1, patient=O, cpra=0.0), cache)
        assert cache.decided == {}

    def test_verdict_is_memoized(self):
        donor = make_pair(0, donor=O)
        patient = make_pair(1, patient=A, cpra=0.5)
        cache = CompatibilityCache()
        first = sample_arc(np.random.default_rng(7), donor, patient, cache)
        for seed in range(20):  # fresh rng must not change the stored verdict
            assert sample_arc(np.random.default_rng(seed), donor, patient, cache) == first

    def test_self_arc_rejected(self):
        node = make_pair(0)
        with pytest.raises(ValueError):
            sample_arc(np.random.default_rng(0), node, node, CompatibilityCache())

    def test_acceptance_rate_matches_one_minus_cpra(self):
        rng = np.random.default_rng(123)
        cache = CompatibilityCache()
        donor = make_pair(0, donor=O)
        n = 100_000
        hits = sum(
            sample_arc(rng, donor, make_pair(i, patient=A, cpra=0.5), cache)
            for i in range(1, n + 1)
        )
        assert abs(hits / n - 0.5) < 0.01


def pool_with(pairs=(), ndads=()):
    pool = WaitingPool()
    for node in pairs:
        pool.pairs[node.id] = node
    for node in ndads:
        pool.ndads[node.id] = node
    return pool


class TestBuildGraph:
    def test_single_ndad_graph_is_empty(self):
        pool = pool_with(ndads=[NdadNode(0, O, 0)])
        g = build_graph(pool, CompatibilityCache(), np.random.default_rng(0))
        assert g.n_nodes == 1 and not g.arcs

    def test_mutual_two_cycle_when_no_exclusions(self):
        pool = pool_with(
            pairs=[make_pair(0, donor=A, patient=B, cpra=0.0),
                   make_pair(1, donor=B, patient=A, cpra=0.0)]
        )
        g = build_graph(pool, CompatibilityCache(), np.random.default_rng(0))
        assert g.arcs == {(0, 1), (1, 0)}

    def test_universal_donor_and_recipient_example(self):
        # Pair 0: AB donor with O patient; pair 1: O donor with AB patient.
        pool = pool_with(
            pairs=[make_pair(0, donor=AB, patient=O, cpra=0.0),
                   make_pair(1, donor=O, patient=AB, cpra=0.0)]
        )
        g = build_graph(pool, CompatibilityCache(), np.random.default_rng(0))
        assert g.arcs == {(0, 1), (1, 0)}

    def test_no_own_donor_arcs_even_if_compatible(self):
        pool = pool_with(pairs=[make_pair(0, donor=O, patient=AB, cpra=0.0)])
        g = build_graph(pool, CompatibilityCache(), np.random.default_rng(0))
        assert not g.arcs

    def test_every_arc_is_blood_compatible(self):
        rng = np.random.default_rng(5)
        pairs = [
            make_pair(i, BloodType(int(rng.integers(4))), BloodType(int(rng.integers(4))),
                      float(rng.random()))
            for i in range(30)
        ]
        pool = pool_with(pairs=pairs, ndads=[NdadNode(100, B, 0)])
        g = build_graph(pool, CompatibilityCache(), rng)
        lookup = {n.id: n for n in pairs}
        lookup[100] = NdadNode(100, B, 0)
        for tail, head in g.arcs:
            assert blood_compatible(lookup[tail].donor_blood, lookup[head].patient_blood)

    def test_rebuild_is_idempotent_for_surviving_nodes(self):
        rng = np.random.default_rng(11)
        pairs = [
            make_pair(i, BloodType(int(rng.integers(4))), BloodType(int(rng.integers(4))),
                      float(rng.random()))
            for i in range(25)
        ]
        pool = pool_with(pairs=pairs)
        cache = CompatibilityCache()
        g1 = build_graph(pool, cache, rng)
        g2 = build_graph(pool, cache, rng)  # rng moved on; cache must pin verdicts
        assert g1.arcs == g2.arcs

        # Drop a few nodes: the induced arc set over survivors is unchanged.
        survivors = {n.id for n in pairs[5:]}
        for nid in list(pool.pairs):
            if nid not in survivors:
                del pool.pairs[nid]
        g3 = build_graph(pool, cache, rng)
        expected = {(t, h) for t, h in g1.arcs if t in survivors and h in survivors}
        assert g3.arcs == expected
