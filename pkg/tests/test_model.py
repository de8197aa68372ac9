import math

import pytest

from kepsim.model import (
    BLOOD_TYPES,
    CPRA_BANDS,
    CHAIN,
    CYCLE,
    BloodType,
    Candidate,
    ExchangeGraph,
    NdadNode,
    PairNode,
    PairType,
    Selection,
    all_pair_types,
    band_of,
    pair_type_of,
    validate_selection,
)


def make_pair(nid, donor="O", patient="A", cpra=0.0, period=0):
    return PairNode(nid, BloodType.parse(donor), BloodType.parse(patient), cpra, period)


class TestBloodType:
    def test_order_is_o_a_b_ab(self):
        assert BloodType.O < BloodType.A < BloodType.B < BloodType.AB
        assert [str(b) for b in BLOOD_TYPES] == ["O", "A", "B", "AB"]

    def test_parse_round_trip(self):
        for b in BLOOD_TYPES:
            assert BloodType.parse(str(b)) is b
        with pytest.raises(ValueError):
            BloodType.parse("C")


class TestCpraBands:
    def test_exact_intervals_and_alphas(self):
        assert [(b.lower, b.upper) for b in CPRA_BANDS] == [
            (0.00, 0.00),
            (0.01, 0.50),
            (0.51, 0.94),
            (0.95, 0.96),
            (0.97, 1.00),
        ]
        assert [b.alpha for b in CPRA_BANDS] == [0.24, 0.29, 0.24, 0.10, 0.13]
        assert math.fsum(b.alpha for b in CPRA_BANDS) == 1.0

    def test_band_of_is_total_on_a_fine_grid(self):
        for i in range(0, 10_001):
            cpra = i / 10_000
            band = band_of(cpra)
            assert 1 <= band.index <= 5

    def test_band_of_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            band_of(-0.01)
        with pytest.raises(ValueError):
            band_of(1.01)

    @pytest.mark.parametrize(
        "cpra,expected",
        [
            (0.0, 1),
            (0.005, 2),  # below the second band's lower edge still maps to band 2
            (0.01, 2),
            (0.30, 2),
            (0.50, 2),
            (0.505, 3),  # interval gap resolves upward
            (0.51, 3),
            (0.94, 3),
            (0.95, 4),
            (0.955, 4),
            (0.96, 4),
            (0.965, 5),
            (0.97, 5),
            (1.0, 5),
        ],
    )
    def test_band_boundaries(self, cpra, expected):
        assert band_of(cpra).index == expected


class TestPairType:
    def test_examples(self):
        assert pair_type_of(make_pair(0, "O", "A", 0.0)) == PairType(
            BloodType.O, BloodType.A, 1
        )
        assert pair_type_of(make_pair(1, "A", "AB", 0.955)) == PairType(
            BloodType.A, BloodType.AB, 4
        )
        assert pair_type_of(make_pair(2, "B", "O", 0.30)) == PairType(
            BloodType.B, BloodType.O, 2
        )

    def test_exactly_80_distinct_types(self):
        types = all_pair_types()
        assert len(types) == 80
        assert len(set(types)) == 80


def fixture_graph():
    """Three pairs in a triangle plus one altruist feeding pair 0."""
    pairs = {i: make_pair(i) for i in range(3)}
    ndads = {3: NdadNode(3, BloodType.O, 0)}
    arcs = frozenset([(0, 1), (1, 2), (2, 0), (3, 0), (0, 2)])
    return ExchangeGraph(pairs, ndads, arcs)


class TestGraph:
    def test_rejects_self_arcs_and_bad_heads(self):
        pairs = {0: make_pair(0)}
        ndads = {1: NdadNode(1, BloodType.O, 0)}
        with pytest.raises(ValueError):
            ExchangeGraph(pairs, ndads, frozenset([(0, 0)]))
        with pytest.raises(ValueError):
            ExchangeGraph(pairs, ndads, frozenset([(0, 1)]))  # altruist as head

    def test_successors_sorted(self):
        g = fixture_graph()
        assert g.successors(0) == (1, 2)
        assert g.successors(3) == (0,)


class TestValidateSelection:
    def test_empty_selection_is_valid(self):
        assert validate_selection(fixture_graph(), Selection((), 0.0), 3, 5)

    def test_valid_cycle_and_chain(self):
        g = fixture_graph()
        sel = Selection((Candidate(CYCLE, (1, 2), 0.0),), 0.0)
        assert not validate_selection(g, sel, 3, 5)  # no closing arc 2 -> 1
        sel = Selection((Candidate(CYCLE, (0, 1, 2), 0.0),), 0.0)
        assert validate_selection(g, sel, 3, 5)
        sel = Selection((Candidate(CHAIN, (3, 0, 2), 0.0),), 0.0)
        assert validate_selection(g, sel, 3, 5)

    def test_shared_node_is_rejected(self):
        g = fixture_graph()
        sel = Selection(
            (
                Candidate(CYCLE, (0, 1, 2), 0.0),
                Candidate(CHAIN, (3, 0), 0.0),
            ),
            0.0,
        )
        assert not validate_selection(g, sel, 3, 5)

    def test_caps_enforced(self):
        pairs = {i: make_pair(i) for i in range(6)}
        ndads = {6: NdadNode(6, BloodType.O, 0)}
        arcs = frozenset([(6, 0)] + [(i, i + 1) for i in range(5)])
        g = ExchangeGraph(pairs, ndads, arcs)
        six_patients = Candidate(CHAIN, (6, 0, 1, 2, 3, 4, 5), 0.0)
        assert not validate_selection(g, Selection((six_patients,), 0.0), 3, 5)
        assert validate_selection(g, Selection((six_patients,), 0.0), 3, 6)

    def test_chain_must_start_at_altruist(self):
        g = fixture_graph()
        sel = Selection((Candidate(CHAIN, (0, 1), 0.0),), 0.0)
        assert not validate_selection(g, sel, 3, 5)

    def test_each_node_used_at_most_once_property(self):
        g = fixture_graph()
        sel = Selection(
            (Candidate(CYCLE, (0, 1, 2), 0.0), Candidate(CHAIN, (3, 0), 0.0)), 0.0
        )
        if validate_selection(g, sel, 3, 5):
            ids = [i for c in sel.candidates for i in c.node_ids]
            assert len(ids) == len(set(ids))


class TestCandidate:
    def test_kind_checked(self):
        with pytest.raises(ValueError):
            Candidate("loop", (0, 1), 0.0)

    def test_patient_counts(self):
        assert Candidate(CYCLE, (0, 1, 2), 0.0).n_patients == 3
        assert Candidate(CHAIN, (9, 1, 2), 0.0).n_patients == 2
