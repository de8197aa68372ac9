import math

import numpy as np
import pytest

from kepsim.model import BloodType, Candidate, PairType, Selection, all_pair_types
from kepsim.pool import (
    PoolConfig,
    PoolDesyncError,
    WaitingPool,
    poisson_draw,
    population_proportion,
)


def small_cfg(**kw):
    defaults = dict(pair_rate=5.0, ndad_rate=1.0, periods=10)
    defaults.update(kw)
    return PoolConfig(**defaults)


class TestPoolConfig:
    def test_defaults_follow_program_statistics(self):
        cfg = PoolConfig()
        assert cfg.pair_rate == 37.0
        assert cfg.ndad_rate == 4.5625
        assert cfg.blood_dist == (0.03, 0.46, 0.42, 0.09)  # O, A, B, AB
        assert cfg.band_dist == (0.24, 0.29, 0.24, 0.10, 0.13)
        assert cfg.periods == 50

    def test_distributions_must_sum_to_one(self):
        with pytest.raises(ValueError):
            PoolConfig(blood_dist=(0.5, 0.5, 0.1, 0.1))
        with pytest.raises(ValueError):
            PoolConfig(band_dist=(1.0, 0.0, 0.0, 0.0, 0.1))

    def test_rates_must_be_non_negative(self):
        with pytest.raises(ValueError):
            PoolConfig(pair_rate=-1)


class TestPoisson:
    def test_zero_rate_is_degenerate(self):
        rng = np.random.default_rng(0)
        assert all(poisson_draw(rng, 0.0) == 0 for _ in range(100))

    def test_moments(self):
        rng = np.random.default_rng(42)
        lam = 6.5
        draws = [poisson_draw(rng, lam) for _ in range(40_000)]
        mean = sum(draws) / len(draws)
        var = sum((d - mean) ** 2 for d in draws) / len(draws)
        assert abs(mean - lam) < 0.05
        assert abs(var - lam) < 0.25


class TestArrivals:
    def test_zero_rates_give_empty_arrivals(self):
        pool = WaitingPool()
        cfg = PoolConfig(pair_rate=0.0, ndad_rate=0.0)
        pairs, ndads = pool.arrivals(cfg, 0, np.random.default_rng(0))
        assert pairs == [] and ndads == []

    def test_ids_sequential_and_shared(self):
        pool = WaitingPool()
        cfg = small_cfg()
        rng = np.random.default_rng(3)
        for t in range(5):
            pool.arrivals(cfg, t, rng)
        ids = sorted(pool.pairs) + sorted(pool.ndads)
        assert sorted(ids) == list(range(len(ids)))

    def test_same_seed_same_arrival_sequence(self):
        cfg = small_cfg()

        def history(seed):
            pool = WaitingPool()
            rng = np.random.default_rng(seed)
            out = []
            for t in range(8):
                pairs, ndads = pool.arrivals(cfg, t, rng)
                out.append(([(p.id, p.donor_blood, p.patient_blood, p.cpra) for p in pairs],
                            [(n.id, n.donor_blood) for n in ndads]))
            return out

        assert history(99) == history(99)
        assert history(99) != history(100)

    def test_mean_total_arrivals(self):
        # 20 periods at the small rates, averaged over seeds, within 2%.
        cfg = small_cfg(periods=20)
        totals = []
        for seed in range(200):
            pool = WaitingPool()
            rng = np.random.default_rng(seed)
            for t in range(cfg.periods):
                pool.arrivals(cfg, t, rng)
            totals.append(pool.pairs_arrived)
        mean = sum(totals) / len(totals)
        assert abs(mean - 20 * cfg.pair_rate) / (20 * cfg.pair_rate) < 0.02

    def test_cpra_always_inside_its_band(self):
        pool = WaitingPool()
        cfg = small_cfg(pair_rate=50.0)
        rng = np.random.default_rng(17)
        pool.arrivals(cfg, 0, rng)
        from kepsim.model import band_of

        for node in pool.pairs.values():
            band = band_of(node.cpra)
            assert band.lower <= node.cpra <= band.upper


def two_cycle(a, b):
    return Candidate("cycle", (a, b), 2.0)


class TestRemoveMatched:
    def make_pool(self, n):
        pool = WaitingPool()
        cfg = PoolConfig(pair_rate=0.0, ndad_rate=0.0)
        rng = np.random.default_rng(0)
        for i in range(n):
            from kepsim.model import PairNode

            node = PairNode(pool._take_id(), BloodType.O, BloodType.A, 0.0, 0)
            pool.pairs[node.id] = node
            pool.ledger.record_arrival(node.id, 0)
            pool.pairs_arrived += 1
        return pool

    def test_empty_selection_changes_nothing(self):
        pool = self.make_pool(3)
        before = dict(pool.pairs)
        pool.remove_matched(Selection((), 0.0), 1)
        assert pool.pairs == before

    def test_two_cycle_removal_and_ledger(self):
        pool = self.make_pool(3)
        pool.remove_matched(Selection((two_cycle(0, 1),), 2.0), 4)
        assert set(pool.pairs) == {2}
        assert pool.ledger.matched == {0: 4, 1: 4}
        assert pool.ledger.wait_months(0, horizon=10) == 16

    def test_selection_covering_everything_empties_pool(self):
        pool = self.make_pool(2)
        pool.remove_matched(Selection((two_cycle(0, 1),), 2.0), 0)
        assert not pool.pairs

    def test_unknown_id_is_a_hard_failure(self):
        pool = self.make_pool(2)
        with pytest.raises(PoolDesyncError):
            pool.remove_matched(Selection((two_cycle(0, 7),), 2.0), 0)

    def test_conservation(self):
        cfg = small_cfg()
        pool = WaitingPool()
        rng = np.random.default_rng(21)
        pool.arrivals(cfg, 0, rng)
        pool.arrivals(cfg, 1, rng)
        ids = sorted(pool.pairs)
        if len(ids) >= 2:
            pool.remove_matched(Selection((two_cycle(ids[0], ids[1]),), 2.0), 1)
        matched = len(pool.ledger.matched)
        assert pool.pairs_arrived == matched + len(pool.pairs)


class TestQueueComposition:
    def test_empty_pool_is_all_zero(self):
        comp = WaitingPool().queue_composition()
        assert comp.by_band == (0, 0, 0, 0, 0)
        assert all(v == 0 for v in comp.by_type.values())
        assert len(comp.by_type) == 80

    def test_two_band5_pairs(self):
        from kepsim.model import PairNode

        pool = WaitingPool()
        for i in range(2):
            pool.pairs[i] = PairNode(i, BloodType.A, BloodType.B, 0.99, 0)
        assert pool.queue_composition().by_band == (0, 0, 0, 0, 2)

    def test_type_proportions_sum_to_one_or_zero(self):
        pool = WaitingPool()
        assert math.fsum(pool.type_proportions().values()) == 0.0
        from kepsim.model import PairNode

        pool.pairs[0] = PairNode(0, BloodType.A, BloodType.B, 0.99, 0)
        assert abs(math.fsum(pool.type_proportions().values()) - 1.0) < 1e-12


class TestPopulationProportion:
    def test_sums_to_one_over_all_types(self):
        cfg = PoolConfig()
        total = math.fsum(population_proportion(cfg, t) for t in all_pair_types())
        assert abs(total - 1.0) < 1e-12

    def test_direct_product_example(self):
        cfg = PoolConfig()
        tau = PairType(BloodType.A, BloodType.A, 2)
        assert population_proportion(cfg, tau) == pytest.approx(
            0.46 * 0.46 * 0.29, rel=1e-12
        )
        assert population_proportion(cfg, tau) == pytest.approx(0.061364, rel=1e-9)

    def test_zero_probability_band(self):
        cfg = PoolConfig(band_dist=(0.5, 0.5, 0.0, 0.0, 0.0))
        tau = PairType(BloodType.A, BloodType.A, 5)
        assert population_proportion(cfg, tau) == 0.0
