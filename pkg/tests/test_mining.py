import random

import pytest

from clmlab import (PoolConfig, PoolState, RewardSchedule, accrue_slot,
                    deposit, validate_schedule)

CFG = PoolConfig(p0=1.0, d=2.0, i_min=-6, i_max=6)


class TestValidate:
    def test_ok(self):
        s = RewardSchedule(10.0, {0: 4.0, 1: 6.0})
        assert validate_schedule(s, CFG) == []

    def test_sum_mismatch(self):
        s = RewardSchedule(10.0, {0: 4.0, 1: 5.0})
        assert any("sum" in v for v in validate_schedule(s, CFG))

    def test_negative_entry(self):
        s = RewardSchedule(10.0, {0: -1.0, 1: 11.0})
        assert any("negative" in v for v in validate_schedule(s, CFG))

    def test_out_of_window(self):
        s = RewardSchedule(10.0, {99: 10.0})
        assert any("window" in v for v in validate_schedule(s, CFG))

    def test_window_unchecked_without_config(self):
        s = RewardSchedule(10.0, {99: 10.0})
        assert validate_schedule(s) == []


def pool_with(positions, price=1.0):
    st = PoolState(CFG, price)
    for (pid, i), liq in positions.items():
        st, _ = deposit(st, pid, i, liq)
    return st


class TestAccrual:
    def test_pro_rata(self):
        st = pool_with({("A", 0): 3.0, ("B", 0): 7.0})
        stmt = accrue_slot(st, RewardSchedule(10.0, {0: 10.0}))
        assert stmt.per_provider["A"] == pytest.approx(3.0)
        assert stmt.per_provider["B"] == pytest.approx(7.0)
        assert stmt.withheld == 0.0

    def test_empty_bin_withheld(self):
        st = pool_with({("A", 0): 1.0})
        stmt = accrue_slot(st, RewardSchedule(10.0, {0: 5.0, 1: 5.0}))
        assert stmt.withheld == 5.0
        assert stmt.per_provider["A"] == pytest.approx(5.0)

    def test_sole_provider_takes_all(self):
        st = pool_with({("A", 0): 2.0, ("A", 1): 0.5})
        stmt = accrue_slot(st, RewardSchedule(2.0, {0: 1.0, 1: 1.0}))
        assert stmt.per_provider["A"] == pytest.approx(2.0)
        assert stmt.withheld == 0.0

    def test_budget_conservation_random(self):
        rng = random.Random(23)
        for _ in range(100):
            positions = {}
            for pid in "ABCD":
                for _ in range(rng.randint(0, 3)):
                    i = rng.randint(CFG.i_min, CFG.i_max)
                    positions[(pid, i)] = positions.get((pid, i), 0.0) \
                        + rng.uniform(0.1, 50.0)
            st = pool_with(positions) if positions else PoolState(CFG, 1.0)
            bins = rng.sample(range(CFG.i_min, CFG.i_max + 1), rng.randint(1, 5))
            raw = [rng.uniform(0.1, 5.0) for _ in bins]
            total = sum(raw)
            sched = RewardSchedule(total, dict(zip(bins, raw)))
            stmt = accrue_slot(st, sched)
            assert stmt.total == pytest.approx(total, rel=1e-9)

    def test_scale_invariance(self):
        sched = RewardSchedule(9.0, {0: 4.0, 1: 5.0})
        base = pool_with({("A", 0): 3.0, ("B", 0): 7.0, ("B", 1): 2.0})
        ref = accrue_slot(base, sched)
        for c in (1e-6, 1e6):
            scaled = pool_with({("A", 0): 3.0 * c, ("B", 0): 7.0 * c,
                                ("B", 1): 2.0 * c})
            stmt = accrue_slot(scaled, sched)
            for pid in ref.per_provider:
                assert stmt.per_provider[pid] \
                    == pytest.approx(ref.per_provider[pid], rel=1e-9)

    def test_monotone_in_own_liquidity(self):
        sched = RewardSchedule(10.0, {0: 10.0})
        lo = accrue_slot(pool_with({("A", 0): 1.0, ("B", 0): 5.0}), sched)
        hi = accrue_slot(pool_with({("A", 0): 2.0, ("B", 0): 5.0}), sched)
        assert hi.per_provider["A"] >= lo.per_provider["A"]

    def test_zero_sum_with_full_occupancy(self):
        sched = RewardSchedule(7.0, {0: 3.0, 1: 4.0})
        st = pool_with({("A", 0): 1.0, ("B", 0): 4.0, ("A", 1): 2.0,
                        ("C", 1): 1.0})
        stmt = accrue_slot(st, sched)
        assert sum(stmt.per_provider.values()) == pytest.approx(7.0, rel=1e-9)
