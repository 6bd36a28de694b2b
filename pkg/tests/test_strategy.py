import math
import random

import pytest

from clmlab import (Allocation, OpponentAggregate, PoolConfig, ProviderWallet,
                    RewardSchedule, SizeError, TokenAmounts,
                    UnallocatableError, best_response,
                    brute_force_best_response, coupling_ratio, expected_reward,
                    nash_gap, proportional_allocation, split_support,
                    tick_price)

CFG = PoolConfig(p0=1.0, d=4.0, i_min=-4, i_max=4)
BOUNDARY = 1.0  # tick 0


class TestSplitSupport:
    def test_boundary_split(self):
        sched = RewardSchedule(7.0, {-2: 1.0, -1: 2.0, 0: 3.0, 1: 1.0})
        s = split_support(sched, BOUNDARY, CFG)
        assert s.left == (-2, -1)
        assert s.right == (0, 1)
        assert s.active is None

    def test_interior_split(self):
        sched = RewardSchedule(7.0, {-1: 2.0, 0: 3.0, 1: 2.0})
        s = split_support(sched, 2.0, CFG)
        assert s.left == (-1,)
        assert s.active == 0
        assert s.right == (1,)

    def test_zero_reward_bins_ignored(self):
        sched = RewardSchedule(3.0, {0: 3.0, 1: 0.0})
        s = split_support(sched, BOUNDARY, CFG)
        assert s.right == (0,)


class TestProportional:
    def test_worked_example(self):
        sched = RewardSchedule(7.0, {0: 3.0, 1: 1.0, -1: 2.0, -2: 1.0})
        alloc = proportional_allocation(ProviderWallet(10.0, 6.0), sched,
                                        BOUNDARY, CFG)
        assert alloc.x_in(0) == pytest.approx(7.5)
        assert alloc.x_in(1) == pytest.approx(2.5)
        assert alloc.y_in(-1) == pytest.approx(4.0)
        assert alloc.y_in(-2) == pytest.approx(2.0)

    def test_single_right_bin(self):
        sched = RewardSchedule(1.0, {2: 1.0})
        alloc = proportional_allocation(ProviderWallet(5.0, 0.0), sched,
                                        BOUNDARY, CFG)
        assert alloc.x_in(2) == pytest.approx(5.0)

    def test_zero_wallet(self):
        sched = RewardSchedule(1.0, {0: 1.0})
        alloc = proportional_allocation(ProviderWallet(0.0, 0.0), sched,
                                        BOUNDARY, CFG)
        assert alloc.per_bin == {} or alloc.total_x() == 0.0

    def test_unallocatable(self):
        sched = RewardSchedule(1.0, {1: 1.0})  # nothing left of the price
        with pytest.raises(UnallocatableError):
            proportional_allocation(ProviderWallet(1.0, 1.0), sched,
                                    BOUNDARY, CFG)

    def test_interior_coupling_respected(self):
        sched = RewardSchedule(6.0, {-1: 2.0, 0: 3.0, 1: 1.0})
        p_c = 2.0
        alloc = proportional_allocation(ProviderWallet(8.0, 4.0), sched, p_c, CFG)
        c = coupling_ratio(0, p_c, CFG)
        assert alloc.y_in(0) == pytest.approx(c * alloc.x_in(0), rel=1e-12)
        assert alloc.total_x() == pytest.approx(8.0, rel=1e-12)
        assert alloc.total_y() == pytest.approx(4.0, rel=1e-12)


class TestExpectedReward:
    def test_symmetric_two_provider_profile(self):
        # two equal wallets, proportional: reward = R_r*x_k/x + R_l*y_k/y
        sched = RewardSchedule(7.0, {0: 3.0, 1: 1.0, -1: 2.0, -2: 1.0})
        mine = proportional_allocation(ProviderWallet(1.0, 1.0), sched,
                                       BOUNDARY, CFG)
        others = OpponentAggregate.from_allocations([mine])
        got = expected_reward(mine, others, sched, BOUNDARY, CFG)
        assert got == pytest.approx(4.0 * 0.5 + 3.0 * 0.5, rel=1e-12)

    def test_sole_occupant_takes_bin(self):
        sched = RewardSchedule(5.0, {1: 5.0})
        mine = Allocation({1: TokenAmounts(x=1e-9)})
        got = expected_reward(mine, OpponentAggregate(), sched, BOUNDARY, CFG)
        assert got == pytest.approx(5.0)

    def test_zero_stake_earns_nothing(self):
        sched = RewardSchedule(5.0, {1: 5.0})
        got = expected_reward(Allocation({}), OpponentAggregate({1: 3.0}, {}),
                              sched, BOUNDARY, CFG)
        assert got == 0.0


class TestBestResponse:
    def test_symmetric_split(self):
        sched = RewardSchedule(2.0, {0: 1.0, 1: 1.0})
        others = OpponentAggregate({0: 1.0, 1: 1.0}, {})
        br = best_response(ProviderWallet(2.0, 0.0), others, sched, BOUNDARY, CFG)
        assert br.x_in(0) == pytest.approx(1.0, rel=1e-9)
        assert br.x_in(1) == pytest.approx(1.0, rel=1e-9)

    def test_kkt_hand_solved(self):
        sched = RewardSchedule(4.0, {0: 3.0, 1: 1.0})
        others = OpponentAggregate({0: 1.0, 1: 1.0}, {})
        br = best_response(ProviderWallet(2.0, 0.0), others, sched, BOUNDARY, CFG)
        expect0 = math.sqrt(3.0) / ((math.sqrt(3.0) + 1.0) / 4.0) - 1.0
        assert br.x_in(0) == pytest.approx(expect0, rel=1e-9)
        assert br.x_in(1) == pytest.approx(2.0 - expect0, rel=1e-9)

    def test_free_bin_claimed_with_min_stake(self):
        # concentrated opponent: claim the free bin, contest the other
        sched = RewardSchedule(1.0, {0: 0.5, 1: 0.5})
        others = OpponentAggregate({1: 3.0}, {})
        wallet = ProviderWallet(2.0, 0.0)
        br = best_response(wallet, others, sched, BOUNDARY, CFG)
        assert 0.0 < br.x_in(0) <= 1e-8 * 2.0
        assert br.x_in(1) == pytest.approx(2.0 - br.x_in(0))
        value = expected_reward(br, others, sched, BOUNDARY, CFG)
        limit = 0.5 + 0.5 * 2.0 / 5.0
        assert value < limit
        assert value == pytest.approx(limit, abs=1e-6)

    def test_budget_exhaustive_and_side_correct(self):
        rng = random.Random(31)
        for _ in range(50):
            bins_r = sorted(rng.sample(range(0, 4), rng.randint(1, 3)))
            bins_l = sorted(rng.sample(range(-4, 0), rng.randint(1, 3)))
            per = {i: rng.uniform(0.2, 3.0) for i in bins_r + bins_l}
            sched = RewardSchedule(sum(per.values()), per)
            others = OpponentAggregate(
                {i: rng.choice([0.0, rng.uniform(0.1, 5.0)]) for i in bins_r},
                {i: rng.choice([0.0, rng.uniform(0.1, 5.0)]) for i in bins_l})
            wallet = ProviderWallet(rng.uniform(0.5, 10.0),
                                    rng.uniform(0.5, 10.0))
            br = best_response(wallet, others, sched, BOUNDARY, CFG)
            assert br.total_x() == pytest.approx(wallet.x, rel=1e-9)
            assert br.total_y() == pytest.approx(wallet.y, rel=1e-9)
            for i, a in br.per_bin.items():
                assert a.x >= 0.0 and a.y >= 0.0
                if i >= 0:
                    assert a.y == 0.0
                else:
                    assert a.x == 0.0

    def test_dominates_proportional(self):
        rng = random.Random(41)
        for _ in range(30):
            per = {0: rng.uniform(0.5, 3.0), 1: rng.uniform(0.5, 3.0),
                   -1: rng.uniform(0.5, 3.0)}
            sched = RewardSchedule(sum(per.values()), per)
            others = OpponentAggregate({0: rng.uniform(0.1, 4.0),
                                        1: rng.uniform(0.1, 4.0)},
                                       {-1: rng.uniform(0.1, 4.0)})
            wallet = ProviderWallet(rng.uniform(0.5, 5.0), rng.uniform(0.5, 5.0))
            prop = proportional_allocation(wallet, sched, BOUNDARY, CFG)
            br = best_response(wallet, others, sched, BOUNDARY, CFG)
            v_prop = expected_reward(prop, others, sched, BOUNDARY, CFG)
            v_br = expected_reward(br, others, sched, BOUNDARY, CFG)
            assert v_br >= v_prop - 1e-8

    def test_interior_beats_or_matches_oracle(self):
        sched = RewardSchedule(6.0, {-1: 2.0, 0: 3.0, 1: 1.0})
        others = OpponentAggregate({0: 1.0, 1: 0.5}, {-1: 2.0})
        wallet = ProviderWallet(4.0, 3.0)
        p_c = 2.0
        br = best_response(wallet, others, sched, p_c, CFG)
        oracle = brute_force_best_response(wallet, others, sched, p_c, CFG, 0.01)
        v_br = expected_reward(br, others, sched, p_c, CFG)
        v_or = expected_reward(oracle, others, sched, p_c, CFG)
        assert v_br >= v_or - 6.0 * 2 * 0.01
        c = coupling_ratio(0, p_c, CFG)
        assert br.y_in(0) == pytest.approx(c * br.x_in(0), rel=1e-9)

    def test_empty_support_raises(self):
        sched = RewardSchedule(0.0, {})
        with pytest.raises(UnallocatableError):
            best_response(ProviderWallet(1.0, 1.0), OpponentAggregate(),
                          sched, BOUNDARY, CFG)


class TestBruteForce:
    def test_single_bin(self):
        sched = RewardSchedule(1.0, {1: 1.0})
        br = brute_force_best_response(ProviderWallet(3.0, 0.0),
                                       OpponentAggregate({1: 1.0}, {}),
                                       sched, BOUNDARY, CFG, 0.01)
        assert br.x_in(1) == pytest.approx(3.0)

    def test_symmetric_split(self):
        sched = RewardSchedule(2.0, {0: 1.0, 1: 1.0})
        others = OpponentAggregate({0: 1.0, 1: 1.0}, {})
        br = brute_force_best_response(ProviderWallet(2.0, 0.0), others,
                                       sched, BOUNDARY, CFG, 1e-3)
        assert br.x_in(0) == pytest.approx(1.0, abs=2e-3 * 2.0)

    def test_matches_waterfilling(self):
        sched = RewardSchedule(4.0, {0: 3.0, 1: 1.0})
        others = OpponentAggregate({0: 1.0, 1: 1.0}, {})
        wallet = ProviderWallet(2.0, 0.0)
        wf = best_response(wallet, others, sched, BOUNDARY, CFG)
        bf = brute_force_best_response(wallet, others, sched, BOUNDARY, CFG, 1e-3)
        assert bf.x_in(0) == pytest.approx(wf.x_in(0), abs=2e-3 * 2.0)

    def test_too_many_bins(self):
        per = {i: 1.0 for i in range(-2, 3)}
        sched = RewardSchedule(5.0, per)
        with pytest.raises(SizeError):
            brute_force_best_response(ProviderWallet(1.0, 1.0),
                                      OpponentAggregate(), sched, BOUNDARY,
                                      CFG, 0.1)


class TestNashGap:
    def make_profile(self, sched, wallets):
        return {pid: proportional_allocation(w, sched, BOUNDARY, CFG)
                for pid, w in wallets.items()}

    def test_proportional_profile_is_equilibrium(self):
        sched = RewardSchedule(7.0, {0: 3.0, 1: 1.0, -1: 2.0, -2: 1.0})
        wallets = {"A": ProviderWallet(1.0, 2.0), "B": ProviderWallet(3.0, 1.0),
                   "C": ProviderWallet(0.5, 0.5)}
        profile = self.make_profile(sched, wallets)
        assert nash_gap(profile, wallets, sched, BOUNDARY, CFG) <= 1e-6

    def test_concentrated_opponent_leaves_gap(self):
        # one provider concentrated in a single bin: the proportional
        # responder can do strictly better
        sched = RewardSchedule(1.0, {0: 0.5, 1: 0.5})
        wallets = {"conc": ProviderWallet(3.0, 0.0),
                   "prop": ProviderWallet(2.0, 0.0)}
        profile = {
            "conc": Allocation({1: TokenAmounts(x=3.0)}),
            "prop": proportional_allocation(wallets["prop"], sched,
                                            BOUNDARY, CFG),
        }
        assert nash_gap(profile, wallets, sched, BOUNDARY, CFG) > 1e-3

    def test_sole_provider_gap_zero(self):
        sched = RewardSchedule(7.0, {0: 3.0, 1: 1.0, -1: 2.0, -2: 1.0})
        wallets = {"A": ProviderWallet(2.0, 2.0)}
        profile = self.make_profile(sched, wallets)
        assert nash_gap(profile, wallets, sched, BOUNDARY, CFG) \
            == pytest.approx(0.0, abs=1e-9)
