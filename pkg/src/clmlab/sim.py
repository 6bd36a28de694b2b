"""Multi-slot, multi-agent scenario execution.

Providers arrive one after another, each deciding against the state its
predecessors left. Every slot then executes its scheduled exogenous
trades, applies the reallocation rule (a frictionless withdraw-and-
redeposit whose absolute token movement accumulates as turnover), and
accrues the slot's rewards on the end-of-slot snapshot. Everything is
deterministic; the seed is carried for optional randomized scenario
generation and reporting only.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple

from .design import DesignSpec
from .errors import ScenarioError
from .mining import RewardSchedule, RewardStatement, accrue_slot, validate_schedule
from .pool import (PoolConfig, PoolState, Side, TokenAmounts, bin_of, deposit,
                   liquidity_for_tokens, position_tokens, swap_exact_in,
                   tick_price, tokens_for_liquidity, withdraw_all)
from .strategy import (Allocation, OpponentAggregate, ProviderWallet,
                       best_response, expected_reward, proportional_allocation,
                       split_support)

FLOAT_FMT = "%.12g"


class Policy(str, Enum):
    PROPORTIONAL = "proportional"
    BEST_RESPONSE = "best_response"
    FIXED = "fixed"


class Realloc(str, Enum):
    NEVER = "never"
    EVERY_SLOT = "every_slot"
    ON_BIN_SHIFT = "on_bin_shift"


@dataclass(frozen=True)
class ProviderSpec:
    id: str
    wallet: ProviderWallet
    policy: Policy
    allocation: Optional[Allocation] = None  # required for FIXED

    def to_json(self) -> dict:
        obj = {"id": self.id, "wallet": {"x": self.wallet.x, "y": self.wallet.y},
               "policy": self.policy.value}
        if self.allocation is not None:
            obj["allocation"] = self.allocation.to_json()
        return obj

    @classmethod
    def from_json(cls, obj: dict) -> "ProviderSpec":
        alloc = obj.get("allocation")
        return cls(id=str(obj["id"]),
                   wallet=ProviderWallet(float(obj["wallet"]["x"]),
                                         float(obj["wallet"]["y"])),
                   policy=Policy(obj["policy"]),
                   allocation=None if alloc is None else Allocation.from_json(alloc))


@dataclass(frozen=True)
class TradeEvent:
    slot: int
    side: Side
    amount: float

    def to_json(self) -> dict:
        return {"slot": self.slot, "side": self.side.value, "amount": self.amount}

    @classmethod
    def from_json(cls, obj: dict) -> "TradeEvent":
        return cls(slot=int(obj["slot"]), side=Side(obj["side"]),
                   amount=float(obj["amount"]))


@dataclass
class SimScenario:
    """A declarative experiment: pool, schedule, providers, trades."""

    pool: PoolConfig
    schedule: RewardSchedule
    providers: List[ProviderSpec]
    arrival_order: List[str]
    slots: int
    trades: List[TradeEvent] = field(default_factory=list)
    reallocation: Realloc = Realloc.NEVER
    initial_price: Optional[float] = None
    seed: int = 0

    def price0(self) -> float:
        return self.pool.p0 if self.initial_price is None else self.initial_price

    def validate(self) -> List[str]:
        errs = []
        ids = [p.id for p in self.providers]
        if len(set(ids)) != len(ids):
            errs.append("provider ids are not unique")
        if sorted(self.arrival_order) != sorted(ids):
            errs.append("arrival_order is not a permutation of provider ids")
        if self.slots <= 0:
            errs.append("slots must be positive")
        for t in self.trades:
            if not (1 <= t.slot <= self.slots):
                errs.append(f"trade references invalid slot {t.slot}")
            if t.amount <= 0:
                errs.append(f"trade amount {t.amount} must be positive")
        for p in self.providers:
            if p.policy == Policy.FIXED and p.allocation is None:
                errs.append(f"provider {p.id} is fixed-policy without an allocation")
        errs.extend(validate_schedule(self.schedule, self.pool))
        lo = tick_price(self.pool.i_min, self.pool)
        hi = tick_price(self.pool.i_max + 1, self.pool)
        if not (lo <= self.price0() < hi):
            errs.append(f"initial price {self.price0()} outside pool window")
        return errs

    def to_json(self) -> dict:
        return {"pool": self.pool.to_json(),
                "schedule": self.schedule.to_json(),
                "providers": [p.to_json() for p in self.providers],
                "arrival_order": list(self.arrival_order),
                "slots": self.slots,
                "trades": [t.to_json() for t in self.trades],
                "reallocation": self.reallocation.value,
                "initial_price": self.price0(),
                "seed": self.seed}

    @classmethod
    def from_json(cls, obj: dict) -> "SimScenario":
        pool = PoolConfig.from_json(obj["pool"])
        if "schedule" in obj:
            schedule = RewardSchedule.from_json(obj["schedule"])
        elif "design" in obj:
            schedule = DesignSpec.from_json(obj["design"]).build(pool)
        else:
            raise ScenarioError(["scenario needs a 'schedule' or a 'design'"])
        return cls(pool=pool,
                   schedule=schedule,
                   providers=[ProviderSpec.from_json(p) for p in obj["providers"]],
                   arrival_order=[str(i) for i in obj["arrival_order"]],
                   slots=int(obj["slots"]),
                   trades=[TradeEvent.from_json(t) for t in obj.get("trades", [])],
                   reallocation=Realloc(obj.get("reallocation", "never")),
                   initial_price=(None if obj.get("initial_price") is None
                                  else float(obj["initial_price"])),
                   seed=int(obj.get("seed", 0)))


@dataclass
class SlotRecord:
    slot: int
    price: float
    rewards: Dict[str, float]
    withheld: float
    turnover: Dict[str, float]
    liquidity: Dict[int, float]


@dataclass
class SimReport:
    provider_ids: List[str]
    records: List[SlotRecord]
    cumulative_rewards: Dict[str, float]
    total_turnover: Dict[str, float]
    price_path: List[float]
    seed: int

    def to_json(self) -> dict:
        return {
            "seed": self.seed,
            "providers": list(self.provider_ids),
            "slots": [{
                "slot": r.slot,
                "price": r.price,
                "rewards": {pid: r.rewards.get(pid, 0.0)
                            for pid in self.provider_ids},
                "withheld": r.withheld,
                "turnover": {pid: r.turnover.get(pid, 0.0)
                             for pid in self.provider_ids},
                "liquidity": {str(i): v for i, v in sorted(r.liquidity.items())},
            } for r in self.records],
            "cumulative_rewards": dict(self.cumulative_rewards),
            "total_turnover": dict(self.total_turnover),
            "price_path": list(self.price_path),
        }

    def to_csv(self) -> str:
        """Per-slot rows; floats printed with 12 significant digits."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        header = (["slot", "price"]
                  + [f"reward:{pid}" for pid in self.provider_ids]
                  + ["withheld"]
                  + [f"turnover:{pid}" for pid in self.provider_ids])
        writer.writerow(header)
        for r in self.records:
            row = [str(r.slot), FLOAT_FMT % r.price]
            row += [FLOAT_FMT % r.rewards.get(pid, 0.0) for pid in self.provider_ids]
            row.append(FLOAT_FMT % r.withheld)
            row += [FLOAT_FMT % r.turnover.get(pid, 0.0) for pid in self.provider_ids]
            writer.writerow(row)
        return buf.getvalue()


def _opponents_from_state(state: PoolState, exclude: str | None = None) -> OpponentAggregate:
    xs: Dict[int, float] = {}
    ys: Dict[int, float] = {}
    for i, by in state.positions.items():
        liq = sum(l for pid, l in by.items() if pid != exclude)
        if liq <= 0.0:
            continue
        amounts = tokens_for_liquidity(i, liq, state.current_price, state.config)
        if amounts.x:
            xs[i] = amounts.x
        if amounts.y:
            ys[i] = amounts.y
    return OpponentAggregate(xs, ys)


def _usable_wallet(wallet: ProviderWallet, state: PoolState,
                   schedule: RewardSchedule) -> ProviderWallet:
    """Restrict the wallet to the sides the schedule can absorb here.

    Simulated providers deposit voluntarily: budget on a side with no
    supported bins simply stays idle instead of aborting the scenario.
    """
    split = split_support(schedule, state.current_price, state.config)
    x, y = wallet.x, wallet.y
    if split.active is None:
        if not split.right:
            x = 0.0
        if not split.left:
            y = 0.0
    return ProviderWallet(x, y)


def _decide(policy: Policy, wallet: ProviderWallet, fixed: Optional[Allocation],
            state: PoolState, schedule: RewardSchedule) -> Allocation:
    if policy == Policy.FIXED:
        return fixed
    wallet = _usable_wallet(wallet, state, schedule)
    if wallet.x <= 0.0 and wallet.y <= 0.0:
        return Allocation({})
    if policy == Policy.PROPORTIONAL:
        return proportional_allocation(wallet, schedule,
                                       state.current_price, state.config)
    others = _opponents_from_state(state)
    return best_response(wallet, others, schedule,
                         state.current_price, state.config)


def _deposit_allocation(state: PoolState, pid: str, alloc: Allocation) -> PoolState:
    for i, amounts in sorted(alloc.per_bin.items()):
        liq = liquidity_for_tokens(i, amounts, state.current_price, state.config)
        if liq > 0.0:
            state, _ = deposit(state, pid, i, liq)
    return state


def _movement(old: Dict[int, TokenAmounts], new: Dict[int, TokenAmounts]) -> float:
    bins = set(old) | set(new)
    zero = TokenAmounts()
    total = 0.0
    for i in bins:
        a = old.get(i, zero)
        b = new.get(i, zero)
        total += abs(b.x - a.x) + abs(b.y - a.y)
    return total


def run_scenario(scenario: SimScenario) -> SimReport:
    """Execute a scenario deterministically and assemble its report."""
    errs = scenario.validate()
    if errs:
        raise ScenarioError(errs)
    specs = {p.id: p for p in scenario.providers}
    state = PoolState(scenario.pool, scenario.price0())
    last_bin: Dict[str, int] = {}

    for pid in scenario.arrival_order:
        spec = specs[pid]
        alloc = _decide(spec.policy, spec.wallet, spec.allocation, state,
                        scenario.schedule)
        state = _deposit_allocation(state, pid, alloc)
        last_bin[pid] = bin_of(state.current_price, state.config)

    ids = [p.id for p in scenario.providers]
    cumulative = {pid: 0.0 for pid in ids}
    total_turnover = {pid: 0.0 for pid in ids}
    price_path = [state.current_price]
    records: List[SlotRecord] = []

    for slot in range(1, scenario.slots + 1):
        for trade in scenario.trades:
            if trade.slot == slot:
                state = swap_exact_in(state, trade.side, trade.amount).state

        slot_turnover = {pid: 0.0 for pid in ids}
        if scenario.reallocation != Realloc.NEVER:
            current_bin = bin_of(state.current_price, state.config)
            for pid in scenario.arrival_order:
                spec = specs[pid]
                if spec.policy == Policy.FIXED:
                    continue
                if scenario.reallocation == Realloc.ON_BIN_SHIFT and \
                        current_bin == last_bin[pid]:
                    continue
                old_tokens = position_tokens(state, pid)
                state, _ = withdraw_all(state, pid)
                wallet = ProviderWallet(sum(a.x for a in old_tokens.values()),
                                        sum(a.y for a in old_tokens.values()))
                alloc = _decide(spec.policy, wallet, spec.allocation, state,
                                scenario.schedule)
                state = _deposit_allocation(state, pid, alloc)
                moved = _movement(old_tokens, alloc.per_bin)
                slot_turnover[pid] += moved
                total_turnover[pid] += moved
                last_bin[pid] = current_bin

        statement = accrue_slot(state, scenario.schedule)
        for pid, v in statement.per_provider.items():
            cumulative[pid] += v
        price_path.append(state.current_price)
        records.append(SlotRecord(slot=slot,
                                  price=state.current_price,
                                  rewards=dict(statement.per_provider),
                                  withheld=statement.withheld,
                                  turnover=slot_turnover,
                                  liquidity=state.liquidity_profile()))

    return SimReport(provider_ids=ids, records=records,
                     cumulative_rewards=cumulative,
                     total_turnover=total_turnover,
                     price_path=price_path, seed=scenario.seed)


def stability_probe(scenario: SimScenario,
                    price_shift: int) -> Tuple[float, float]:
    """Cost/benefit of re-optimizing after an exogenous shift of the
    price by `price_shift` bins (signed).

    Probes the last provider in the arrival order: returns the token
    turnover of switching to a fresh best response at the shifted price,
    and the per-slot reward that staying static would forgo.
    """
    errs = scenario.validate()
    if errs:
        raise ScenarioError(errs)
    if price_shift == 0:
        return 0.0, 0.0
    specs = {p.id: p for p in scenario.providers}
    state = PoolState(scenario.pool, scenario.price0())
    for pid in scenario.arrival_order:
        spec = specs[pid]
        alloc = _decide(spec.policy, spec.wallet, spec.allocation, state,
                        scenario.schedule)
        state = _deposit_allocation(state, pid, alloc)

    pid = scenario.arrival_order[-1]
    p_new = state.current_price * scenario.pool.d ** price_shift
    lo = tick_price(scenario.pool.i_min, scenario.pool)
    hi = tick_price(scenario.pool.i_max + 1, scenario.pool)
    if not (lo <= p_new < hi):
        raise ScenarioError([f"shifted price {p_new} leaves the pool window"])
    shifted = state.copy()
    shifted.current_price = p_new

    static_reward = accrue_slot(shifted, scenario.schedule).per_provider.get(pid, 0.0)
    old_tokens = position_tokens(shifted, pid)
    base, _ = withdraw_all(shifted, pid)
    wallet = ProviderWallet(sum(a.x for a in old_tokens.values()),
                            sum(a.y for a in old_tokens.values()))
    others = _opponents_from_state(base)
    fresh = best_response(wallet, others, scenario.schedule, p_new, scenario.pool)
    fresh_reward = expected_reward(fresh, others, scenario.schedule, p_new,
                                   scenario.pool)
    turnover = _movement(old_tokens, fresh.per_bin)
    return turnover, max(0.0, fresh_reward - static_reward)
