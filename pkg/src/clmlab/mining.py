"""Reward schedules and per-slot pro-rata accrual.

A schedule distributes a per-slot budget R over supported bins; within
each supported bin the bin's reward is split among providers in
proportion to their share of the bin's liquidity. Rewards of supported
bins holding zero liquidity are withheld (reported, never rolled over).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List

from .pool import PoolConfig, PoolState

SUM_TOL = 1e-9


@dataclass(frozen=True)
class RewardSchedule:
    """Per-slot budget and its distribution over supported bins."""

    slot_reward: float
    per_bin: Dict[int, float] = field(default_factory=dict)

    def support(self) -> List[int]:
        return sorted(self.per_bin)

    def to_json(self) -> dict:
        return {"slot_reward": self.slot_reward,
                "per_bin": {str(i): r for i, r in sorted(self.per_bin.items())}}

    @classmethod
    def from_json(cls, obj: dict) -> "RewardSchedule":
        return cls(slot_reward=float(obj["slot_reward"]),
                   per_bin={int(i): float(r) for i, r in obj["per_bin"].items()})


@dataclass(frozen=True)
class RewardStatement:
    """One slot's payout: per-provider totals plus withheld remainder."""

    per_provider: Dict[str, float]
    withheld: float

    @property
    def total(self) -> float:
        return sum(self.per_provider.values()) + self.withheld


def validate_schedule(schedule: RewardSchedule,
                      config: PoolConfig | None = None) -> List[str]:
    """Check feasibility; returns a list of violations (empty = ok)."""
    violations = []
    total = sum(schedule.per_bin.values())
    if schedule.slot_reward < 0:
        violations.append(f"slot_reward {schedule.slot_reward} is negative")
    if abs(total - schedule.slot_reward) > SUM_TOL * max(abs(schedule.slot_reward), 1.0):
        violations.append(
            f"per-bin rewards sum to {total}, not slot_reward "
            f"{schedule.slot_reward} (residual {total - schedule.slot_reward})")
    for i, r in sorted(schedule.per_bin.items()):
        if r < 0:
            violations.append(f"bin {i} has negative reward {r}")
        if config is not None and not (config.i_min <= i <= config.i_max):
            violations.append(
                f"bin {i} outside pool window [{config.i_min}, {config.i_max}]")
    return violations


def accrue_slot(state: PoolState, schedule: RewardSchedule) -> RewardStatement:
    """Distribute one slot's rewards pro-rata to the snapshot state."""
    per: Dict[str, float] = {}
    withheld = 0.0
    for i, r_i in schedule.per_bin.items():
        if r_i == 0.0:
            continue
        total = state.bin_liquidity(i)
        if total <= 0.0:
            withheld += r_i
            continue
        for pid, liq in state.positions.get(i, {}).items():
            if liq > 0.0:
                per[pid] = per.get(pid, 0.0) + r_i * liq / total
    return RewardStatement(per_provider=per, withheld=withheld)
