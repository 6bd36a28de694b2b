"""Reward-distribution designers and the market metrics they target.

Three shape families: exponential decay away from the current price
(low slippage), exponential concentration toward the edges of a target
price interval (price stabilization), and the constant-product
equivalent whose per-bin weights are the increments of 1/sqrt(p) right
of the price and of sqrt(p) on the left. Any convex mixture of emitted
schedules is itself a valid schedule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Sequence, Tuple

from .errors import DirectionError, LabError, MetricError, RangeError
from .mining import RewardSchedule
from .pool import (PoolConfig, PoolState, Side, bin_of, swap_exact_in,
                   tick_index_of, tick_price)


class DesignError(LabError):
    """Invalid designer parameters."""


@dataclass(frozen=True)
class DesignSpec:
    """Declarative designer invocation: a kind plus its parameters."""

    kind: str
    params: dict = field(default_factory=dict)

    KINDS = ("low_slippage", "price_stabilization", "v2_equivalent", "mixture")

    def to_json(self) -> dict:
        return {"kind": self.kind, "params": self.params}

    @classmethod
    def from_json(cls, obj: dict) -> "DesignSpec":
        kind = obj["kind"]
        if kind not in cls.KINDS:
            raise DesignError(f"unknown design kind {kind!r}")
        return cls(kind=kind, params=dict(obj.get("params", {})))

    def build(self, config: PoolConfig) -> RewardSchedule:
        p = self.params
        if self.kind == "low_slippage":
            return design_low_slippage(int(p["center_bin"]), float(p["alpha"]),
                                       [int(i) for i in p["support"]],
                                       float(p["total_reward"]), config)
        if self.kind == "price_stabilization":
            return design_price_stabilization(float(p["p_a"]), float(p["p_b"]),
                                              float(p["beta"]),
                                              float(p["total_reward"]), config)
        if self.kind == "v2_equivalent":
            rho = p.get("rho")
            return design_v2_equivalent(float(p["p_c"]),
                                        (int(p["window"][0]), int(p["window"][1])),
                                        float(p["total_reward"]), config,
                                        rho=None if rho is None else float(rho))
        components = [DesignSpec.from_json(c).build(config)
                      for c in p["components"]]
        return mix(components, [float(w) for w in p["weights"]],
                   float(p["total_reward"]), config)


def _normalized(weights: Dict[int, float], total_reward: float) -> RewardSchedule:
    wsum = sum(weights.values())
    if wsum <= 0.0:
        raise DesignError("design weights sum to zero")
    return RewardSchedule(slot_reward=total_reward,
                          per_bin={i: total_reward * w / wsum
                                   for i, w in weights.items()})


def design_low_slippage(center_bin: int, alpha: float, support: Iterable[int],
                        total_reward: float, config: PoolConfig) -> RewardSchedule:
    """Rewards decaying exponentially with bin distance from center_bin."""
    if alpha <= 0:
        raise DesignError("alpha must be positive")
    bins = sorted(set(int(i) for i in support))
    if not bins:
        raise DesignError("empty support")
    for i in bins:
        if not (config.i_min <= i <= config.i_max):
            raise RangeError(f"support bin {i} outside pool window")
    if center_bin not in bins:
        raise DesignError("center_bin must belong to the support")
    weights = {i: math.exp(-alpha * abs(i - center_bin)) for i in bins}
    return _normalized(weights, total_reward)


def bins_covering(p_a: float, p_b: float, config: PoolConfig) -> List[int]:
    """Bins whose price range intersects [p_a, p_b] on positive length."""
    if p_a >= p_b:
        raise DesignError("p_a must be below p_b")
    i_a = bin_of(p_a, config)
    i_b = bin_of(p_b, config)
    m = tick_index_of(p_b, config)
    if m is not None and m > i_a:
        i_b = m - 1
    return list(range(i_a, i_b + 1))


def bins_within(p_lo: float, p_hi: float, config: PoolConfig) -> List[int]:
    """Bins fully contained in [p_lo, p_hi]."""
    out = []
    for i in range(config.i_min, config.i_max + 1):
        if tick_price(i, config) >= p_lo * (1 - 1e-12) and \
                config.p0 * config.d ** (i + 1) <= p_hi * (1 + 1e-12):
            out.append(i)
    return out


def design_price_stabilization(p_a: float, p_b: float, beta: float,
                               total_reward: float,
                               config: PoolConfig) -> RewardSchedule:
    """Rewards decaying exponentially with bin distance from the nearer
    edge of the target interval [p_a, p_b]; maxima sit at the edge bins."""
    if beta <= 0:
        raise DesignError("beta must be positive")
    bins = bins_covering(p_a, p_b, config)
    i_a, i_b = bins[0], bins[-1]
    weights = {i: math.exp(-beta * min(i - i_a, i_b - i)) for i in bins}
    return _normalized(weights, total_reward)


def design_v2_equivalent(p_c: float, window: Tuple[int, int],
                         total_reward: float, config: PoolConfig,
                         rho: float | None = None) -> RewardSchedule:
    """Rewards reproducing the constant-product liquidity profile.

    Right of p_c the per-bin weight is the increment of 1/sqrt(p); left
    of p_c it is the increment of sqrt(p). The budget splits rho : 1-rho
    between the right and left families; by default rho follows the
    truncated weight masses, which makes the per-token liquidity uniform.
    """
    i_lo, i_hi = window
    if i_lo > i_hi:
        raise DesignError("empty window")
    if not (config.i_min <= i_lo and i_hi <= config.i_max):
        raise RangeError("window outside pool index range")
    m = tick_index_of(p_c, config)
    if m is None:
        raise DesignError("v2-equivalent design requires p_c on a tick")
    right = [i for i in range(i_lo, i_hi + 1) if i >= m]
    left = [i for i in range(i_lo, i_hi + 1) if i < m]
    w_right = {i: 1.0 / math.sqrt(tick_price(i, config))
               - 1.0 / math.sqrt(config.p0 * config.d ** (i + 1)) for i in right}
    w_left = {i: math.sqrt(config.p0 * config.d ** (i + 1))
              - math.sqrt(tick_price(i, config)) for i in left}
    mass_r = sum(w_right.values())
    mass_l = sum(w_left.values())
    if rho is None:
        rho = mass_r / (mass_r + mass_l)
    if not (0.0 <= rho <= 1.0):
        raise DesignError("rho must lie in [0, 1]")
    if rho > 0.0 and not right:
        raise DesignError("rho assigns budget to an empty right side")
    if rho < 1.0 and not left:
        raise DesignError("rho assigns budget to an empty left side")
    per: Dict[int, float] = {}
    for i, w in w_right.items():
        per[i] = rho * total_reward * w / mass_r
    for i, w in w_left.items():
        per[i] = (1.0 - rho) * total_reward * w / mass_l
    return RewardSchedule(slot_reward=total_reward, per_bin=per)


def mix(schedules: Sequence[RewardSchedule], weights: Sequence[float],
        total_reward: float, config: PoolConfig | None = None) -> RewardSchedule:
    """Pointwise convex combination of schedules, rescaled to total_reward."""
    if len(schedules) != len(weights) or not schedules:
        raise DesignError("schedules and weights must match and be nonempty")
    if any(w < 0 for w in weights):
        raise DesignError("mixture weights must be nonnegative")
    if abs(sum(weights) - 1.0) > 1e-9:
        raise DesignError("mixture weights must sum to 1")
    combined: Dict[int, float] = {}
    for sched, w in zip(schedules, weights):
        for i, r in sched.per_bin.items():
            combined[i] = combined.get(i, 0.0) + w * r
    if config is not None:
        for i in combined:
            if not (config.i_min <= i <= config.i_max):
                raise RangeError(f"mixture support bin {i} outside pool window")
    return _normalized(combined, total_reward)


def slippage_of_trade(state: PoolState, side: Side, amount_in: float) -> float:
    """Relative degradation of the average execution price versus the
    pre-trade marginal price; worse execution is positive. Partial fills
    are priced over the consumed input only."""
    result = swap_exact_in(state, side, amount_in)
    if result.amount_out <= 0.0:
        raise MetricError("no executable liquidity for this trade")
    p = state.current_price
    if side == Side.Y_IN:
        avg = result.amount_in_consumed / result.amount_out
        return avg / p - 1.0
    avg = result.amount_out / result.amount_in_consumed
    return p / avg - 1.0


def breakout_cost(state: PoolState, direction: str, boundary: float) -> float:
    """Input tokens needed to push the price to `boundary`.

    direction "up" consumes Y (cost L_i * delta sqrt(p) per bin), "down"
    consumes X (cost L_i * delta 1/sqrt(p)). Empty bins cost nothing.
    """
    cfg = state.config
    p = state.current_price
    top = tick_price(cfg.i_max + 1, cfg)
    bottom = tick_price(cfg.i_min, cfg)
    if direction not in ("up", "down"):
        raise ValueError("direction must be 'up' or 'down'")
    if not (bottom <= boundary <= top):
        raise RangeError(f"boundary {boundary} outside pool window")
    cost = 0.0
    if direction == "up":
        if boundary <= p:
            raise DirectionError("up breakout needs a boundary above the price")
        start = cfg.i_max if p >= top else bin_of(p, cfg)
        for i in range(start, cfg.i_max + 1):
            lo = max(p, tick_price(i, cfg))
            hi = min(boundary, cfg.p0 * cfg.d ** (i + 1))
            if hi <= lo:
                break
            cost += state.bin_liquidity(i) * (math.sqrt(hi) - math.sqrt(lo))
        return cost
    if boundary >= p:
        raise DirectionError("down breakout needs a boundary below the price")
    start = cfg.i_max if p >= top else bin_of(p, cfg)
    # A price resting exactly on a tick leaves nothing of its own bin to
    # traverse downward; start from the bin below instead.
    m = tick_index_of(p, cfg)
    if m is not None and m > cfg.i_min and m == start:
        start = m - 1
    for i in range(start, cfg.i_min - 1, -1):
        hi = min(p, cfg.p0 * cfg.d ** (i + 1))
        lo = max(boundary, tick_price(i, cfg))
        if hi <= lo:
            break
        cost += state.bin_liquidity(i) * (1.0 / math.sqrt(lo) - 1.0 / math.sqrt(hi))
    return cost
