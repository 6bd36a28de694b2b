"""Liquidity-provider strategies over a reward schedule.

The per-slot payoff of a provider holding token amount a_i in a
supported bin against an opponent total o_i is R_i * a_i / (a_i + o_i)
(token amounts are proportional to liquidity within a bin, so token
shares equal liquidity shares). At a tick-boundary price the X and Y
problems decouple and the best response is a waterfilling solution of
the KKT stationarity

    a_i = sqrt(R_i * o_i / lam) - o_i   (clipped at zero),

with the multiplier lam found by bisection on the budget constraint.
Opponent-free bins are claimed with a minimum stake before the
remainder is waterfilled, because the supremum there is not attained.
At an interior price the active bin needs both tokens at a fixed y/x
ratio; a one-dimensional golden-section search over the active-bin X
commitment wraps the two one-sided waterfilling subproblems.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, Mapping, Tuple

import numpy as np

from .errors import SizeError, UnallocatableError
from .mining import RewardSchedule
from .pool import (PoolConfig, TokenAmounts, bin_of, coupling_ratio,
                   tick_index_of)

DEFAULT_TOL = 1e-8
MIN_STAKE_FRACTION = 1e-9
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
SCAN_POINTS = 33


@dataclass(frozen=True)
class ProviderWallet:
    """A provider's X/Y token endowment."""

    x: float
    y: float

    def __post_init__(self):
        if self.x < 0 or self.y < 0:
            raise ValueError("wallet amounts must be nonnegative")


@dataclass
class Allocation:
    """One provider's token deployment across bins."""

    per_bin: Dict[int, TokenAmounts] = field(default_factory=dict)

    def x_in(self, i: int) -> float:
        return self.per_bin.get(i, TokenAmounts()).x

    def y_in(self, i: int) -> float:
        return self.per_bin.get(i, TokenAmounts()).y

    def total_x(self) -> float:
        return sum(a.x for a in self.per_bin.values())

    def total_y(self) -> float:
        return sum(a.y for a in self.per_bin.values())

    def to_json(self) -> dict:
        return {"per_bin": {str(i): {"x": a.x, "y": a.y}
                            for i, a in sorted(self.per_bin.items())}}

    @classmethod
    def from_json(cls, obj: dict) -> "Allocation":
        return cls(per_bin={int(i): TokenAmounts(float(a["x"]), float(a["y"]))
                            for i, a in obj["per_bin"].items()})


@dataclass
class OpponentAggregate:
    """Per-bin totals of all other providers' deployed tokens."""

    x_by_bin: Dict[int, float] = field(default_factory=dict)
    y_by_bin: Dict[int, float] = field(default_factory=dict)

    def x(self, i: int) -> float:
        return self.x_by_bin.get(i, 0.0)

    def y(self, i: int) -> float:
        return self.y_by_bin.get(i, 0.0)

    @classmethod
    def from_allocations(cls, allocations: Iterable[Allocation]) -> "OpponentAggregate":
        xs: Dict[int, float] = {}
        ys: Dict[int, float] = {}
        for alloc in allocations:
            for i, a in alloc.per_bin.items():
                if a.x:
                    xs[i] = xs.get(i, 0.0) + a.x
                if a.y:
                    ys[i] = ys.get(i, 0.0) + a.y
        return cls(xs, ys)


@dataclass(frozen=True)
class SupportSplit:
    """Positive-reward bins partitioned around the current price."""

    left: Tuple[int, ...]
    active: int | None
    right: Tuple[int, ...]


def split_support(schedule: RewardSchedule, p_c: float,
                  config: PoolConfig) -> SupportSplit:
    """Partition supported bins into left (Y side), active, right (X side).

    At a tick-boundary price there is no active bin: the boundary bin
    itself takes only X and joins the right side.
    """
    support = sorted(i for i, r in schedule.per_bin.items() if r > 0)
    m = tick_index_of(p_c, config)
    if m is not None:
        return SupportSplit(left=tuple(i for i in support if i < m),
                            active=None,
                            right=tuple(i for i in support if i >= m))
    j = bin_of(p_c, config)
    return SupportSplit(left=tuple(i for i in support if i < j),
                        active=j if j in support else None,
                        right=tuple(i for i in support if i > j))


def _spread(budget: float, bins: Tuple[int, ...],
            rewards: Mapping[int, float], label: str) -> Dict[int, float]:
    if budget <= 0.0:
        return {}
    if not bins:
        raise UnallocatableError(
            f"nonzero {label} budget but no supported bins on that side")
    total = sum(rewards[i] for i in bins)
    return {i: budget * rewards[i] / total for i in bins}


def proportional_allocation(wallet: ProviderWallet, schedule: RewardSchedule,
                            p_c: float, config: PoolConfig,
                            active_share: float | None = None) -> Allocation:
    """The proportional (equilibrium) strategy: X spread over right bins
    and Y over left bins in proportion to their rewards.

    At an interior price, `active_share` fixes the fraction of X
    committed to the active bin (default: the active bin's share of the
    total reward); its Y companion follows from the coupling ratio, and
    both residual budgets are spread proportionally.
    """
    split = split_support(schedule, p_c, config)
    rewards = schedule.per_bin
    per: Dict[int, TokenAmounts] = {}

    if split.active is None:
        for i, v in _spread(wallet.x, split.right, rewards, "X").items():
            per[i] = TokenAmounts(x=v)
        for i, v in _spread(wallet.y, split.left, rewards, "Y").items():
            per[i] = TokenAmounts(y=v)
        return Allocation(per)

    j = split.active
    c = coupling_ratio(j, p_c, config)
    r_total = sum(r for r in rewards.values() if r > 0)
    share = rewards[j] / r_total if active_share is None else active_share
    if not (0.0 <= share <= 1.0):
        raise ValueError("active_share must lie in [0, 1]")
    xj = share * wallet.x
    if not split.right:
        xj = wallet.x
    if not split.left and c > 0.0:
        xj = wallet.y / c
        if xj > wallet.x * (1.0 + 1e-12):
            raise UnallocatableError(
                "coupling requires more X than the wallet holds")
        xj = min(xj, wallet.x)
    if c > 0.0 and c * xj > wallet.y:
        xj = wallet.y / c
    yj = c * xj
    if xj > 0.0 or yj > 0.0:
        per[j] = TokenAmounts(x=xj, y=yj)
    for i, v in _spread(wallet.x - xj, split.right, rewards, "X").items():
        per[i] = TokenAmounts(x=v)
    for i, v in _spread(wallet.y - yj, split.left, rewards, "Y").items():
        per[i] = TokenAmounts(y=v)
    return Allocation(per)


def expected_reward(mine: Allocation, others: OpponentAggregate,
                    schedule: RewardSchedule, p_c: float,
                    config: PoolConfig) -> float:
    """Per-slot reward of `mine` against the opponent aggregate."""
    split = split_support(schedule, p_c, config)
    rewards = schedule.per_bin
    total = 0.0
    for i in split.right:
        a = mine.x_in(i)
        if a > 0.0:
            total += rewards[i] * a / (a + others.x(i))
    for i in split.left:
        a = mine.y_in(i)
        if a > 0.0:
            total += rewards[i] * a / (a + others.y(i))
    if split.active is not None:
        a = mine.x_in(split.active)
        if a > 0.0:
            total += rewards[split.active] * a / (a + others.x(split.active))
    return total


def _waterfill(bins: Tuple[int, ...], rewards: Mapping[int, float],
               opp: Mapping[int, float], budget: float,
               min_stake: float, label: str) -> Dict[int, float]:
    """Optimal one-sided allocation of `budget` over `bins`.

    Opponent-free bins are claimed with min_stake each; the remainder is
    waterfilled over contested bins (or, failing those, spread over the
    free bins in proportion to their rewards).
    """
    if budget <= 0.0:
        return {}
    if not bins:
        raise UnallocatableError(
            f"nonzero {label} budget but no supported bins on that side")
    free = [i for i in bins if opp.get(i, 0.0) <= 0.0]
    contested = [i for i in bins if opp.get(i, 0.0) > 0.0]
    alloc: Dict[int, float] = {}
    residual = budget
    if free:
        stake = min(min_stake, budget / len(free))
        for i in free:
            alloc[i] = stake
        residual = budget - stake * len(free)
    if residual <= 0.0:
        return alloc
    if not contested:
        wsum = sum(rewards[i] for i in free)
        for i in free:
            alloc[i] += residual * rewards[i] / wsum
        return alloc
    lam_hi = max(rewards[i] / opp[i] for i in contested)
    lam_lo = min(rewards[i] * opp[i] / (residual + opp[i]) ** 2 for i in contested)
    lam_lo = min(lam_lo, lam_hi)
    for _ in range(200):
        lam = math.sqrt(lam_lo * lam_hi)
        s = sum(max(0.0, math.sqrt(rewards[i] * opp[i] / lam) - opp[i])
                for i in contested)
        if s > residual:
            lam_lo = lam
        else:
            lam_hi = lam
    lam = math.sqrt(lam_lo * lam_hi)
    xs = {i: max(0.0, math.sqrt(rewards[i] * opp[i] / lam) - opp[i])
          for i in contested}
    s = sum(xs.values())
    if s <= 0.0:
        best = max(contested, key=lambda i: rewards[i] / opp[i])
        xs = {best: residual}
        s = residual
    scale = residual / s
    for i, v in xs.items():
        if v > 0.0:
            alloc[i] = alloc.get(i, 0.0) + v * scale
    return alloc


def _side_value(alloc: Mapping[int, float], rewards: Mapping[int, float],
                opp: Mapping[int, float]) -> float:
    total = 0.0
    for i, a in alloc.items():
        if a > 0.0:
            total += rewards[i] * a / (a + opp.get(i, 0.0))
    return total


def best_response(wallet: ProviderWallet, others: OpponentAggregate,
                  schedule: RewardSchedule, p_c: float, config: PoolConfig,
                  tol: float = DEFAULT_TOL,
                  min_stake: float | None = None) -> Allocation:
    """Allocation maximizing expected_reward against fixed opponents.

    At a boundary price the X and Y problems are solved independently by
    waterfilling. At an interior price a coarse scan plus golden-section
    search over the active-bin X commitment t (with its Y companion tied
    by the coupling ratio) wraps the one-sided subproblems; the search
    assumes the value is unimodal in t, which the scan guards.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    split = split_support(schedule, p_c, config)
    if not (split.left or split.right or split.active is not None):
        raise UnallocatableError("schedule has no positive-reward bins")
    budget = wallet.x + wallet.y
    if budget <= 0.0:
        return Allocation({})
    eps = MIN_STAKE_FRACTION * budget if min_stake is None else min_stake
    rewards = schedule.per_bin

    if split.active is None:
        per: Dict[int, TokenAmounts] = {}
        for i, v in _waterfill(split.right, rewards, others.x_by_bin,
                               wallet.x, eps, "X").items():
            per[i] = TokenAmounts(x=v)
        for i, v in _waterfill(split.left, rewards, others.y_by_bin,
                               wallet.y, eps, "Y").items():
            per[i] = TokenAmounts(y=v)
        return Allocation(per)

    j = split.active
    c = coupling_ratio(j, p_c, config)
    o_j = others.x(j)
    t_hi = wallet.x if c <= 0.0 else min(wallet.x, wallet.y / c)

    pins = []
    if not split.right:
        pins.append(wallet.x)
    if not split.left and c > 0.0:
        pins.append(wallet.y / c)
    if pins:
        if len(pins) == 2 and abs(pins[0] - pins[1]) > 1e-9 * max(budget, 1.0):
            raise UnallocatableError(
                "active-bin coupling cannot exhaust both token budgets")
        if pins[0] > t_hi * (1.0 + 1e-9) + 1e-300:
            raise UnallocatableError(
                "active-bin coupling exhausts one token before the other")
        t_star = min(pins[0], t_hi)
    elif o_j <= 0.0:
        t_star = min(eps, t_hi) if rewards[j] > 0 else 0.0
    else:
        def value(t: float) -> float:
            v = rewards[j] * t / (t + o_j) if t > 0.0 else 0.0
            rx = max(0.0, wallet.x - t)
            ry = max(0.0, wallet.y - c * t)
            if rx > 0.0:
                ax = _waterfill(split.right, rewards, others.x_by_bin, rx, eps, "X")
                v += _side_value(ax, rewards, others.x_by_bin)
            if ry > 0.0:
                ay = _waterfill(split.left, rewards, others.y_by_bin, ry, eps, "Y")
                v += _side_value(ay, rewards, others.y_by_bin)
            return v

        ts = [t_hi * k / (SCAN_POINTS - 1) for k in range(SCAN_POINTS)]
        vals = [value(t) for t in ts]
        k = max(range(SCAN_POINTS), key=lambda m: vals[m])
        a = ts[max(0, k - 1)]
        b = ts[min(SCAN_POINTS - 1, k + 1)]
        t_star, _ = _golden_max(value, a, b, tol * max(t_hi, 1e-300))
        if value(ts[k]) > value(t_star):
            t_star = ts[k]

    per = {}
    if t_star > 0.0:
        per[j] = TokenAmounts(x=t_star, y=c * t_star)
    rx = max(0.0, wallet.x - t_star)
    ry = max(0.0, wallet.y - c * t_star)
    if split.right:
        for i, v in _waterfill(split.right, rewards, others.x_by_bin,
                               rx, eps, "X").items():
            per[i] = TokenAmounts(x=v)
    if split.left:
        for i, v in _waterfill(split.left, rewards, others.y_by_bin,
                               ry, eps, "Y").items():
            per[i] = TokenAmounts(y=v)
    return Allocation(per)


def _golden_max(f, a: float, b: float, tol: float) -> Tuple[float, float]:
    """Golden-section maximization of f over [a, b]."""
    if b - a <= tol:
        t = 0.5 * (a + b)
        return t, f(t)
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
    t = c if fc >= fd else d
    return t, max(fc, fd)


def _lattice(k: int, n: int) -> np.ndarray:
    """Integer compositions of n into k nonnegative parts, ordered so the
    first coordinate (lowest bin index) grows slowest."""
    if k == 1:
        return np.array([[n]], dtype=np.int64)
    if (n + 1) ** (k - 1) > 4e7:
        raise SizeError(f"grid of {n} steps over {k} bins is too large")
    if k == 2:
        c0 = np.arange(n + 1, dtype=np.int64)
        return np.stack([c0, n - c0], axis=1)
    if k == 3:
        i0, i1 = np.meshgrid(np.arange(n + 1), np.arange(n + 1), indexing="ij")
        mask = i0 + i1 <= n
        c0 = i0[mask]
        c1 = i1[mask]
        return np.stack([c0, c1, n - c0 - c1], axis=1).astype(np.int64)
    blocks = []
    for c0 in range(n + 1):
        tail = _lattice(k - 1, n - c0)
        head = np.full((tail.shape[0], 1), c0, dtype=np.int64)
        blocks.append(np.hstack([head, tail]))
    return np.vstack(blocks)


def _brute_side(bins: Tuple[int, ...], rewards: Mapping[int, float],
                opp: Mapping[int, float], budget: float,
                n: int) -> Tuple[Dict[int, float], float]:
    if budget <= 0.0 or not bins:
        return {}, 0.0
    lattice = _lattice(len(bins), n).astype(float) * (budget / n)
    rr = np.array([rewards[i] for i in bins])
    oo = np.array([opp.get(i, 0.0) for i in bins])
    denom = lattice + oo
    vals = np.where(denom > 0.0, rr * lattice / np.where(denom > 0.0, denom, 1.0),
                    0.0).sum(axis=1)
    idx = int(np.argmax(vals))
    alloc = {bins[m]: float(lattice[idx, m])
             for m in range(len(bins)) if lattice[idx, m] > 0.0}
    return alloc, float(vals[idx])


def brute_force_best_response(wallet: ProviderWallet, others: OpponentAggregate,
                              schedule: RewardSchedule, p_c: float,
                              config: PoolConfig,
                              grid_step: float) -> Allocation:
    """Exhaustive lattice oracle for the best-response problem.

    grid_step is the lattice resolution as a fraction of each side's
    budget. Ties break toward the lexicographically smallest amounts
    vector (lowest bin index first), which is how the lattice is
    enumerated. Limited to at most 4 supported bins.
    """
    if grid_step <= 0:
        raise ValueError("grid_step must be positive")
    split = split_support(schedule, p_c, config)
    nbins = len(split.left) + len(split.right) + (split.active is not None)
    if nbins > 4:
        raise SizeError(f"{nbins} supported bins exceed the oracle limit of 4")
    if nbins == 0:
        raise UnallocatableError("schedule has no positive-reward bins")
    n = max(1, round(1.0 / grid_step))
    rewards = schedule.per_bin

    if wallet.x > 0.0 and not split.right and split.active is None:
        raise UnallocatableError("nonzero X budget but no bins right of the price")
    if wallet.y > 0.0 and not split.left and split.active is None:
        raise UnallocatableError("nonzero Y budget but no bins left of the price")

    if split.active is None:
        ax, _ = _brute_side(split.right, rewards, others.x_by_bin, wallet.x, n)
        ay, _ = _brute_side(split.left, rewards, others.y_by_bin, wallet.y, n)
        per = {i: TokenAmounts(x=v) for i, v in ax.items()}
        for i, v in ay.items():
            per[i] = TokenAmounts(y=v)
        return Allocation(per)

    j = split.active
    c = coupling_ratio(j, p_c, config)
    o_j = others.x(j)
    t_hi = wallet.x if c <= 0.0 else min(wallet.x, wallet.y / c)
    t_lo = 0.0
    if not split.right:
        t_lo = t_hi = min(wallet.x, t_hi)
    if not split.left and c > 0.0:
        t_lo = t_hi = min(wallet.y / c, t_hi)
    best_val = -1.0
    best: Dict[int, TokenAmounts] = {}
    steps = [t_lo] if t_hi <= t_lo else \
        [t_lo + (t_hi - t_lo) * k / n for k in range(n + 1)]
    for t in steps:
        v = rewards[j] * t / (t + o_j) if (t > 0.0 and t + o_j > 0.0) else \
            (rewards[j] if t > 0.0 else 0.0)
        ax, vx = _brute_side(split.right, rewards, others.x_by_bin,
                             max(0.0, wallet.x - t), n)
        ay, vy = _brute_side(split.left, rewards, others.y_by_bin,
                             max(0.0, wallet.y - c * t), n)
        if v + vx + vy > best_val:
            best_val = v + vx + vy
            per = {i: TokenAmounts(x=a) for i, a in ax.items()}
            for i, a in ay.items():
                per[i] = TokenAmounts(y=a)
            if t > 0.0:
                per[j] = TokenAmounts(x=t, y=c * t)
            best = per
    return Allocation(best)


def nash_gap(profile: Mapping[str, Allocation],
             wallets: Mapping[str, ProviderWallet],
             schedule: RewardSchedule, p_c: float, config: PoolConfig,
             tol: float = DEFAULT_TOL,
             min_stake: float | None = None) -> float:
    """Largest relative reward improvement any provider can unilaterally
    realize; at most `tol` certifies an approximate equilibrium."""
    gap = 0.0
    for pid, alloc in profile.items():
        others = OpponentAggregate.from_allocations(
            a for q, a in profile.items() if q != pid)
        current = expected_reward(alloc, others, schedule, p_c, config)
        br = best_response(wallets[pid], others, schedule, p_c, config,
                           tol=tol, min_stake=min_stake)
        improved = expected_reward(br, others, schedule, p_c, config)
        gap = max(gap, max(0.0, improved - current) / max(current, 1e-12))
    return gap
