"""Tick geometry, liquidity accounting and swap execution.

Prices are quoted as Y per X. The price axis is partitioned by ticks
p_i = p0 * d**i into half-open bins [p_i, p_{i+1}); a price exactly on a
tick belongs to the bin on its right. Liquidity lives in bins, and the
token amounts required to create liquidity are linear in it:

    bin right of the price:  dx = dL * (1/sqrt(p_i) - 1/sqrt(p_{i+1}))
    bin left of the price:   dy = dL * (sqrt(p_{i+1}) - sqrt(p_i))
    active bin:              dx = dL * (1/sqrt(p_c) - 1/sqrt(p_{i+1}))
                             dy = dL * (sqrt(p_c)   - sqrt(p_i))

Within a bin with liquidity L, moving the price p -> p' consumes/yields
dy = L * (sqrt(p') - sqrt(p)) and dx = L * (1/sqrt(p') - 1/sqrt(p)),
which is a shifted constant-product curve with virtual reserves.

The index window [i_min, i_max] is finite; out-of-window access raises
RangeError. A swap that exhausts the topmost bin may leave the price
resting exactly on tick i_max + 1 (a pinned state in which further
price-raising swaps are refused).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterator

from .errors import CouplingError, RangeError, SideError

REL_TOL = 1e-9


@dataclass(frozen=True)
class PoolConfig:
    """Tick geometry: reference price p0, step multiplier d, index window."""

    p0: float
    d: float
    i_min: int
    i_max: int

    def __post_init__(self):
        if self.p0 <= 0:
            raise ValueError("p0 must be positive")
        if self.d <= 1:
            raise ValueError("tick multiplier d must exceed 1")
        if self.i_min >= self.i_max:
            raise ValueError("i_min must be below i_max")

    def to_json(self) -> dict:
        return {"p0": self.p0, "d": self.d, "i_min": self.i_min, "i_max": self.i_max}

    @classmethod
    def from_json(cls, obj: dict) -> "PoolConfig":
        return cls(p0=float(obj["p0"]), d=float(obj["d"]),
                   i_min=int(obj["i_min"]), i_max=int(obj["i_max"]))


@dataclass(frozen=True)
class TokenAmounts:
    """A pair of nonnegative X and Y token amounts."""

    x: float = 0.0
    y: float = 0.0

    def __add__(self, other: "TokenAmounts") -> "TokenAmounts":
        return TokenAmounts(self.x + other.x, self.y + other.y)


@dataclass(frozen=True)
class BinPosition:
    provider_id: str
    bin: int
    liquidity: float


class Side(str, Enum):
    X_IN = "X_in"
    Y_IN = "Y_in"


def tick_price(i: int, config: PoolConfig) -> float:
    """Price of tick i: p0 * d**i. Valid for i in [i_min, i_max + 1]."""
    if not (config.i_min <= i <= config.i_max + 1):
        raise RangeError(f"tick index {i} outside window "
                         f"[{config.i_min}, {config.i_max + 1}]")
    return config.p0 * config.d ** i


def bin_of(p: float, config: PoolConfig) -> int:
    """Index j of the bin containing p, i.e. p_j <= p < p_{j+1}.

    The logarithm can misplace prices sitting on (or within rounding of)
    a tick, so the initial guess is corrected by direct comparison
    against the neighboring ticks.
    """
    lo = tick_price(config.i_min, config)
    hi = tick_price(config.i_max + 1, config)
    if not (lo <= p < hi):
        raise RangeError(f"price {p} outside window [{lo}, {hi})")
    j = math.floor(math.log(p / config.p0) / math.log(config.d))
    j = max(config.i_min, min(j, config.i_max))
    while j > config.i_min and p < config.p0 * config.d ** j:
        j -= 1
    while j < config.i_max and p >= config.p0 * config.d ** (j + 1):
        j += 1
    return j


def tick_index_of(p: float, config: PoolConfig) -> int | None:
    """Index i with tick_price(i) == p within 1e-12 relative, else None."""
    i = round(math.log(p / config.p0) / math.log(config.d))
    if config.i_min <= i <= config.i_max + 1 and \
            math.isclose(config.p0 * config.d ** i, p, rel_tol=1e-12):
        return i
    return None


def coupling_ratio(i: int, p_c: float, config: PoolConfig) -> float:
    """Required y/x deposit ratio for the active bin i at price p_c."""
    sp = math.sqrt(p_c)
    sa = math.sqrt(tick_price(i, config))
    sb = math.sqrt(config.p0 * config.d ** (i + 1))
    return (sp - sa) / (1.0 / sp - 1.0 / sb)


def tokens_for_liquidity(i: int, delta_l: float, p_c: float,
                         config: PoolConfig) -> TokenAmounts:
    """Token amounts (dx, dy) required to add delta_l liquidity to bin i."""
    if delta_l < 0:
        raise ValueError("delta_l must be nonnegative")
    if not (config.i_min <= i <= config.i_max):
        raise RangeError(f"bin {i} outside window [{config.i_min}, {config.i_max}]")
    j = bin_of(p_c, config)
    sa = math.sqrt(tick_price(i, config))
    sb = math.sqrt(config.p0 * config.d ** (i + 1))
    if j < i:
        return TokenAmounts(x=delta_l * (1.0 / sa - 1.0 / sb), y=0.0)
    if j > i:
        return TokenAmounts(x=0.0, y=delta_l * (sb - sa))
    sp = math.sqrt(p_c)
    return TokenAmounts(x=delta_l * (1.0 / sp - 1.0 / sb),
                        y=delta_l * (sp - sa))


def liquidity_for_tokens(i: int, amounts: TokenAmounts, p_c: float,
                         config: PoolConfig) -> float:
    """Liquidity created by depositing `amounts` into bin i at price p_c.

    The inverse of tokens_for_liquidity. For a one-sided bin the amount
    of the irrelevant token must be zero; for the active bin the two
    amounts must satisfy the coupling ratio within 1e-9 relative.
    """
    if amounts.x < 0 or amounts.y < 0:
        raise ValueError("token amounts must be nonnegative")
    if not (config.i_min <= i <= config.i_max):
        raise RangeError(f"bin {i} outside window [{config.i_min}, {config.i_max}]")
    j = bin_of(p_c, config)
    sa = math.sqrt(tick_price(i, config))
    sb = math.sqrt(config.p0 * config.d ** (i + 1))
    if j < i:
        if amounts.y != 0.0:
            raise SideError(f"bin {i} is right of the price and takes no Y")
        return amounts.x / (1.0 / sa - 1.0 / sb)
    if j > i:
        if amounts.x != 0.0:
            raise SideError(f"bin {i} is left of the price and takes no X")
        return amounts.y / (sb - sa)
    sp = math.sqrt(p_c)
    wx = 1.0 / sp - 1.0 / sb
    wy = sp - sa
    if wy == 0.0:  # price exactly on the bin's lower tick: X only
        if amounts.y != 0.0:
            raise SideError(f"bin {i} starts at the current price and takes no Y")
        return amounts.x / wx
    if amounts.x == 0.0 and amounts.y == 0.0:
        return 0.0
    if amounts.x == 0.0 or amounts.y == 0.0:
        raise CouplingError("active bin deposit requires both tokens")
    lx = amounts.x / wx
    ly = amounts.y / wy
    if abs(lx - ly) > REL_TOL * max(lx, ly):
        raise CouplingError(
            f"active-bin amounts violate coupling ratio y/x = {wy / wx}")
    return 0.5 * (lx + ly)


@dataclass
class PoolState:
    """Current price plus per-bin, per-provider liquidity."""

    config: PoolConfig
    current_price: float
    positions: Dict[int, Dict[str, float]] = field(default_factory=dict)

    def __post_init__(self):
        lo = tick_price(self.config.i_min, self.config)
        hi = tick_price(self.config.i_max + 1, self.config)
        if not (lo <= self.current_price <= hi):
            raise RangeError(f"price {self.current_price} outside [{lo}, {hi}]")

    def bin_liquidity(self, i: int) -> float:
        return sum(self.positions.get(i, {}).values())

    def provider_liquidity(self, provider_id: str, i: int) -> float:
        return self.positions.get(i, {}).get(provider_id, 0.0)

    def liquidity_profile(self) -> Dict[int, float]:
        return {i: self.bin_liquidity(i) for i in sorted(self.positions)}

    def iter_positions(self) -> Iterator[BinPosition]:
        for i in sorted(self.positions):
            for pid, liq in sorted(self.positions[i].items()):
                yield BinPosition(pid, i, liq)

    def copy(self) -> "PoolState":
        return PoolState(self.config, self.current_price,
                         {i: dict(by) for i, by in self.positions.items()})


@dataclass(frozen=True)
class SwapResult:
    amount_out: float
    amount_in_requested: float
    amount_in_consumed: float
    state: PoolState

    @property
    def price_after(self) -> float:
        return self.state.current_price

    @property
    def unconsumed_in(self) -> float:
        return self.amount_in_requested - self.amount_in_consumed


def deposit(state: PoolState, provider_id: str, i: int,
            delta_l: float) -> tuple[PoolState, TokenAmounts]:
    """Add delta_l liquidity for provider_id in bin i; returns the debit."""
    if delta_l <= 0:
        raise ValueError("deposit requires delta_l > 0")
    debit = tokens_for_liquidity(i, delta_l, state.current_price, state.config)
    new = state.copy()
    by = new.positions.setdefault(i, {})
    by[provider_id] = by.get(provider_id, 0.0) + delta_l
    return new, debit


def withdraw_all(state: PoolState, provider_id: str) \
        -> tuple[PoolState, Dict[int, TokenAmounts]]:
    """Remove every position of provider_id, crediting tokens at the
    current price (Eq.-of-provision run in reverse)."""
    new = state.copy()
    credits: Dict[int, TokenAmounts] = {}
    for i in list(new.positions):
        liq = new.positions[i].pop(provider_id, 0.0)
        if liq > 0.0:
            credits[i] = tokens_for_liquidity(i, liq, state.current_price,
                                              state.config)
        if not new.positions[i]:
            del new.positions[i]
    return new, credits


def position_tokens(state: PoolState, provider_id: str) -> Dict[int, TokenAmounts]:
    """Token value of provider_id's positions at the current price."""
    out: Dict[int, TokenAmounts] = {}
    for i, by in state.positions.items():
        liq = by.get(provider_id, 0.0)
        if liq > 0.0:
            out[i] = tokens_for_liquidity(i, liq, state.current_price, state.config)
    return out


def swap_exact_in(state: PoolState, side: Side, amount_in: float) -> SwapResult:
    """Execute a fee-less exact-input swap, walking bins as reserves deplete.

    Y_in raises the price, X_in lowers it. Zero-liquidity bins are
    crossed without consuming input when liquidity exists beyond them;
    otherwise the swap terminates partially filled with the unconsumed
    input reported via amount_in_consumed.
    """
    if amount_in <= 0:
        raise ValueError("amount_in must be positive")
    cfg = state.config
    p = state.current_price
    remaining = float(amount_in)
    out = 0.0
    liquid = sorted(i for i in state.positions if state.bin_liquidity(i) > 0.0)
    top = tick_price(cfg.i_max + 1, cfg)

    if side == Side.Y_IN:
        i = cfg.i_max + 1 if p >= top else bin_of(p, cfg)
        while remaining > 0.0 and i <= cfg.i_max:
            liq = state.bin_liquidity(i)
            if liq <= 0.0:
                nxt = next((b for b in liquid if b > i), None)
                if nxt is None:
                    break
                i = nxt
                p = tick_price(i, cfg)
                continue
            sp = math.sqrt(p)
            sb = math.sqrt(cfg.p0 * cfg.d ** (i + 1))
            need = liq * (sb - sp)
            if remaining >= need:
                out += liq * (1.0 / sp - 1.0 / sb)
                remaining -= need
                i += 1
                p = cfg.p0 * cfg.d ** i
            else:
                sn = sp + remaining / liq
                out += liq * (1.0 / sp - 1.0 / sn)
                p = sn * sn
                remaining = 0.0
    else:
        i = cfg.i_max if p >= top else bin_of(p, cfg)
        while remaining > 0.0 and i >= cfg.i_min:
            liq = state.bin_liquidity(i)
            if liq <= 0.0:
                nxt = next((b for b in reversed(liquid) if b < i), None)
                if nxt is None:
                    break
                i = nxt
                p = tick_price(i + 1, cfg)
                continue
            sp = math.sqrt(p)
            sa = math.sqrt(tick_price(i, cfg))
            need = liq * (1.0 / sa - 1.0 / sp)
            if remaining >= need:
                out += liq * (sp - sa)
                remaining -= need
                p = tick_price(i, cfg)
                i -= 1
            else:
                sn = 1.0 / (1.0 / sp + remaining / liq)
                out += liq * (sp - sn)
                p = sn * sn
                remaining = 0.0

    new_state = state.copy()
    new_state.current_price = p
    return SwapResult(amount_out=out,
                      amount_in_requested=amount_in,
                      amount_in_consumed=amount_in - remaining,
                      state=new_state)
