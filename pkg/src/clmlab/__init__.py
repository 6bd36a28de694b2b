"""clmlab: a desk-scale laboratory for concentrated-liquidity market
making and liquidity-mining incentive design."""

from .design import (DesignError, DesignSpec, bins_covering, bins_within,
                     breakout_cost, design_low_slippage,
                     design_price_stabilization, design_v2_equivalent, mix,
                     slippage_of_trade)
from .errors import (CouplingError, DirectionError, LabError, MetricError,
                     RangeError, ScenarioError, SideError, SizeError,
                     UnallocatableError)
from .mining import (RewardSchedule, RewardStatement, accrue_slot,
                     validate_schedule)
from .pool import (BinPosition, PoolConfig, PoolState, Side, SwapResult,
                   TokenAmounts, bin_of, coupling_ratio, deposit,
                   liquidity_for_tokens, position_tokens, swap_exact_in,
                   tick_index_of, tick_price, tokens_for_liquidity,
                   withdraw_all)
from .sim import (Policy, ProviderSpec, Realloc, SimReport, SimScenario,
                  SlotRecord, TradeEvent, run_scenario, stability_probe)
from .strategy import (Allocation, OpponentAggregate, ProviderWallet,
                       SupportSplit, best_response, brute_force_best_response,
                       expected_reward, nash_gap, proportional_allocation,
                       split_support)

__version__ = "0.1.0"
