"""Figure rendering for schedules and simulation reports.

All figures are written to files (Agg backend); nothing is shown
interactively.
"""

from __future__ import annotations

from typing import List

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .mining import RewardSchedule  # noqa: E402
from .pool import PoolConfig, tick_price  # noqa: E402
from .sim import SimReport  # noqa: E402


def render_schedule(schedule: RewardSchedule, config: PoolConfig,
                    path: str) -> str:
    """Bar chart of per-bin rewards, labeled with each bin's price range."""
    bins = schedule.support()
    rewards = [schedule.per_bin[i] for i in bins]
    labels = [f"{i}\n[{tick_price(i, config):.4g},"
              f" {config.p0 * config.d ** (i + 1):.4g})" for i in bins]
    fig, ax = plt.subplots(figsize=(max(4.0, 0.9 * len(bins)), 3.2))
    ax.bar(range(len(bins)), rewards, color="#3a76af")
    ax.set_xticks(range(len(bins)))
    ax.set_xticklabels(labels, fontsize=7)
    ax.set_xlabel("bin (price range)")
    ax.set_ylabel("reward per slot")
    ax.set_title(f"reward distribution (R = {schedule.slot_reward:g})")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_report(report: SimReport, prefix: str) -> List[str]:
    """Price path, cumulative rewards, and final liquidity profile."""
    paths = []

    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.plot(range(len(report.price_path)), report.price_path, marker=".",
            color="#3a76af")
    ax.set_xlabel("slot")
    ax.set_ylabel("price (Y per X)")
    ax.set_title("price path")
    fig.tight_layout()
    p = f"{prefix}_price.png"
    fig.savefig(p, dpi=150)
    plt.close(fig)
    paths.append(p)

    fig, ax = plt.subplots(figsize=(5, 3.2))
    for pid in report.provider_ids:
        series = []
        total = 0.0
        for r in report.records:
            total += r.rewards.get(pid, 0.0)
            series.append(total)
        ax.plot(range(1, len(series) + 1), series, marker=".", label=pid)
    ax.set_xlabel("slot")
    ax.set_ylabel("cumulative reward")
    ax.set_title("provider rewards")
    ax.legend(fontsize=8)
    fig.tight_layout()
    p = f"{prefix}_rewards.png"
    fig.savefig(p, dpi=150)
    plt.close(fig)
    paths.append(p)

    if report.records:
        liq = report.records[-1].liquidity
        bins = sorted(liq)
        fig, ax = plt.subplots(figsize=(5, 3.2))
        ax.bar([str(i) for i in bins], [liq[i] for i in bins], color="#579c62")
        ax.set_xlabel("bin")
        ax.set_ylabel("liquidity")
        ax.set_title("final liquidity profile")
        fig.tight_layout()
        p = f"{prefix}_liquidity.png"
        fig.savefig(p, dpi=150)
        plt.close(fig)
        paths.append(p)

    return paths
