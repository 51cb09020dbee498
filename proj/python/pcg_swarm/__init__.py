"""Multi-agent turtle level generation: environment, scripted baselines and trainer."""

from ._core import (
    AIR,
    BORDER,
    DOOR,
    ENEMY,
    KEY,
    PLAYER,
    WALL,
    ConfigError,
    Env,
    action_count,
    approx_diameter,
    bench,
    compute_metrics,
    connected_regions,
    default_loss,
    episode_budget,
    evaluate,
    train,
)

__all__ = [
    "AIR",
    "BORDER",
    "DOOR",
    "ENEMY",
    "KEY",
    "PLAYER",
    "WALL",
    "ConfigError",
    "Env",
    "action_count",
    "approx_diameter",
    "bench",
    "compute_metrics",
    "connected_regions",
    "default_loss",
    "episode_budget",
    "evaluate",
    "train",
]
