"""Per-step reward: track progress scaled down by logistic obstacle and steering
penalties, minus a fixed collision penalty."""
from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class RewardConfig:
    w_obstacle: float = 0.7
    w_steer: float = 0.3
    collision_penalty: float = 25.0
    steer_k: float = 15.0
    steer_x0: float = 0.3
    obstacle_k: float = 35.0
    obstacle_x0: float = 0.5

    def __post_init__(self):
        if self.w_obstacle < 0 or self.w_steer < 0 or self.w_obstacle + self.w_steer > 1:
            raise ValueError("penalty weights must be non-negative and sum to at most 1")
        if self.steer_k <= 0 or self.obstacle_k <= 0:
            raise ValueError("sigmoid slopes must be positive")


@dataclass(frozen=True)
class RewardBreakdown:
    r_progress: float
    p_obstacle: float
    p_steer: float
    collision: bool
    total: float

    def to_dict(self):
        return {"r_progress": self.r_progress, "p_obstacle": self.p_obstacle,
                "p_steer": self.p_steer, "collision": self.collision, "total": self.total}


def _logistic(z):
    """1 / (1 + exp(-z)) without overflow for large |z|."""
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


def steering_penalty(delta_steer, config=RewardConfig()):
    """Rises through 0.5 as the per-step steering change passes steer_x0."""
    return _logistic(config.steer_k * (abs(delta_steer) - config.steer_x0))


def obstacle_penalty(min_distance, config=RewardConfig()):
    """1 - logistic(k (d - x0)), written as logistic(-k (d - x0)) to keep precision far from walls."""
    if not min_distance > 0:
        raise ValueError("min_distance must be positive")
    return _logistic(-config.obstacle_k * (min_distance - config.obstacle_x0))


def step_reward(progress, p_obstacle, p_steer, collided, config=RewardConfig()):
    r_p = max(progress, 0.0)
    total = r_p * (1.0 - config.w_obstacle * p_obstacle - config.w_steer * p_steer)
    if collided:
        total -= config.collision_penalty
    return RewardBreakdown(r_p, p_obstacle, p_steer, bool(collided), total)
