from .agent import ACT_DIM, Td3Agent, Td3Config, critic_target
from .checkpoint import load_actor, load_agent, load_checkpoint, save_agent, save_checkpoint
from .mlp import Adam, Mlp
from .replay import ReplayBuffer

__all__ = [
    "ACT_DIM", "Adam", "Mlp", "ReplayBuffer", "Td3Agent", "Td3Config", "critic_target",
    "load_actor", "load_agent", "load_checkpoint", "save_agent", "save_checkpoint",
]
