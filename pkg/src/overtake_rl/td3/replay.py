"""Fixed-capacity FIFO replay memory with uniform sampling."""
from __future__ import annotations

import numpy as np


class ReplayBuffer:
    def __init__(self, capacity, obs_dim=12, act_dim=2):
        self.capacity = int(capacity)
        self.obs = np.zeros((self.capacity, obs_dim))
        self.act = np.zeros((self.capacity, act_dim))
        self.rew = np.zeros(self.capacity)
        self.next_obs = np.zeros((self.capacity, obs_dim))
        self.done = np.zeros(self.capacity)
        self.cursor = 0
        self.size = 0

    def __len__(self):
        return self.size

    def add(self, obs, action, reward, next_obs, done):
        i = self.cursor
        self.obs[i] = obs
        self.act[i] = action
        self.rew[i] = reward
        self.next_obs[i] = next_obs
        self.done[i] = float(done)
        self.cursor = (i + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def sample_indices(self, batch_size, rng):
        return rng.integers(0, self.size, size=batch_size)

    def sample(self, batch_size, rng):
        idx = self.sample_indices(batch_size, rng)
        return self.obs[idx], self.act[idx], self.rew[idx], self.next_obs[idx], self.done[idx]

    def arrays(self):
        """Stored rows in insertion order is not needed for sampling; raw storage is returned."""
        return {"obs": self.obs, "act": self.act, "rew": self.rew, "next_obs": self.next_obs, "done": self.done}
