"""Twin Delayed DDPG on top of the numpy Mlp."""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from ..errors import BufferTooSmall
from ..lidar import OBS_DIM
from .mlp import Adam, Mlp

ACT_DIM = 2


@dataclass(frozen=True)
class Td3Config:
    gamma: float = 0.95
    actor_lr: float = 1e-4
    critic_lr: float = 1e-3
    max_training_steps: int = 140_000
    exploration_steps: int = 1000
    batch_size: int = 256
    tau: float = 0.005
    policy_delay: int = 2
    target_noise_sigma: float = 0.2
    target_noise_clip: float = 0.5
    exploration_noise_sigma: float = 0.1
    hidden_sizes: tuple = (256, 256)
    buffer_capacity: int = 200_000
    # L2 pull on the actor's pre-tanh outputs; 0 gives textbook TD3
    actor_preact_penalty: float = 1e-3

    def __post_init__(self):
        object.__setattr__(self, "hidden_sizes", tuple(int(h) for h in self.hidden_sizes))
        if not 0.0 < self.gamma < 1.0:
            raise ValueError("gamma must lie in (0, 1)")
        if self.actor_lr <= 0 or self.critic_lr <= 0 or not 0.0 < self.tau <= 1.0:
            raise ValueError("learning rates and tau must be positive (tau <= 1)")
        if self.policy_delay < 1 or self.batch_size < 1:
            raise ValueError("policy_delay and batch_size must be >= 1")
        if self.actor_preact_penalty < 0:
            raise ValueError("actor_preact_penalty must be >= 0")

    def to_dict(self):
        d = asdict(self)
        d["hidden_sizes"] = list(self.hidden_sizes)
        return d


def critic_target(next_obs, reward, done, target_actor, target_q1, target_q2, gamma,
                  noise_sigma, noise_clip, rng):
    """Smoothed twin-minimum bootstrap target.

    Returns ``(y, smoothed_action)``; ``done`` rows cut the bootstrap.
    """
    a = target_actor.forward(next_obs)
    if noise_sigma > 0 and noise_clip > 0:
        noise = np.clip(rng.normal(0.0, noise_sigma, size=a.shape), -noise_clip, noise_clip)
        a = np.clip(a + noise, -1.0, 1.0)
    x = np.hstack([next_obs, a])
    q = np.minimum(target_q1.forward(x), target_q2.forward(x))[:, 0]
    y = np.asarray(reward, dtype=np.float64) + gamma * (1.0 - np.asarray(done, dtype=np.float64)) * q
    return y, a


class Td3Agent:
    def __init__(self, config=Td3Config(), seed=0, obs_dim=OBS_DIM):
        self.config = config
        self.obs_dim = obs_dim
        self.rng = np.random.default_rng(seed)
        hidden = list(config.hidden_sizes)
        self.actor = Mlp([obs_dim, *hidden, ACT_DIM], output="tanh", rng=self.rng)
        self.critic1 = Mlp([obs_dim + ACT_DIM, *hidden, 1], rng=self.rng)
        self.critic2 = Mlp([obs_dim + ACT_DIM, *hidden, 1], rng=self.rng)
        self.actor_target = self.actor.copy()
        self.critic1_target = self.critic1.copy()
        self.critic2_target = self.critic2.copy()
        self.actor_opt = Adam(self.actor.params, config.actor_lr)
        self.critic1_opt = Adam(self.critic1.params, config.critic_lr)
        self.critic2_opt = Adam(self.critic2.params, config.critic_lr)
        self.updates = 0

    def select_action(self, obs, mode="exploit", step=None):
        """Normalised action in [-1, 1]^2.

        ``explore`` draws uniformly during the warm-up steps, then adds Gaussian
        noise to the actor; ``exploit`` is the plain deterministic actor.
        """
        if mode == "explore":
            if step is not None and step < self.config.exploration_steps:
                return self.rng.uniform(-1.0, 1.0, size=ACT_DIM)
            a = self.actor.forward(obs)[0]
            a = a + self.rng.normal(0.0, self.config.exploration_noise_sigma, size=ACT_DIM)
            return np.clip(a, -1.0, 1.0)
        if mode != "exploit":
            raise ValueError(f"unknown mode {mode!r}")
        return self.actor.forward(obs)[0]

    def update(self, buffer):
        cfg = self.config
        if len(buffer) < cfg.batch_size:
            raise BufferTooSmall(f"buffer holds {len(buffer)} < batch size {cfg.batch_size}")
        obs, act, rew, next_obs, done = buffer.sample(cfg.batch_size, self.rng)
        y, _ = critic_target(next_obs, rew, done, self.actor_target, self.critic1_target,
                             self.critic2_target, cfg.gamma, cfg.target_noise_sigma,
                             cfg.target_noise_clip, self.rng)
        x = np.hstack([obs, act])
        n = len(y)
        report = {}
        for name, critic, opt in (("critic1_loss", self.critic1, self.critic1_opt),
                                  ("critic2_loss", self.critic2, self.critic2_opt)):
            q, cache = critic.forward(x, keep=True)
            err = q[:, 0] - y
            report[name] = float(np.mean(err * err))
            grads, _ = critic.backward(cache, (2.0 / n) * err[:, None])
            opt.step(grads)

        self.updates += 1
        report["actor_loss"] = None
        if self.updates % cfg.policy_delay == 0:
            report["actor_loss"] = self._actor_step(obs)
            self.actor_target.soft_update(self.actor, cfg.tau)
            self.critic1_target.soft_update(self.critic1, cfg.tau)
            self.critic2_target.soft_update(self.critic2, cfg.tau)
        return report

    def actor_loss_grads(self, obs):
        """Loss -mean Q1(s, pi(s)) + lam * mean(z^2) and its gradient w.r.t. the actor parameters.

        z is the actor output before tanh. Without the small penalty, Adam can
        push z deep into saturation, where the gradient vanishes for good.
        """
        a, a_cache = self.actor.forward(obs, keep=True)
        q, q_cache = self.critic1.forward(np.hstack([obs, a]), keep=True)
        n = len(q)
        _, g_in = self.critic1.backward(q_cache, np.full((n, 1), -1.0 / n), param_grads=False)
        lam = self.config.actor_preact_penalty
        loss = -float(q.mean())
        g_z = None
        if lam > 0:
            z = self.actor.preactivation(a_cache)
            loss += lam * float(np.mean(z * z))
            g_z = (2.0 * lam / z.size) * z
        grads, _ = self.actor.backward(a_cache, g_in[:, self.obs_dim:], grad_preact=g_z)
        return loss, grads

    def _actor_step(self, obs):
        loss, grads = self.actor_loss_grads(obs)
        self.actor_opt.step(grads)
        return loss

    # -- serialisation -------------------------------------------------------

    def networks(self):
        return {
            "actor": self.actor, "critic1": self.critic1, "critic2": self.critic2,
            "actor_target": self.actor_target, "critic1_target": self.critic1_target,
            "critic2_target": self.critic2_target,
        }

    def optimizers(self):
        return {"actor_opt": self.actor_opt, "critic1_opt": self.critic1_opt, "critic2_opt": self.critic2_opt}

    def state_arrays(self):
        """Ordered name -> array mapping of every learnable and optimiser tensor."""
        out = {}
        for name, net in self.networks().items():
            for k, p in enumerate(net.params):
                out[f"{name}.{k}"] = p
        for name, opt in self.optimizers().items():
            for k, (m, v) in enumerate(zip(opt.m, opt.v)):
                out[f"{name}.m.{k}"] = m
                out[f"{name}.v.{k}"] = v
        return out

    def state_meta(self):
        return {
            "updates": self.updates,
            "opt_t": {name: opt.t for name, opt in self.optimizers().items()},
            "rng": self.rng.bit_generator.state,
            "obs_dim": self.obs_dim,
        }

    def load_state(self, arrays, meta):
        for name, arr in self.state_arrays().items():
            if name not in arrays:
                raise KeyError(f"missing array {name}")
            if arrays[name].shape != arr.shape:
                raise ValueError(f"shape mismatch for {name}: {arrays[name].shape} vs {arr.shape}")
            arr[...] = arrays[name]
        self.updates = meta["updates"]
        for name, opt in self.optimizers().items():
            opt.t = meta["opt_t"][name]
        self.rng.bit_generator.state = meta["rng"]
