import numpy as np
import pytest
from scipy import stats

from overtake_rl.errors import BufferTooSmall, CorruptCheckpoint, IncompatibleCheckpoint
from overtake_rl.td3 import (Adam, Mlp, ReplayBuffer, Td3Agent, Td3Config, critic_target, load_actor,
                             load_agent, load_checkpoint, save_agent, save_checkpoint)

SMALL = Td3Config(hidden_sizes=(16, 16), batch_size=8, buffer_capacity=100)


class Const:
    """Stand-in network returning a constant column."""

    def __init__(self, value):
        self.value = value

    def forward(self, x):
        return np.full((len(np.atleast_2d(x)), 1), self.value)


class FixedActor:
    def __init__(self, a):
        self.a = np.asarray(a, dtype=np.float64)

    def forward(self, x):
        return np.tile(self.a, (len(np.atleast_2d(x)), 1))


def rel_err(a, b):
    return np.abs(a - b) / np.maximum(np.abs(a) + np.abs(b), 1e-7)


# -- gradients ---------------------------------------------------------------

def fd_check(seed):
    rng = np.random.default_rng(seed)
    sizes = [int(rng.integers(2, 6)), int(rng.integers(3, 8)), int(rng.integers(3, 8)), int(rng.integers(1, 3))]
    net = Mlp(sizes, output=["identity", "tanh"][seed % 2], rng=rng)
    x = rng.normal(size=(4, sizes[0]))
    w = rng.normal(size=(4, sizes[-1]))

    def loss():
        return float(np.sum(w * net.forward(x)))

    _, cache = net.forward(x, keep=True)
    grads, gx = net.backward(cache, w)
    h = 1e-6
    worst = 0.0
    for p, g in zip(net.params, grads):
        for i in np.ndindex(p.shape):
            old = p[i]
            p[i] = old + h
            up = loss()
            p[i] = old - h
            dn = loss()
            p[i] = old
            worst = max(worst, rel_err((up - dn) / (2 * h), g[i]))
    for i in np.ndindex(x.shape):
        old = x[i]
        x[i] = old + h
        up = loss()
        x[i] = old - h
        dn = loss()
        x[i] = old
        worst = max(worst, rel_err((up - dn) / (2 * h), gx[i]))
    return worst


def test_backprop_matches_finite_differences():
    worst = max(fd_check(s) for s in range(24))
    assert worst < 1e-5


@pytest.mark.parametrize("lam", [0.0, 1e-3, 0.5])
def test_actor_gradient_matches_finite_differences(lam):
    agent = Td3Agent(Td3Config(hidden_sizes=(16, 16), actor_preact_penalty=lam), seed=3)
    obs = np.random.default_rng(0).uniform(0, 1, (5, 12))

    def loss():
        a, cache = agent.actor.forward(obs, keep=True)
        z = agent.actor.preactivation(cache)
        np.testing.assert_allclose(np.tanh(z), a, atol=1e-15)
        return -float(agent.critic1.forward(np.hstack([obs, a])).mean()) + lam * float(np.mean(z * z))

    l0, grads = agent.actor_loss_grads(obs)
    assert l0 == pytest.approx(loss(), abs=1e-14)
    h = 1e-6
    worst = 0.0
    for p, g in zip(agent.actor.params, grads):
        for i in list(np.ndindex(p.shape))[::7]:
            old = p[i]
            p[i] = old + h
            up = loss()
            p[i] = old - h
            dn = loss()
            p[i] = old
            worst = max(worst, rel_err((up - dn) / (2 * h), g[i]))
    assert worst < 1e-5


def test_preact_penalty_keeps_outputs_off_the_rails():
    # a critic that always prefers larger actions drives an unpenalised tanh
    # actor into saturation; the penalty holds it at a finite pre-activation
    class Greedy:
        def forward(self, x, keep=False):
            q = x[:, -2:].sum(axis=1, keepdims=True)
            return (q, None) if keep else q

        def backward(self, cache, g, param_grads=True):
            return None, np.hstack([np.zeros((len(g), 12)), np.repeat(g, 2, axis=1)])

    obs = np.random.default_rng(0).uniform(0, 1, (64, 12))
    z_max = {}
    for lam in (0.0, 0.05):
        agent = Td3Agent(Td3Config(hidden_sizes=(16,), actor_lr=1e-2, actor_preact_penalty=lam), seed=0)
        agent.critic1 = Greedy()
        for _ in range(3000):
            agent._actor_step(obs)
        _, cache = agent.actor.forward(obs, keep=True)
        z_max[lam] = np.abs(agent.actor.preactivation(cache)).max()
    assert z_max[0.0] > 8.0  # tanh slope below 5e-7: effectively dead
    assert z_max[0.05] < 4.0


def test_adam_first_step_moves_by_lr():
    p = [np.array([1.0, -2.0, 0.5])]
    opt = Adam(p, lr=0.01)
    opt.step([np.array([3.0, -0.2, 0.0])])
    # bias-corrected first step is lr * sign(g) (zero stays put)
    np.testing.assert_allclose(p[0], [0.99, -1.99, 0.5], atol=1e-9)


# -- critic target -----------------------------------------------------------

def test_critic_target_example():
    y, _ = critic_target(np.zeros((1, 12)), [1.0], [0.0], FixedActor([0, 0]), Const(2.0), Const(1.5),
                         0.95, 0.0, 0.0, np.random.default_rng(0))
    assert y[0] == pytest.approx(2.425, abs=1e-15)


def test_critic_target_terminal():
    y, _ = critic_target(np.zeros((2, 12)), [0.7, -25.0], [1.0, 1.0], FixedActor([0, 0]), Const(9.0),
                         Const(9.0), 0.95, 0.2, 0.5, np.random.default_rng(0))
    assert list(y) == [0.7, -25.0]


def test_noise_clip_zero_means_no_smoothing():
    _, a = critic_target(np.zeros((50, 12)), np.zeros(50), np.zeros(50), FixedActor([0.3, -0.2]),
                         Const(0.0), Const(0.0), 0.95, 0.2, 0.0, np.random.default_rng(0))
    assert np.all(a == [0.3, -0.2])


def test_smoothing_noise_is_bounded():
    _, a = critic_target(np.zeros((5000, 12)), np.zeros(5000), np.zeros(5000), FixedActor([0.9, 0.0]),
                         Const(0.0), Const(0.0), 0.95, 0.2, 0.5, np.random.default_rng(1))
    assert np.all(np.abs(a[:, 1]) <= 0.5) and np.all(a[:, 0] >= 0.4) and np.all(a[:, 0] <= 1.0)


def test_twin_minimum_is_used():
    rng = np.random.default_rng(0)
    q1, q2 = Mlp([14, 8, 1], rng=rng), Mlp([14, 8, 1], rng=rng)
    obs = rng.uniform(0, 1, (64, 12))
    actor = FixedActor([0.1, 0.1])
    y, a = critic_target(obs, np.zeros(64), np.zeros(64), actor, q1, q2, 0.9, 0.0, 0.0, rng)
    x = np.hstack([obs, a])
    np.testing.assert_array_equal(y, 0.9 * np.minimum(q1.forward(x), q2.forward(x))[:, 0])


# -- updates -----------------------------------------------------------------

def filled_buffer(n=64, seed=0):
    rng = np.random.default_rng(seed)
    buf = ReplayBuffer(100)
    for _ in range(n):
        buf.add(rng.uniform(0, 1, 12), rng.uniform(-1, 1, 2), rng.normal(), rng.uniform(0, 1, 12), rng.random() < 0.1)
    return buf


def test_soft_update_formula():
    rng = np.random.default_rng(0)
    a, b = Mlp([3, 4, 1], rng=rng), Mlp([3, 4, 1], rng=rng)
    before = [p.copy() for p in a.params]
    a.soft_update(b, 0.005)
    for p, p0, q in zip(a.params, before, b.params):
        np.testing.assert_allclose(p, 0.005 * q + 0.995 * p0, atol=1e-15)
    a.soft_update(b, 1.0)
    for p, q in zip(a.params, b.params):
        np.testing.assert_array_equal(p, q)


def test_policy_delay():
    agent = Td3Agent(SMALL, seed=0)
    buf = filled_buffer()
    actor0 = [p.copy() for p in agent.actor.params]
    critic0 = [p.copy() for p in agent.critic1.params]
    r = agent.update(buf)
    assert r["actor_loss"] is None
    assert all(np.array_equal(p, q) for p, q in zip(agent.actor.params, actor0))
    assert not all(np.array_equal(p, q) for p, q in zip(agent.critic1.params, critic0))
    assert all(np.array_equal(p, q) for p, q in zip(agent.actor_target.params, actor0))
    r = agent.update(buf)
    assert r["actor_loss"] is not None
    assert not all(np.array_equal(p, q) for p, q in zip(agent.actor.params, actor0))


def test_tau_one_copies_online_nets():
    agent = Td3Agent(Td3Config(hidden_sizes=(8,), batch_size=8, tau=1.0, policy_delay=1), seed=0)
    agent.update(filled_buffer())
    for name in ("actor", "critic1", "critic2"):
        for p, q in zip(getattr(agent, name).params, getattr(agent, name + "_target").params):
            np.testing.assert_array_equal(p, q)


def test_buffer_too_small():
    agent = Td3Agent(SMALL, seed=0)
    with pytest.raises(BufferTooSmall):
        agent.update(filled_buffer(5))


def test_critic_learns_fixed_targets():
    # terminal transitions: the critic must regress onto the rewards
    cfg = Td3Config(hidden_sizes=(32, 32), batch_size=32, policy_delay=1000)
    agent = Td3Agent(cfg, seed=0)
    rng = np.random.default_rng(0)
    buf = ReplayBuffer(200)
    for _ in range(200):
        o, a = rng.uniform(0, 1, 12), rng.uniform(-1, 1, 2)
        buf.add(o, a, o[0] + a[1], o, True)
    for _ in range(1500):
        r = agent.update(buf)
    assert r["critic1_loss"] < 0.01


# -- action selection --------------------------------------------------------

def test_exploration_phase_is_uniform():
    agent = Td3Agent(SMALL, seed=0)
    acts = np.array([agent.select_action(np.zeros(12), "explore", step=k % 1000) for k in range(4000)])
    assert np.all(np.abs(acts) <= 1)
    assert np.abs(acts.mean(axis=0)).max() < 0.05
    for j in range(2):
        assert stats.kstest(acts[:, j], stats.uniform(-1, 2).cdf).pvalue > 1e-3


def test_exploit_is_deterministic_and_noise_free():
    agent = Td3Agent(SMALL, seed=0)
    obs = np.full(12, 0.3)
    a = agent.select_action(obs, "exploit")
    assert np.array_equal(a, agent.select_action(obs, "exploit"))
    assert np.array_equal(a, agent.actor.forward(obs)[0])


def test_noisy_actions_saturate_at_bounds():
    agent = Td3Agent(Td3Config(hidden_sizes=(4,), exploration_noise_sigma=5.0), seed=0)
    acts = np.array([agent.select_action(np.zeros(12), "explore", step=10_000) for _ in range(500)])
    assert np.all(np.abs(acts) <= 1.0)
    assert np.mean(np.abs(acts) == 1.0) > 0.5


def test_noise_is_centred_on_actor():
    agent = Td3Agent(Td3Config(hidden_sizes=(4,)), seed=0)
    obs = np.zeros(12)
    mu = agent.actor.forward(obs)[0]
    acts = np.array([agent.select_action(obs, "explore", step=5000) for _ in range(5000)])
    assert np.abs(acts.mean(axis=0) - mu).max() < 0.01
    assert acts.std(axis=0) == pytest.approx([0.1, 0.1], rel=0.05)


# -- replay ------------------------------------------------------------------

def test_replay_fifo_overwrite():
    buf = ReplayBuffer(3, obs_dim=1, act_dim=1)
    for k in range(5):
        buf.add([k], [0], float(k), [k], False)
    assert len(buf) == 3
    assert sorted(buf.rew) == [2.0, 3.0, 4.0]


def test_replay_sampling_uniform():
    buf = ReplayBuffer(10, obs_dim=1, act_dim=1)
    for k in range(10):
        buf.add([k], [0], float(k), [k], False)
    idx = buf.sample_indices(20_000, np.random.default_rng(0))
    counts = np.bincount(idx, minlength=10)
    assert stats.chisquare(counts).pvalue > 1e-3


def test_replay_partial_fill_only_samples_written_rows():
    buf = ReplayBuffer(100, obs_dim=1, act_dim=1)
    for k in range(4):
        buf.add([k], [0], 1.0, [k], False)
    _, _, r, _, _ = buf.sample(1000, np.random.default_rng(0))
    assert np.all(r == 1.0)


# -- checkpoints -------------------------------------------------------------

def test_checkpoint_roundtrip(tmp_path):
    agent = Td3Agent(SMALL, seed=4)
    buf = filled_buffer()
    for _ in range(3):
        agent.update(buf)
    path = tmp_path / "a.bin"
    save_agent(path, agent, step=77, extra_arrays={"x": np.arange(3.0)}, extra_meta={"k": 1}, config={"c": 2})
    back, arrays, meta, step, config = load_agent(path)
    assert step == 77 and config["c"] == 2 and meta["k"] == 1
    np.testing.assert_array_equal(arrays["x"], np.arange(3.0))
    for name, arr in agent.state_arrays().items():
        assert np.array_equal(arr, back.state_arrays()[name]), name
    # both continue identically, including their random streams
    ra, rb = agent.update(buf), back.update(buf)
    assert ra == rb


def test_load_actor_output_matches(tmp_path):
    agent = Td3Agent(SMALL, seed=1)
    save_agent(tmp_path / "a.bin", agent)
    actor = load_actor(tmp_path / "a.bin")
    obs = np.random.default_rng(0).uniform(0, 1, (10, 12))
    np.testing.assert_array_equal(actor.forward(obs), agent.actor.forward(obs))


def test_incompatible_obs_dim(tmp_path):
    save_agent(tmp_path / "a.bin", Td3Agent(SMALL, seed=1, obs_dim=8))
    with pytest.raises(IncompatibleCheckpoint):
        load_actor(tmp_path / "a.bin")


@pytest.mark.parametrize("damage", ["flip", "truncate", "magic", "empty"])
def test_damaged_checkpoints(tmp_path, damage):
    path = tmp_path / "c.bin"
    save_checkpoint(path, {"w": np.ones((4, 4))}, {"a": 1}, step=3)
    blob = bytearray(path.read_bytes())
    if damage == "flip":
        blob[-5] ^= 0xFF
    elif damage == "truncate":
        blob = blob[: len(blob) // 2]
    elif damage == "magic":
        blob[:4] = b"JUNK"
    else:
        blob = bytearray()
    path.write_bytes(bytes(blob))
    with pytest.raises(CorruptCheckpoint):
        load_checkpoint(path)


def test_missing_checkpoint(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_checkpoint(tmp_path / "nope.bin")
