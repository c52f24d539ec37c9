"""Training runs, evaluation protocols and report files.

Every file written here starts with (or carries) the run seed, the config hash
and the code version so results can be traced back to what produced them.
"""
from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
import time
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from . import config as config_mod
from .config import Config, code_version
from .env import (EpisodeConfig, FtgDriver, RaceEnv, Termination, eval_overtake_episode_config,
                  slowed_competitor_episode_config, timetrial_episode_config)
from .errors import ConfigError, IncompatibleCheckpoint
from .lidar import OBS_DIM, average_filter, build_observation
from .td3 import ReplayBuffer, Td3Agent, load_actor, load_agent, load_checkpoint, save_agent
from .td3.mlp import Mlp
from .tracks import eval_track, training_tracks
from .vehicle import Action

log = logging.getLogger(__name__)

TRAIN_MODES = ("train_overtake", "train_race")
MODES = TRAIN_MODES + ("eval_overtake", "eval_timetrial", "gen_tracks")
OVERTAKE, RACE, FTG = "TD3-Overtake", "TD3-Race", "FTG"
EGO_ALGOS = (OVERTAKE, RACE)
COMPETITOR_ALGOS = (FTG, RACE, OVERTAKE)
NO_OVERTAKE = "NoOvertake"


@dataclass
class RunConfig:
    mode: str
    seed: int = 0
    config_path: str | None = None
    out_dir: str = "runs"
    ego_ckpt: str | None = None
    opp_ckpt: str | None = None
    steps: int | None = None
    episodes: int | None = None
    opponent: str = "ftg"

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"unknown mode {self.mode!r}; expected one of {', '.join(MODES)}")
        if self.opponent not in ("ftg", "policy"):
            raise ConfigError(f"opponent must be 'ftg' or 'policy', not {self.opponent!r}")
        for name in ("config_path", "ego_ckpt", "opp_ckpt"):
            p = getattr(self, name)
            if p is not None and not Path(p).is_file():
                raise FileNotFoundError(f"{name}: {p} does not exist")
        if self.steps is not None and self.steps < 1:
            raise ConfigError("steps must be >= 1")
        if self.episodes is not None and self.episodes < 1:
            raise ConfigError("episodes must be >= 1")

    def load_config(self):
        return config_mod.load(self.config_path) if self.config_path else Config()


def run_header(seed, cfg, **extra):
    return {"seed": seed, "config_hash": cfg.hash(), "version": code_version(), **extra}


def params_hash(net):
    h = hashlib.sha256()
    for p in net.params:
        h.update(np.ascontiguousarray(p, dtype="<f8").tobytes())
    return h.hexdigest()


def _seeds(seed):
    """Independent integer seeds for the agent, the environment and the track draw."""
    return [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(seed).spawn(3)]


class PolicyDriver:
    """Frozen actor network driving a car from its own LiDAR scan."""

    def __init__(self, actor):
        self.actor = actor

    def act(self, scan, state):
        obs = build_observation(state.speed, state.steering_angle, average_filter(scan), scan.max_range)
        return Action.from_normalized(self.actor.forward(obs)[0])


# -- training ----------------------------------------------------------------

class _MetricsWriter:
    """JSONL episode log: a header line, then one record per finished episode."""

    def __init__(self, path, header, keep_episodes=None):
        self.path = Path(path)
        lines = []
        if keep_episodes is not None and self.path.exists():
            lines = self.path.read_text().splitlines()[: keep_episodes + 1]
        self.fh = open(self.path, "w")
        if lines:
            self.fh.write("\n".join(lines) + "\n")
        else:
            self.fh.write(json.dumps({"header": header}) + "\n")
        self.fh.flush()

    def write(self, rec):
        self.fh.write(json.dumps(rec) + "\n")
        self.fh.flush()

    def close(self):
        self.fh.close()


def read_metrics(path):
    """(header, episode records) from a metrics JSONL file."""
    header, records = None, []
    with open(path) as fh:
        for line in fh:
            rec = json.loads(line)
            if "header" in rec:
                header = rec["header"]
            else:
                records.append(rec)
    return header, records


def smooth(values, window):
    """Trailing moving average; early points average what is available."""
    v = np.asarray(values, dtype=np.float64)
    c = np.concatenate([[0.0], np.cumsum(v)])
    idx = np.arange(1, len(v) + 1)
    lo = np.maximum(idx - window, 0)
    return (c[idx] - c[lo]) / (idx - lo)


def write_reward_curve(metrics_path, out_path, window):
    header, recs = read_metrics(metrics_path)
    sm = smooth([r["reward"] for r in recs], window)
    with open(out_path, "w", newline="") as fh:
        for k, v in header.items():
            fh.write(f"# {k}={v}\n")
        w = csv.writer(fh)
        w.writerow(["episode", "global_step", "reward", "smoothed_reward"])
        for r, s in zip(recs, sm):
            w.writerow([r["episode"], r["global_step"], repr(r["reward"]), repr(float(s))])
    return out_path


def _train_env(mode, cfg, env_seed, first_track):
    ep = cfg.episode
    if mode == "train_race":
        ep = replace(ep, n_competitors=0)
    ep = replace(ep, seed=env_seed)
    drivers = [FtgDriver(replace(cfg.ftg, max_speed=min(cfg.ftg.max_speed, ep.competitor_max_speed)))]
    return RaceEnv(first_track, ep, cfg.vehicle, cfg.lidar, cfg.reward, competitor_drivers=drivers)


def train(run, cfg=None, resume=None, stop_after=None, tracks=None):
    """Train one TD3 agent; returns the path of the last checkpoint written.

    ``resume`` continues bit-for-bit from a checkpoint written by this function.
    ``stop_after`` ends this invocation early at that global step, leaving a
    checkpoint to resume from (used to exercise interruption).
    """
    if run.mode not in TRAIN_MODES:
        raise ConfigError(f"train() needs a training mode, got {run.mode!r}")
    cfg = cfg or run.load_config()
    total = run.steps or cfg.td3.max_training_steps
    out = Path(run.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    header = run_header(run.seed, cfg, mode=run.mode, total_steps=total)
    tracks = tracks or training_tracks()
    by_id = {t.id: t for t in tracks}

    agent_seed, env_seed, track_seed = _seeds(run.seed)
    agent = Td3Agent(cfg.td3, seed=agent_seed)
    buffer = ReplayBuffer(cfg.td3.buffer_capacity, OBS_DIM, 2)
    track_rng = np.random.default_rng(track_seed)
    env = _train_env(run.mode, cfg, env_seed, tracks[0])
    st = {"step": 0, "episode": 0, "ep_reward": 0.0, "ep_steps": 0, "critic_loss": 0.0,
          "actor_loss": 0.0, "n_critic": 0, "n_actor": 0}
    obs = None

    if resume is not None:
        agent, arrays, meta, step, ck_cfg = load_agent(resume)
        if meta.get("header", {}).get("config_hash") != cfg.hash():
            raise IncompatibleCheckpoint(f"{resume}: written with a different configuration")
        if meta["header"]["mode"] != run.mode or meta["header"]["seed"] != run.seed:
            raise IncompatibleCheckpoint(f"{resume}: mode/seed differ from this run")
        n = meta["buffer"]["size"]
        for name, arr in buffer.arrays().items():
            arr[:n] = arrays[f"buffer.{name}"]
        buffer.size, buffer.cursor = n, meta["buffer"]["cursor"]
        track_rng.bit_generator.state = meta["track_rng"]
        env.set_state(meta["env"], by_id[meta["env"]["track"]])
        st = dict(meta["counters"])
        obs = arrays["current_obs"].copy() if "current_obs" in arrays else None

    metrics_path = out / "metrics.jsonl"
    metrics = _MetricsWriter(metrics_path, header, keep_episodes=st["episode"] if resume else None)

    def checkpoint(name):
        extra = {f"buffer.{k}": v[: buffer.size] for k, v in buffer.arrays().items()}
        if obs is not None:
            extra["current_obs"] = obs
        meta = {"header": header, "buffer": {"size": buffer.size, "cursor": buffer.cursor},
                "track_rng": track_rng.bit_generator.state, "env": env.get_state(), "counters": st}
        path = save_agent(out / name, agent, st["step"], extra, meta, {"run": cfg.to_dict()})
        write_reward_curve(metrics_path, out / "reward_curve.csv", cfg.train.smoothing_window)
        return path

    t0 = time.perf_counter()
    last = None
    try:
        while st["step"] < total:
            if stop_after is not None and st["step"] >= stop_after:
                return checkpoint("interrupted.bin")
            if env.done:
                track = tracks[int(track_rng.integers(len(tracks)))]
                obs = env.reset(track=track)
                st.update(ep_reward=0.0, ep_steps=0, critic_loss=0.0, actor_loss=0.0, n_critic=0, n_actor=0)
            a = agent.select_action(obs, "explore", st["step"])
            next_obs, br, done, info = env.step(Action.from_normalized(a))
            terminal = done and info["termination"] in (Termination.COLLISION.value, Termination.STALL.value)
            buffer.add(obs, a, br.total, next_obs, terminal)
            obs = next_obs
            st["step"] += 1
            st["ep_steps"] += 1
            st["ep_reward"] += br.total
            if st["step"] >= cfg.td3.exploration_steps and len(buffer) >= cfg.td3.batch_size:
                rep = agent.update(buffer)
                st["critic_loss"] += 0.5 * (rep["critic1_loss"] + rep["critic2_loss"])
                st["n_critic"] += 1
                if rep["actor_loss"] is not None:
                    st["actor_loss"] += rep["actor_loss"]
                    st["n_actor"] += 1
            if done:
                st["episode"] += 1
                metrics.write({
                    "episode": st["episode"], "global_step": st["step"], "track": env.track.id,
                    "steps": st["ep_steps"], "reward": st["ep_reward"], "termination": info["termination"],
                    "progress": info["ego_progress"], "overtaken": info["overtaken_count"],
                    "critic_loss": st["critic_loss"] / st["n_critic"] if st["n_critic"] else None,
                    "actor_loss": st["actor_loss"] / st["n_actor"] if st["n_actor"] else None,
                })
                if st["episode"] % 50 == 0:
                    log.info("%s seed %d: step %d episode %d reward %.2f (%.1f steps/s)", run.mode, run.seed,
                             st["step"], st["episode"], st["ep_reward"],
                             st["step"] / max(time.perf_counter() - t0, 1e-9))
            if st["step"] % cfg.train.checkpoint_every == 0 and st["step"] < total:
                last = checkpoint(f"ckpt_{st['step']:07d}.bin")
        last = checkpoint("final.bin")
    except KeyboardInterrupt:
        checkpoint("interrupted.bin")
        raise
    finally:
        metrics.close()
    return last


# -- evaluation --------------------------------------------------------------

@dataclass
class MatchupResult:
    ego_algo: str
    competitor_algo: str
    attempts: int = 0
    successes: int = 0
    collisions: int = 0
    no_overtakes: int = 0
    mean_time_to_overtake: float = math.nan
    mean_steps: float = math.nan
    episodes: list = field(default_factory=list)
    scenario: str = "eval_overtake"

    @property
    def matchup(self):
        return f"{self.ego_algo} vs {self.competitor_algo}"

    @property
    def success_rate(self):
        return self.successes / self.attempts if self.attempts else math.nan

    @property
    def collision_rate(self):
        return self.collisions / self.attempts if self.attempts else math.nan


def tally(ego_algo, competitor_algo, episodes, scenario="eval_overtake"):
    """MatchupResult as a pure function of the per-episode records."""
    res = MatchupResult(ego_algo, competitor_algo, episodes=list(episodes), scenario=scenario)
    res.attempts = len(episodes)
    res.successes = sum(e["outcome"] == Termination.OVERTAKE_SUCCESS.value for e in episodes)
    res.collisions = sum(e["outcome"] == Termination.COLLISION.value for e in episodes)
    res.no_overtakes = sum(e["outcome"] == NO_OVERTAKE for e in episodes)
    if episodes:
        res.mean_steps = float(np.mean([e["steps"] for e in episodes]))
    times = [e["time_to_overtake"] for e in episodes if e["time_to_overtake"] is not None]
    if times:
        res.mean_time_to_overtake = float(np.mean(times))
    return res


def _competitor(spec, cfg, cap):
    if isinstance(spec, str):
        if spec.lower() != "ftg":
            raise ConfigError(f"unknown competitor {spec!r}")
        return FtgDriver(replace(cfg.ftg, max_speed=min(cfg.ftg.max_speed, cap)))
    # private copy so ego and competitor never share mutable parameters
    return PolicyDriver(spec.copy())


def eval_overtake(ego, competitor, cfg=None, episodes=None, seed=0, ego_algo=OVERTAKE,
                  competitor_algo=FTG, episode_config=None, track=None, scenario="eval_overtake"):
    """Pass attempts against one competitor spawned ahead of the ego car.

    ``ego`` is an actor network; ``competitor`` is ``"ftg"`` or another actor.
    Outcomes: OvertakeSuccess, Collision, or NoOvertake for anything else.
    """
    cfg = cfg or Config()
    episodes = episodes or cfg.eval.episodes
    if ego.layer_sizes[0] != OBS_DIM:
        raise IncompatibleCheckpoint(f"ego policy expects {ego.layer_sizes[0]} inputs, not {OBS_DIM}")
    if isinstance(competitor, Mlp) and competitor.layer_sizes[0] != OBS_DIM:
        raise IncompatibleCheckpoint(f"competitor policy expects {competitor.layer_sizes[0]} inputs")
    ep_cfg = episode_config or eval_overtake_episode_config()
    ep_cfg = replace(ep_cfg, seed=seed)
    driver = _competitor(competitor, cfg, ep_cfg.competitor_max_speed)
    env = RaceEnv(track or eval_track(), ep_cfg, cfg.vehicle, cfg.lidar, cfg.reward, competitor_drivers=[driver])
    before = params_hash(ego)
    records = []
    for k in range(episodes):
        obs = env.reset(seed=[seed, k])
        done = False
        while not done:
            obs, _, done, info = env.step(Action.from_normalized(ego.forward(obs)[0]))
        term = info["termination"]
        outcome = term if term in (Termination.OVERTAKE_SUCCESS.value, Termination.COLLISION.value) else NO_OVERTAKE
        records.append({
            "scenario": scenario, "matchup": f"{ego_algo} vs {competitor_algo}", "ego_algo": ego_algo,
            "competitor_algo": competitor_algo, "episode": k, "seed": seed, "outcome": outcome,
            "termination": term, "steps": info["step"],
            "time_to_overtake": info["step"] * ep_cfg.dt if outcome == Termination.OVERTAKE_SUCCESS.value else None,
            "ego_progress": info["ego_progress"], "start_waypoint": env.ego_waypoint,
        })
    if params_hash(ego) != before:
        raise RuntimeError("evaluation modified the ego policy parameters")
    return tally(ego_algo, competitor_algo, records, scenario)


def eval_slowed_competitor(ego, cfg=None, episodes=None, seed=0, ego_algo=OVERTAKE):
    """One lap to pass an FTG car held to 0.75 m/s that starts 2-3 m ahead."""
    cfg = cfg or Config()
    return eval_overtake(ego, "ftg", cfg, episodes or cfg.eval.slowed_episodes, seed, ego_algo, "FTG-0.75",
                         episode_config=slowed_competitor_episode_config(), scenario="slowed_competitor")


def eval_grid(actors, cfg=None, episodes=None, seed=0):
    """Every ego in ``EGO_ALGOS`` against every competitor in ``COMPETITOR_ALGOS``.

    ``actors`` maps algorithm name to actor network; the same evaluation seed is
    used for every matchup so they face identical spawn points.
    """
    results = []
    for ego in EGO_ALGOS:
        for comp in COMPETITOR_ALGOS:
            opp = "ftg" if comp == FTG else actors[comp]
            results.append(eval_overtake(actors[ego], opp, cfg, episodes, seed, ego, comp))
    return results


def aggregate(results, ego_algo):
    rows = [r for r in results if r.ego_algo == ego_algo]
    n = sum(r.attempts for r in rows)
    return {"attempts": n, "success_rate": sum(r.successes for r in rows) / n,
            "collision_rate": sum(r.collisions for r in rows) / n}


def eval_timetrial(policy, cfg=None, attempts=None, seed=0, laps=3, track=None):
    """Single-car three-lap runs. Any collision (or stall) fails the attempt but
    the laps finished before it are still reported."""
    cfg = cfg or Config()
    attempts = attempts or cfg.eval.timetrial_attempts
    ep_cfg = timetrial_episode_config(lap_limit=laps, seed=seed)
    env = RaceEnv(track or eval_track(), ep_cfg, cfg.vehicle, cfg.lidar, cfg.reward)
    ftg = FtgDriver(cfg.ftg) if isinstance(policy, str) else None
    before = None if ftg else params_hash(policy)
    runs = []
    for k in range(attempts):
        obs = env.reset(seed=[seed, k])
        done = False
        while not done:
            if ftg:
                act = ftg.act(env.last_scan, env.ego.state)
            else:
                act = Action.from_normalized(policy.forward(obs)[0])
            obs, _, done, info = env.step(act)
        ok = info["termination"] == Termination.LAP_COMPLETE.value and len(info["lap_times"]) == laps
        runs.append({"attempt": k, "success": ok, "termination": info["termination"],
                     "lap_times": info["lap_times"], "total_time": sum(info["lap_times"]) if ok else None})
    if ftg is None and params_hash(policy) != before:
        raise RuntimeError("evaluation modified the policy parameters")
    totals = [r["total_time"] for r in runs if r["success"]]
    laps_ok = [t for r in runs if r["success"] for t in r["lap_times"]]
    return {
        "attempts": attempts, "successes": len(totals), "failures": attempts - len(totals),
        "mean_total_time": float(np.mean(totals)) if totals else None,
        "std_total_time": float(np.std(totals)) if totals else None,
        "mean_lap_time": float(np.mean(laps_ok)) if laps_ok else None,
        "std_lap_time": float(np.std(laps_ok)) if laps_ok else None,
        "runs": runs,
    }


# -- reports -----------------------------------------------------------------

SUMMARY_COLUMNS = ["scenario", "matchup", "ego_algo", "competitor_algo", "attempts", "successes", "collisions",
                   "no_overtakes", "success_rate", "collision_rate", "mean_steps", "mean_time_to_overtake",
                   "seed", "config_hash", "version"]


def emit_report(results, out_dir, header, prefix="eval"):
    """Write ``<prefix>_summary.csv`` and ``<prefix>_episodes.jsonl``; returns both paths.

    Raises ValueError (before touching the disk) when there is nothing to report.
    """
    if not results or any(r.attempts == 0 or not r.episodes for r in results):
        raise ValueError("cannot report an empty set of episodes")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    summary, episodes = out / f"{prefix}_summary.csv", out / f"{prefix}_episodes.jsonl"

    def fmt(x):
        return "" if isinstance(x, float) and math.isnan(x) else repr(x)

    with open(summary, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SUMMARY_COLUMNS)
        for r in results:
            w.writerow([r.scenario, r.matchup, r.ego_algo, r.competitor_algo, r.attempts, r.successes,
                        r.collisions, r.no_overtakes, fmt(r.success_rate), fmt(r.collision_rate),
                        fmt(r.mean_steps), fmt(r.mean_time_to_overtake), header.get("seed"),
                        header.get("config_hash"), header.get("version")])
    with open(episodes, "w") as fh:
        fh.write(json.dumps({"header": header}) + "\n")
        for r in results:
            for e in r.episodes:
                fh.write(json.dumps(e) + "\n")
    return summary, episodes


def read_episode_log(path):
    """Rebuild MatchupResults from a per-episode log alone."""
    _, recs = read_metrics(path)
    groups = {}
    for e in recs:
        groups.setdefault((e["scenario"], e["ego_algo"], e["competitor_algo"]), []).append(e)
    return [tally(ego, comp, eps, scen) for (scen, ego, comp), eps in groups.items()]


# -- training-curve statistics -----------------------------------------------

def curve_statistics(metrics_path, total_steps, trend_until=100_000, window=None):
    """Trend and improvement figures for a training run's smoothed reward curve.

    ``improvement`` compares the mean smoothed reward of episodes ending in the
    final 20% of steps with those ending in the first 20%: (final - first) / |first|.
    A value >= 1 means the final level at least doubled the early one (or, for a
    negative start, climbed by at least its magnitude).
    """
    from scipy.stats import theilslopes

    header, recs = read_metrics(metrics_path)
    window = window or Config().train.smoothing_window
    steps = np.array([r["global_step"] for r in recs], dtype=np.float64)
    sm = smooth([r["reward"] for r in recs], window)
    sel = steps <= trend_until
    slope = float(theilslopes(sm[sel], steps[sel])[0]) if sel.sum() >= 2 else math.nan
    first = float(sm[steps <= 0.2 * total_steps].mean())
    final = float(sm[steps > 0.8 * total_steps].mean())
    return {"theil_sen_slope": slope, "first_mean": first, "final_mean": final,
            "improvement": (final - first) / abs(first) if first else math.inf, "episodes": len(recs)}


# -- full protocol -----------------------------------------------------------

def _finished(path, cfg, total):
    """True when ``path`` is a final checkpoint of ``total`` steps under ``cfg``."""
    try:
        _, meta, step, _ = load_checkpoint(path)
    except (OSError, ValueError):
        return False
    return step == total and meta.get("header", {}).get("config_hash") == cfg.hash()


def reproduce(out_dir, seeds=(0, 1, 2), cfg=None, steps=None, episodes=None, eval_seed=12345,
              slowed=True, timetrial=True):
    """Train TD3-Overtake and TD3-Race per seed, then run the evaluation grid.

    Finished training runs (final checkpoint with a matching config hash) are
    reused, so an interrupted reproduction can simply be restarted.
    Returns the summary dict that is also written to ``results.json``.
    """
    cfg = cfg or Config()
    out = Path(out_dir)
    total = steps or cfg.td3.max_training_steps
    per_seed = []
    for seed in seeds:
        sdir = out / f"seed_{seed}"
        actors = {}
        timing = {}
        for algo, mode in ((OVERTAKE, "train_overtake"), (RACE, "train_race")):
            rdir = sdir / mode
            final = rdir / "final.bin"
            if not _finished(final, cfg, total):
                t0 = time.perf_counter()
                train(RunConfig(mode, seed=seed, out_dir=str(rdir), steps=total), cfg)
                timing[mode] = time.perf_counter() - t0
            actors[algo] = load_actor(final)
        t0 = time.perf_counter()
        results = eval_grid(actors, cfg, episodes, eval_seed)
        timing["eval"] = time.perf_counter() - t0
        header = run_header(seed, cfg, eval_seed=eval_seed, steps=total)
        emit_report(results, sdir, header)
        entry = {"seed": seed, "timing": timing,
                 "aggregate": {ego: aggregate(results, ego) for ego in EGO_ALGOS},
                 "matchups": [{"matchup": r.matchup, "success_rate": r.success_rate,
                               "collision_rate": r.collision_rate, "attempts": r.attempts} for r in results],
                 "curve": {mode: curve_statistics(sdir / mode / "metrics.jsonl", total,
                                                  min(100_000, total), cfg.train.smoothing_window)
                           for mode in TRAIN_MODES}}
        if slowed:
            sl = [eval_slowed_competitor(actors[a], cfg, episodes, eval_seed, a) for a in EGO_ALGOS]
            emit_report(sl, sdir, header, prefix="slowed")
            entry["slowed"] = {r.ego_algo: {"success_rate": r.success_rate, "collision_rate": r.collision_rate}
                               for r in sl}
        if timetrial:
            entry["timetrial"] = {a: _strip_runs(eval_timetrial(actors[a], cfg, seed=eval_seed))
                                  for a in EGO_ALGOS}
            entry["timetrial"][FTG] = _strip_runs(eval_timetrial("ftg", cfg, seed=eval_seed))
        per_seed.append(entry)
        log.info("seed %d: %s", seed, json.dumps(entry["aggregate"]))

    def med(key, ego):
        return float(np.median([e["aggregate"][ego][key] for e in per_seed]))

    summary = {
        "header": run_header(list(seeds), cfg, steps=total, eval_seed=eval_seed,
                             episodes=episodes or cfg.eval.episodes),
        "seeds": per_seed,
        "median": {ego: {"success_rate": med("success_rate", ego), "collision_rate": med("collision_rate", ego)}
                   for ego in EGO_ALGOS},
    }
    out.mkdir(parents=True, exist_ok=True)
    (out / "results.json").write_text(json.dumps(summary, indent=2))
    return summary


def _strip_runs(report):
    return {k: v for k, v in report.items() if k != "runs"} | {
        "lap_times": [r["lap_times"] for r in report["runs"]]}

