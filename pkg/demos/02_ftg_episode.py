"""One overtaking attempt on the evaluation track with Follow-the-Gap driving
both cars, written out as a per-step trace."""
import collections
import json
import sys

from overtake_rl.env import FtgDriver, RaceEnv, eval_overtake_episode_config
from overtake_rl.ftg import FtgConfig
from overtake_rl.tracks import eval_track

out = sys.argv[1] if len(sys.argv) > 1 else "ftg_trace.jsonl"

env = RaceEnv(eval_track(), eval_overtake_episode_config(), record_trace=True)
ego = FtgDriver(FtgConfig(max_speed=2.0))  # the competitor gets the default 1.5 m/s FTG

obs = env.reset(seed=7)
print("ego at waypoint", env.ego_waypoint, "competitor", env.offsets, "waypoints ahead")
total, done = 0.0, False
while not done:
    obs, r, done, info = env.step(ego.act(env.last_scan, env.ego.state))
    total += r.total

print("ended by", info["termination"], "after", info["step"], "steps")
print("ego progress %.2f m, competitor %.2f m, reward %.2f" % (env.ego.progress, env.competitors[0].progress, total))
env.write_trace(out, {"seed": 7})

# how often the steering penalty bit
p_s = [rec["reward"]["p_steer"] for rec in env.trace]
print("steps with P_S > 0.5:", sum(p > 0.5 for p in p_s))

# replaying the same seed gives the same trace
env2 = RaceEnv(eval_track(), eval_overtake_episode_config(), record_trace=True)
env2.reset(seed=7)
done = False
while not done:
    _, _, done, _ = env2.step(ego.act(env2.last_scan, env2.ego.state))
print("replay identical:", json.dumps(env.trace) == json.dumps(env2.trace))

outcomes = collections.Counter()
for k in range(10):
    env.reset(seed=[7, k])
    done = False
    while not done:
        _, _, done, info = env.step(ego.act(env.last_scan, env.ego.state))
    outcomes[info["termination"]] += 1
print("10 FTG-vs-FTG attempts:", dict(outcomes))
