"""Train a small TD3 agent for a few thousand steps, then look at its reward
curve and try it in the overtaking evaluation.

This is far too short to learn to overtake; it shows the moving parts.
"""
import sys

from overtake_rl import harness
from overtake_rl.config import Config
from overtake_rl.td3 import load_actor

out = sys.argv[1] if len(sys.argv) > 1 else "runs/demo_short"
steps = int(sys.argv[2]) if len(sys.argv) > 2 else 3000

cfg = Config().with_overrides(td3={"hidden_sizes": [64, 64]}, train={"checkpoint_every": 1000})
run = harness.RunConfig("train_race", seed=0, out_dir=out, steps=steps)
final = harness.train(run, cfg)
print("checkpoint:", final)

header, eps = harness.read_metrics(f"{out}/metrics.jsonl")
print(len(eps), "episodes; header", header)
for e in eps[-5:]:
    print("  step %6d  reward %8.2f  %4d steps  %s" % (e["global_step"], e["reward"], e["steps"], e["termination"]))

stats = harness.curve_statistics(f"{out}/metrics.jsonl", steps, trend_until=steps, window=10)
print("Theil-Sen slope %.4g per step, first %.2f, final %.2f" % (
    stats["theil_sen_slope"], stats["first_mean"], stats["final_mean"]))

actor = load_actor(final)
res = harness.eval_overtake(actor, "ftg", cfg, episodes=20, seed=1, ego_algo="short-run")
print(res.matchup, "success %.2f collision %.2f" % (res.success_rate, res.collision_rate))

tt = harness.eval_timetrial(actor, cfg, attempts=2, laps=1, seed=1)
print("time trial: %d/%d clean laps" % (tt["successes"], tt["attempts"]))
