"""Full training and evaluation protocol.

    python demos/reproduce.py runs/full                 # 3 seeds x 140k steps
    python demos/reproduce.py runs/smoke --smoke        # 1 seed x 40k steps, timed

Each seed trains TD3-Overtake (four FTG competitors) and TD3-Race (empty
track), then runs the 2x3 overtaking grid, the slowed-competitor scenario and
time trials. Everything lands in <out>/results.json plus per-seed CSV/JSONL
files. Finished training runs are reused, so the script can be restarted.
"""
import argparse
import json
import logging
import time
from pathlib import Path

from overtake_rl import config as config_mod
from overtake_rl.harness import reproduce

ap = argparse.ArgumentParser()
ap.add_argument("out")
ap.add_argument("--smoke", action="store_true", help="one seed, 40k steps")
ap.add_argument("--seeds", type=int, nargs="+")
ap.add_argument("--config")
args = ap.parse_args()
logging.basicConfig(level=logging.INFO, format="%(asctime)s %(message)s")

cfg = config_mod.load(args.config) if args.config else config_mod.Config()
seeds = args.seeds or ([0] if args.smoke else [0, 1, 2])
steps = 40_000 if args.smoke else None

t0 = time.perf_counter()
summary = reproduce(args.out, seeds=seeds, cfg=cfg, steps=steps,
                    slowed=not args.smoke, timetrial=not args.smoke)
wall = time.perf_counter() - t0

# wall clock is only meaningful when nothing was reused from an earlier invocation
timing = {"wall_seconds": wall, "trained_everything": all(
    {"train_overtake", "train_race"} <= set(s["timing"]) for s in summary["seeds"])}
Path(args.out, "timing.json").write_text(json.dumps(timing, indent=2))
print(json.dumps(summary["median"], indent=2))
print("wall time %.1f min" % (wall / 60))
