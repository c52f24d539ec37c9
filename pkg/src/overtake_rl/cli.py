"""Command line entry point: ``overtake-rl <subcommand> ...``.

Exit codes: 0 success, 2 bad usage or configuration, 3 missing or unreadable
file, 4 corrupt or incompatible checkpoint, 5 simulation error, 1 anything else.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import config as config_mod
from . import harness
from .env import FtgDriver, RaceEnv, eval_overtake_episode_config, timetrial_episode_config
from .errors import ConfigError, CorruptCheckpoint, IncompatibleCheckpoint, OvertakeError
from .td3 import load_actor
from .tracks import eval_track, training_tracks, write_track_cache
from .vehicle import Action

EXIT_USAGE, EXIT_IO, EXIT_CHECKPOINT, EXIT_SIM, EXIT_OTHER = 2, 3, 4, 5, 1


def _common(p, seed=True):
    p.add_argument("--config", help="INI config file (see print-config)")
    p.add_argument("--out", default="runs", help="output directory or file")
    if seed:
        p.add_argument("--seed", type=int, default=0)


def build_parser():
    ap = argparse.ArgumentParser(prog="overtake-rl", description="2D racing simulator and TD3 overtaking trainer")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-tracks", help="write the generated training and eval track geometry as JSON")
    _common(p, seed=False)

    p = sub.add_parser("train", help="train a TD3 agent")
    _common(p)
    p.add_argument("--mode", choices=["overtake", "race"], default="overtake",
                   help="overtake: four FTG competitors; race: track to yourself")
    p.add_argument("--steps", type=int)
    p.add_argument("--resume", help="checkpoint written by an earlier run of the same config and seed")

    p = sub.add_parser("eval-overtake", help="overtake attempts against one competitor")
    _common(p)
    p.add_argument("--ego-ckpt", required=True)
    p.add_argument("--opponent", choices=["ftg", "policy"], default="ftg")
    p.add_argument("--opp-ckpt")
    p.add_argument("--episodes", type=int)
    p.add_argument("--ego-name", default=harness.OVERTAKE)
    p.add_argument("--opp-name")
    p.add_argument("--scenario", choices=["standard", "slowed"], default="standard",
                   help="slowed: one lap to pass a 0.75 m/s FTG car starting 2-3 m ahead")

    p = sub.add_parser("eval-timetrial", help="three-lap single-car runs")
    _common(p)
    p.add_argument("--ego-ckpt", help="policy checkpoint; FTG drives when omitted")
    p.add_argument("--episodes", type=int, help="number of attempts")

    p = sub.add_parser("print-config", help="print the effective configuration")
    p.add_argument("--config")

    p = sub.add_parser("replay-trace", help="re-run one seeded episode and write its per-step trace")
    _common(p)
    p.add_argument("--ego-ckpt", help="policy checkpoint; FTG drives when omitted")
    p.add_argument("--opponent", choices=["ftg", "policy", "none"], default="ftg")
    p.add_argument("--opp-ckpt")
    p.add_argument("--episodes", type=int, default=0, help="episode index within the seed")
    p.add_argument("--check", help="existing trace to compare against; exits 5 on any difference")
    return ap


def _load_cfg(args):
    return config_mod.load(args.config) if args.config else config_mod.Config()


def cmd_gen_tracks(args):
    tracks = training_tracks() + [eval_track()]
    paths = write_track_cache(tracks, args.out)
    print(f"wrote {len(paths)} tracks to {args.out}")


def cmd_train(args):
    mode = f"train_{args.mode}"
    run = harness.RunConfig(mode, seed=args.seed, config_path=args.config, out_dir=args.out, steps=args.steps)
    path = harness.train(run, resume=args.resume)
    print(path)


def cmd_eval_overtake(args):
    cfg = _load_cfg(args)
    if args.opponent == "policy" and not args.opp_ckpt:
        raise ConfigError("--opponent policy needs --opp-ckpt")
    run = harness.RunConfig("eval_overtake", seed=args.seed, config_path=args.config, out_dir=args.out,
                            ego_ckpt=args.ego_ckpt, opp_ckpt=args.opp_ckpt, episodes=args.episodes,
                            opponent=args.opponent)
    ego = load_actor(run.ego_ckpt)
    if args.scenario == "slowed":
        res = harness.eval_slowed_competitor(ego, cfg, run.episodes, run.seed, args.ego_name)
    else:
        opp = load_actor(run.opp_ckpt) if run.opponent == "policy" else "ftg"
        opp_name = args.opp_name or (harness.FTG if opp == "ftg" else Path(run.opp_ckpt).stem)
        res = harness.eval_overtake(ego, opp, cfg, run.episodes, run.seed, args.ego_name, opp_name)
    header = harness.run_header(run.seed, cfg, ego_ckpt=run.ego_ckpt, opp_ckpt=run.opp_ckpt)
    summary, _ = harness.emit_report([res], run.out_dir, header, prefix=res.scenario)
    print(f"{res.matchup}: success {res.success_rate:.3f} collision {res.collision_rate:.3f} "
          f"over {res.attempts} episodes -> {summary}")


def cmd_eval_timetrial(args):
    cfg = _load_cfg(args)
    run = harness.RunConfig("eval_timetrial", seed=args.seed, config_path=args.config, out_dir=args.out,
                            ego_ckpt=args.ego_ckpt, episodes=args.episodes)
    policy = load_actor(run.ego_ckpt) if run.ego_ckpt else "ftg"
    report = harness.eval_timetrial(policy, cfg, run.episodes, run.seed)
    report["header"] = harness.run_header(run.seed, cfg, ego_ckpt=run.ego_ckpt)
    out = Path(run.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "timetrial.json").write_text(json.dumps(report, indent=2))
    mean = report["mean_total_time"]
    print(f"{report['successes']}/{report['attempts']} clean attempts"
          + (f", mean 3-lap time {mean:.2f} s" if mean is not None else ""))


def cmd_print_config(args):
    sys.stdout.write(config_mod.dumps(_load_cfg(args)))


def cmd_replay_trace(args):
    cfg = _load_cfg(args)
    ego = load_actor(args.ego_ckpt) if args.ego_ckpt else None
    if args.opponent == "none":
        ep_cfg, drivers = timetrial_episode_config(lap_limit=1, seed=args.seed), None
    else:
        ep_cfg = eval_overtake_episode_config(seed=args.seed)
        if args.opponent == "policy":
            if not args.opp_ckpt:
                raise ConfigError("--opponent policy needs --opp-ckpt")
            drivers = [harness.PolicyDriver(load_actor(args.opp_ckpt))]
        else:
            drivers = [FtgDriver(cfg.ftg)]
    env = RaceEnv(eval_track(), ep_cfg, cfg.vehicle, cfg.lidar, cfg.reward, competitor_drivers=drivers,
                  record_trace=True)
    obs = env.reset(seed=[args.seed, args.episodes])
    ftg = FtgDriver(cfg.ftg)
    done = False
    while not done:
        act = Action.from_normalized(ego.forward(obs)[0]) if ego is not None else ftg.act(env.last_scan, env.ego.state)
        obs, _, done, info = env.step(act)
    out = Path(args.out)
    if out.suffix != ".jsonl":
        out.mkdir(parents=True, exist_ok=True)
        out = out / "trace.jsonl"
    header = harness.run_header(args.seed, cfg, episode=args.episodes, ego_ckpt=args.ego_ckpt)
    env.write_trace(out, header)
    print(f"{info['termination']} after {info['step']} steps -> {out}")
    if args.check:
        if Path(args.check).read_text().splitlines()[1:] != out.read_text().splitlines()[1:]:
            raise OvertakeError(f"replay differs from {args.check}")
        print("trace matches")


COMMANDS = {
    "gen-tracks": cmd_gen_tracks, "train": cmd_train, "eval-overtake": cmd_eval_overtake,
    "eval-timetrial": cmd_eval_timetrial, "print-config": cmd_print_config, "replay-trace": cmd_replay_trace,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(levelname)s %(message)s")
    try:
        COMMANDS[args.command](args)
    except (CorruptCheckpoint, IncompatibleCheckpoint) as exc:
        print(f"error [checkpoint]: {exc}", file=sys.stderr)
        return EXIT_CHECKPOINT
    except ConfigError as exc:
        print(f"error [config]: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OvertakeError as exc:
        print(f"error [simulation]: {exc}", file=sys.stderr)
        return EXIT_SIM
    except OSError as exc:
        print(f"error [io]: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error [config]: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except KeyboardInterrupt:
        print("interrupted", file=sys.stderr)
        return 130
    except Exception as exc:  # noqa: BLE001 - last-resort categorisation
        print(f"error [internal]: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_OTHER
    return 0


if __name__ == "__main__":
    sys.exit(main())
