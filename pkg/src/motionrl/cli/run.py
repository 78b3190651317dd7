"""Train/test runner driving the worker group from the command line."""

from __future__ import annotations

import csv
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from ..envs.base import DoneFlag, EnvConfigError
from ..envs.factory import build_env, load_env_config
from ..kinematics import frame_from_pose
from ..learning.agents import CHECKPOINT_VERSION, CheckpointError, TrainingDivergedError, build_agent
from ..learning.checkpoint import load_checkpoint, save_checkpoint
from ..learning.config import load_agent_config
from ..learning.distributed import WorkerGroup
from ..metrics import evaluate_policy
from ..motion import MotionClip, save_motion
from .args import ArgsError, parse_args


def _warn(message: str) -> None:
    print(f"warning: {message}", file=sys.stderr)


def _csv_sibling(log_file: str) -> Path:
    """CSV path next to the text log; flips extension if the log is .csv."""
    path = Path(log_file)
    suffix = ".txt" if path.suffix == ".csv" else ".csv"
    return path.with_suffix(suffix) if path.suffix else path.with_name(path.name + suffix)


class TrainLogger:
    """Writes one row per iteration to a text table and a CSV sibling."""

    def __init__(self, log_file: str, resume: bool = False):
        self.text_path = Path(log_file)
        self.csv_path = _csv_sibling(log_file)
        self.text_path.parent.mkdir(parents=True, exist_ok=True)
        self.columns: list[str] | None = None
        append = resume and self.text_path.exists() and self.csv_path.exists()
        mode = "a" if append else "w"
        if append:
            with open(self.csv_path, newline="") as f:
                header = next(csv.reader(f), None)
            self.columns = list(header) if header else None
        self._text = open(self.text_path, mode)
        self._csv_file = open(self.csv_path, mode, newline="")
        self._csv = csv.writer(self._csv_file)

    def _width(self, name: str) -> int:
        return max(14, len(name) + 2)

    def log(self, row: dict) -> None:
        if self.columns is None:
            self.columns = list(row)
            header = "".join(f"{c:>{self._width(c)}}" for c in self.columns)
            self._text.write(header + "\n")
            self._csv.writerow(self.columns)
        if list(row) != self.columns:
            raise ValueError(
                f"log columns changed mid-run: {list(row)} vs {self.columns}"
            )
        text_cells = []
        csv_cells = []
        for c in self.columns:
            v = row[c]
            w = self._width(c)
            if isinstance(v, (int, np.integer)):
                text_cells.append(f"{int(v):>{w}d}")
                csv_cells.append(int(v))
            else:
                text_cells.append(f"{float(v):>{w}.6g}")
                csv_cells.append(repr(float(v)))
        self._text.write("".join(text_cells) + "\n")
        self._csv.writerow(csv_cells)
        self._text.flush()
        self._csv_file.flush()

    def close(self) -> None:
        self._text.close()
        self._csv_file.close()


def _apply_compat_flags(args) -> None:
    """Downgrade unsupported device/logger choices with a warning."""
    if args.device != "cpu":
        _warn(f"device {args.device!r} is not available in this build; using cpu")
        args.device = "cpu"
    if args.logger != "csv":
        _warn(f"logger {args.logger!r} is not implemented; logging CSV instead")
        args.logger = "csv"
    cores = os.cpu_count() or 1
    if args.num_workers > cores:
        _warn(
            f"num_workers={args.num_workers} exceeds {cores} available cores; "
            "workers will share cores"
        )


def export_trajectory(agent, env, path: Path) -> None:
    """Roll out one deterministic episode and save env 0 as a motion clip.

    The file uses the motion-clip JSON schema, so it can be replayed with a
    view_motion env config pointed at it.
    """
    ch = env.character
    obs = env.reset()
    frames = [np.asarray(frame_from_pose(ch, env.engine.state().pose))[0]]
    for _ in range(env.episode_steps):
        actions = agent.act(obs, deterministic=True)
        result = env.step(actions)
        obs = result.obs
        frames.append(np.asarray(frame_from_pose(ch, env.engine.state().pose))[0])
        if result.done[0] != int(DoneFlag.NULL):
            break
    clip = MotionClip(
        fps=1.0 / env.engine.control_dt,
        loop="none",
        frames=np.stack(frames),
        character=ch.name,
    )
    path.parent.mkdir(parents=True, exist_ok=True)
    save_motion(clip, path)
    print(f"wrote trajectory {path} ({len(frames)} frames)")


def _dump_divergence(args, iteration: int, err: TrainingDivergedError) -> Path:
    dump_path = Path(args.log_file).with_name("diverged.json")
    dump_path.parent.mkdir(parents=True, exist_ok=True)
    stats = {k: float(v) for k, v in getattr(err, "stats", {}).items()}
    dump_path.write_text(
        json.dumps({"iteration": iteration, "error": str(err), "stats": stats}, indent=2)
    )
    return dump_path


def run_train(args) -> int:
    env_cfg = load_env_config(args.env_config)
    agent_cfg = load_agent_config(args.agent_config)
    _apply_compat_flags(args)

    def env_builder(num_envs: int, seed: int):
        return build_env(env_cfg, num_envs, seed)

    group = WorkerGroup(env_builder, agent_cfg, args.num_envs, args.num_workers, seed=args.seed)
    start_iteration = 0
    if args.model_file:
        group.load_state(load_checkpoint(args.model_file))
        start_iteration = group.lead.iteration
        print(f"resumed {args.model_file} at iteration {start_iteration}")

    logger = TrainLogger(args.log_file, resume=start_iteration > 0)
    out_model = Path(args.out_model_file)
    out_model.parent.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    try:
        for it in range(start_iteration, agent_cfg.max_iterations):
            try:
                stats = group.train_iteration()
            except TrainingDivergedError as err:
                dump = _dump_divergence(args, it + 1, err)
                print(
                    f"error: training diverged at iteration {it + 1}: {err} "
                    f"(diagnostics: {dump})",
                    file=sys.stderr,
                )
                return 1
            row = {
                "iteration": it + 1,
                "samples": group.lead.total_samples * group.num_workers,
                "wall_time": time.perf_counter() - t0,
                **stats,
            }
            logger.log(row)
            save_checkpoint(out_model, {"version": CHECKPOINT_VERSION, **group.state()})
    finally:
        logger.close()
    print(f"trained {agent_cfg.max_iterations - start_iteration} iterations; model at {out_model}")
    if args.visualize:
        export_trajectory(
            group.lead, group.lead.env, Path(args.log_file).with_name("trajectory.json")
        )
    return 0


def _mean_return_eval(agent, env, episodes: int):
    """Deterministic-policy episode returns for envs without tracking errors."""
    obs = env.reset()
    acc = np.zeros(env.num_envs)
    returns: list[float] = []
    guard = 0
    max_steps = env.episode_steps * (episodes // env.num_envs + 2) * 4 + 1000
    while len(returns) < episodes and guard < max_steps:
        guard += 1
        result = env.step(agent.act(obs, deterministic=True))
        obs = result.obs
        acc += result.reward
        for e in np.flatnonzero(result.done != int(DoneFlag.NULL)):
            if len(returns) < episodes:
                returns.append(float(acc[e]))
            acc[e] = 0.0
    if len(returns) < episodes:
        raise RuntimeError("evaluation episodes did not finish within the step budget")
    return np.array(returns)


def run_test(args) -> int:
    env_cfg = load_env_config(args.env_config)
    agent_cfg = load_agent_config(args.agent_config)
    _apply_compat_flags(args)

    payload = load_checkpoint(args.model_file)
    worker_state = payload["workers"][0]

    def make_env(seed: int):
        return build_env(env_cfg, args.num_envs, seed)

    def make_agent(seed: int):
        agent = build_agent(make_env(seed), agent_cfg, seed=seed)
        agent.load_state(worker_state, resume=False)
        return agent

    motion = Path(env_cfg.motion_file).stem if env_cfg.motion_file else env_cfg.task
    log_path = Path(args.log_file)
    log_path.parent.mkdir(parents=True, exist_ok=True)
    csv_path = _csv_sibling(args.log_file)

    probe = make_agent(args.seed)
    if "pose_error" in probe.env.step(probe.act(probe.env.reset(), deterministic=True)).info:
        report = evaluate_policy(
            make_policy=lambda seed: (lambda obs, a=make_agent(seed): a.act(obs, deterministic=True)),
            make_env=make_env,
            episodes=agent_cfg.test_episodes,
            seeds=[args.seed],
            motion=motion,
            method=agent_cfg.agent,
        )
        text = report.table()
        report.write_csv(csv_path)
    else:
        env = probe.env
        env.reset(np.arange(env.num_envs))
        returns = _mean_return_eval(probe, env, agent_cfg.test_episodes)
        text = (
            f"{'motion':<16}{'method':<8}{'episodes':>10}{'return_mean':>14}{'return_std':>14}\n"
            f"{motion:<16}{agent_cfg.agent:<8}{len(returns):>10}"
            f"{returns.mean():>14.6g}{returns.std():>14.6g}"
        )
        with open(csv_path, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["motion", "method", "seed", "episodes", "return_mean", "return_std"])
            writer.writerow(
                [motion, agent_cfg.agent, args.seed, len(returns),
                 f"{returns.mean():.10g}", f"{returns.std():.10g}"]
            )
    print(text)
    log_path.write_text(text + "\n")
    print(f"wrote report {log_path} and {csv_path}")
    if args.visualize:
        export_trajectory(probe, probe.env, log_path.with_name("trajectory.json"))
    return 0


def main(argv=None) -> int:
    try:
        args = parse_args(sys.argv[1:] if argv is None else list(argv))
        if args.mode == "train":
            return run_train(args)
        return run_test(args)
    except (ArgsError, EnvConfigError, CheckpointError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except (FileNotFoundError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
