"""Tracking-error metrics and policy evaluation.

The two per-step errors:

  pose error: mean over joints-plus-root of the root-relative joint
  position differences plus the global root position difference,

    e_pos_t = (sum_j ||(xhat_j - xhat_root) - (x_j - x_root)|| +
               ||xhat_root - x_root||) / (N_joint + 1)

  velocity error: per-joint local angular velocity differences,

    e_vel_t = (sum_j ||qdhat_j - qd_j||) / (N_joint + 1)

where the velocity sum runs over the N_joint joints but keeps the same
N_joint + 1 normalizer as the position error.

evaluate_policy rolls out deterministic (mean-action) episodes, averages the
per-step errors within each episode, then aggregates mean and standard
deviation across seeds of the per-seed means.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .character import CharacterModel
from .envs.base import DoneFlag
from .kinematics import Pose, PoseVelocity, forward_kinematics

EVAL_CSV_COLUMNS = (
    "motion", "method", "seed", "episodes",
    "e_pos_mean", "e_pos_std", "e_vel_mean", "e_vel_std",
)


def instant_pose_error(ch: CharacterModel, sim_pose: Pose, ref_pose: Pose) -> np.ndarray:
    """Per-step position tracking error in meters, batched (...,)."""
    sim_xyz, _ = forward_kinematics(ch, sim_pose)
    ref_xyz, _ = forward_kinematics(ch, ref_pose)
    sim_rel = sim_xyz[..., 1:, :] - sim_xyz[..., :1, :]
    ref_rel = ref_xyz[..., 1:, :] - ref_xyz[..., :1, :]
    joint_terms = np.linalg.norm(ref_rel - sim_rel, axis=-1).sum(axis=-1)
    root_term = np.linalg.norm(ref_xyz[..., 0, :] - sim_xyz[..., 0, :], axis=-1)
    return (joint_terms + root_term) / (ch.num_joints + 1)


def instant_velocity_error(
    ch: CharacterModel, sim_vel: PoseVelocity, ref_vel: PoseVelocity
) -> np.ndarray:
    """Per-step DoF velocity tracking error in rad/s, batched (...,)."""
    diff = np.asarray(ref_vel.dof_vel) - np.asarray(sim_vel.dof_vel)
    total = 0.0
    off = 0
    for j in ch.joints:
        block = diff[..., off : off + j.dof]
        total = total + np.linalg.norm(block, axis=-1)
        off += j.dof
    return total / (ch.num_joints + 1)


@dataclass
class SeedResult:
    """Per-seed evaluation summary (mean over that seed's episode means)."""

    seed: int
    episodes: int
    e_pos_mean: float
    e_pos_std: float
    e_vel_mean: float
    e_vel_std: float


@dataclass
class EvalReport:
    """Evaluation aggregated across seeds of per-seed means."""

    motion: str
    method: str
    seeds: list[SeedResult] = field(default_factory=list)

    @property
    def episodes(self) -> int:
        return sum(s.episodes for s in self.seeds)

    def _across(self, attr: str) -> tuple[float, float]:
        vals = np.array([getattr(s, attr) for s in self.seeds], dtype=np.float64)
        return float(vals.mean()), float(vals.std())

    @property
    def e_pos(self) -> tuple[float, float]:
        return self._across("e_pos_mean")

    @property
    def e_vel(self) -> tuple[float, float]:
        return self._across("e_vel_mean")

    def table(self) -> str:
        e_pos = self.e_pos
        e_vel = self.e_vel
        rows = [
            ("motion", "method", "episodes", "e_pos [m]", "e_vel [rad/s]"),
            (
                self.motion, self.method, str(self.episodes),
                f"{e_pos[0]:.4f} +/- {e_pos[1]:.4f}",
                f"{e_vel[0]:.4f} +/- {e_vel[1]:.4f}",
            ),
        ]
        widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
        lines = ["  ".join(c.ljust(w) for c, w in zip(r, widths)) for r in rows]
        return "\n".join(lines)

    def write_csv(self, path: str | Path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(EVAL_CSV_COLUMNS)
            for s in self.seeds:
                writer.writerow(
                    [
                        self.motion, self.method, s.seed, s.episodes,
                        f"{s.e_pos_mean:.10g}", f"{s.e_pos_std:.10g}",
                        f"{s.e_vel_mean:.10g}", f"{s.e_vel_std:.10g}",
                    ]
                )


def _rollout_episode_means(policy_fn, env, episodes: int, step_weighted: bool):
    """Run mean-action episodes on a vector env; returns per-episode error means.

    Episodes are accounted per env slot; envs auto-reset, so the loop runs
    until every slot has contributed enough finished episodes.
    """
    E = env.num_envs
    obs = env.reset()
    pos_sum = np.zeros(E)
    vel_sum = np.zeros(E)
    steps = np.zeros(E, dtype=np.int64)
    done_counts = np.zeros(E, dtype=np.int64)
    per_episode_pos: list[float] = []
    per_episode_vel: list[float] = []
    step_pos: list[np.ndarray] = []
    step_lens: list[int] = []
    needed = episodes
    guard = 0
    max_steps = env.episode_steps * (episodes // E + 2) * 4 + 1000
    while len(per_episode_pos) < needed and guard < max_steps:
        guard += 1
        actions = policy_fn(obs)
        result = env.step(actions)
        pos = result.info.get("pose_error")
        vel = result.info.get("vel_error")
        if pos is None:
            raise ValueError("env does not report tracking errors; cannot evaluate")
        pos_sum += pos
        vel_sum += vel
        steps += 1
        obs = result.obs
        finished = result.done != int(DoneFlag.NULL)
        for e in np.flatnonzero(finished):
            if len(per_episode_pos) < needed:
                per_episode_pos.append(pos_sum[e] / steps[e])
                per_episode_vel.append(vel_sum[e] / steps[e])
                step_lens.append(int(steps[e]))
                done_counts[e] += 1
            pos_sum[e] = 0.0
            vel_sum[e] = 0.0
            steps[e] = 0
    if len(per_episode_pos) < needed:
        raise RuntimeError("evaluation episodes did not finish within the step budget")
    pos_arr = np.array(per_episode_pos)
    vel_arr = np.array(per_episode_vel)
    if step_weighted:
        w = np.array(step_lens, dtype=np.float64)
        w = w / w.sum()
        return pos_arr, vel_arr, w
    return pos_arr, vel_arr, None


def evaluate_policy(
    make_policy,
    make_env,
    episodes: int,
    seeds,
    motion: str = "motion",
    method: str = "policy",
    step_weighted: bool = False,
) -> EvalReport:
    """Evaluate deterministic policies across seeds.

    make_policy(seed) returns a callable obs -> actions; make_env(seed)
    returns a fresh vector env.  Per-episode error = mean over steps; each
    seed contributes the mean/std over its episodes; the report aggregates
    across seeds.  With step_weighted=True episode means are weighted by
    episode length, matching a mean over the concatenated step stream.
    """
    report = EvalReport(motion=motion, method=method)
    for seed in seeds:
        env = make_env(seed)
        policy_fn = make_policy(seed)
        pos, vel, w = _rollout_episode_means(policy_fn, env, episodes, step_weighted)
        if w is None:
            pos_mean, vel_mean = float(pos.mean()), float(vel.mean())
        else:
            pos_mean, vel_mean = float(pos @ w), float(vel @ w)
        report.seeds.append(
            SeedResult(
                seed=int(seed),
                episodes=len(pos),
                e_pos_mean=pos_mean,
                e_pos_std=float(pos.std()),
                e_vel_mean=vel_mean,
                e_vel_std=float(vel.std()),
            )
        )
    return report
