"""Tests for tracking-error metrics and policy evaluation.

The error oracles recompute the per-step formulas with plain Python loops:
position error averages root-relative joint offsets plus the global root
offset over N_joint + 1 terms; velocity error sums per-joint DoF velocity
norms over the same normalizer.
"""

from __future__ import annotations

import csv

import numpy as np
import pytest

from conftest import elevated_chain, make_tracking_env, sine_library, tracking_env_config
from motionrl.character import resolve_character
from motionrl.envs.base import EnvConfig
from motionrl.envs.target import TargetLocationEnv
from motionrl.envs.tracking import TrackingEnv
from motionrl.kinematics import Pose, PoseVelocity, forward_kinematics, pose_from_dof
from motionrl.metrics import (
    EVAL_CSV_COLUMNS,
    EvalReport,
    SeedResult,
    evaluate_policy,
    instant_pose_error,
    instant_velocity_error,
)
from motionrl.rotations import quat_normalize


def random_pose(ch, rng, batch=()):
    root_pos = rng.normal(size=(*batch, 3))
    root_rot = quat_normalize(rng.normal(size=(*batch, 4)))
    dof = rng.uniform(-1.0, 1.0, size=(*batch, ch.dof_count))
    return pose_from_dof(ch, root_pos, root_rot, dof)


def pose_error_oracle(ch, sim_pose, ref_pose) -> float:
    """Direct summation over one unbatched pose pair."""
    sim_xyz, _ = forward_kinematics(ch, sim_pose)
    ref_xyz, _ = forward_kinematics(ch, ref_pose)
    total = float(np.linalg.norm(ref_xyz[0] - sim_xyz[0]))
    for j in range(1, ch.num_joints + 1):
        sim_rel = sim_xyz[j] - sim_xyz[0]
        ref_rel = ref_xyz[j] - ref_xyz[0]
        total += float(np.linalg.norm(ref_rel - sim_rel))
    return total / (ch.num_joints + 1)


def velocity_error_oracle(ch, sim_vel, ref_vel) -> float:
    total = 0.0
    off = 0
    for j in ch.joints:
        d = np.asarray(ref_vel.dof_vel)[off : off + j.dof] - np.asarray(
            sim_vel.dof_vel
        )[off : off + j.dof]
        total += float(np.sqrt(np.sum(d * d)))
        off += j.dof
    return total / (ch.num_joints + 1)


@pytest.mark.parametrize("character", ["chain", "humanoid"])
def test_pose_error_matches_direct_summation(character, rng):
    ch = elevated_chain() if character == "chain" else resolve_character("humanoid")
    for _ in range(30):
        sim = random_pose(ch, rng)
        ref = random_pose(ch, rng)
        got = instant_pose_error(ch, sim, ref)
        assert abs(float(got) - pose_error_oracle(ch, sim, ref)) <= 1e-12


def test_pose_error_batched_matches_per_sample(rng):
    ch = resolve_character("humanoid")
    sim = random_pose(ch, rng, batch=(8,))
    ref = random_pose(ch, rng, batch=(8,))
    got = instant_pose_error(ch, sim, ref)
    assert got.shape == (8,)
    for e in range(8):
        sim_e = Pose(sim.root_pos[e], sim.root_rot[e], [r[e] for r in sim.joint_rot])
        ref_e = Pose(ref.root_pos[e], ref.root_rot[e], [r[e] for r in ref.joint_rot])
        assert abs(float(got[e]) - pose_error_oracle(ch, sim_e, ref_e)) <= 1e-12


@pytest.mark.parametrize("character", ["chain", "humanoid"])
def test_velocity_error_matches_direct_summation(character, rng):
    ch = elevated_chain() if character == "chain" else resolve_character("humanoid")
    for _ in range(30):
        sim = PoseVelocity(
            rng.normal(size=3), rng.normal(size=3), rng.normal(size=ch.dof_count)
        )
        ref = PoseVelocity(
            rng.normal(size=3), rng.normal(size=3), rng.normal(size=ch.dof_count)
        )
        got = instant_velocity_error(ch, sim, ref)
        assert abs(float(got) - velocity_error_oracle(ch, sim, ref)) <= 1e-12


@pytest.mark.parametrize("character", ["chain", "humanoid"])
def test_rigid_root_shift_error_is_shift_over_joint_count(character, rng):
    """Shifting the whole reference by d leaves only the root term: |d|/(N+1)."""
    ch = elevated_chain() if character == "chain" else resolve_character("humanoid")
    for _ in range(10):
        sim = random_pose(ch, rng)
        ref = sim.copy()
        d = rng.normal(size=3)
        ref.root_pos = ref.root_pos + d
        got = instant_pose_error(ch, sim, ref)
        expected = np.linalg.norm(d) / (ch.num_joints + 1)
        assert abs(float(got) - expected) <= 1e-12


def test_identical_poses_have_zero_error(rng):
    ch = resolve_character("humanoid")
    pose = random_pose(ch, rng)
    assert float(instant_pose_error(ch, pose, pose.copy())) == 0.0
    vel = PoseVelocity(rng.normal(size=3), rng.normal(size=3), rng.normal(size=ch.dof_count))
    assert float(instant_velocity_error(ch, vel, vel.copy())) == 0.0


def test_eval_report_aggregates_across_seed_means():
    report = EvalReport(motion="clip", method="ppo")
    report.seeds.append(SeedResult(0, 4, 0.02, 0.001, 0.5, 0.01))
    report.seeds.append(SeedResult(1, 4, 0.04, 0.002, 0.7, 0.02))
    assert report.episodes == 8
    mean, std = report.e_pos
    assert abs(mean - 0.03) <= 1e-15
    assert abs(std - 0.01) <= 1e-15
    mean, std = report.e_vel
    assert abs(mean - 0.6) <= 1e-15
    assert abs(std - 0.1) <= 1e-15
    table = report.table()
    assert "clip" in table and "ppo" in table
    assert "0.0300 +/- 0.0100" in table
    assert "e_pos [m]" in table and "e_vel [rad/s]" in table


def test_eval_report_csv_round_trip(tmp_path):
    report = EvalReport(motion="walk", method="amp")
    report.seeds.append(SeedResult(3, 16, 0.123456789, 0.01, 1.25, 0.125))
    report.seeds.append(SeedResult(4, 16, 0.2, 0.02, 1.5, 0.25))
    path = tmp_path / "out" / "eval.csv"
    report.write_csv(path)
    with open(path, newline="") as f:
        rows = list(csv.reader(f))
    assert tuple(rows[0]) == EVAL_CSV_COLUMNS
    assert len(rows) == 3
    assert rows[1][:4] == ["walk", "amp", "3", "16"]
    assert abs(float(rows[1][4]) - 0.123456789) <= 1e-9
    assert abs(float(rows[2][6]) - 1.5) <= 1e-9


def zero_policy(obs):
    return np.zeros((obs.shape[0], 3))


def test_evaluate_zero_action_tracking_is_exact():
    report = evaluate_policy(
        lambda seed: zero_policy,
        lambda seed: make_tracking_env(num_envs=2, seed=seed, episode_length=1.0),
        episodes=4,
        seeds=[0, 1],
        motion="sine",
        method="replay",
    )
    assert report.episodes == 8
    assert [s.seed for s in report.seeds] == [0, 1]
    assert all(s.episodes == 4 for s in report.seeds)
    assert report.e_pos[0] <= 1e-9
    assert report.e_pos[1] <= 1e-9


def test_repeated_seed_evaluates_identically():
    def make_policy(seed):
        rng = np.random.default_rng(seed)
        w = rng.normal(scale=0.05, size=3)
        return lambda obs: np.tile(w, (obs.shape[0], 1))

    report = evaluate_policy(
        make_policy,
        lambda seed: make_tracking_env(num_envs=2, seed=seed, episode_length=1.0),
        episodes=4,
        seeds=[7, 7],
    )
    a, b = report.seeds
    assert a.e_pos_mean == b.e_pos_mean
    assert a.e_vel_mean == b.e_vel_mean
    assert report.e_pos[1] == 0.0


def test_evaluate_requires_tracking_errors():
    ch = elevated_chain()
    cfg = EnvConfig.from_dict(
        {
            "task": "target_location",
            "episode_length": 1.0,
            "engine": {"backend": "kinematic", "control_freq": 30.0, "sim_freq": 30.0},
        }
    )
    with pytest.raises(ValueError, match="tracking errors"):
        evaluate_policy(
            lambda seed: zero_policy,
            lambda seed: TargetLocationEnv(ch, 2, cfg, seed=seed),
            episodes=2,
            seeds=[0],
        )


def test_step_weighted_mean_matches_concatenated_step_stream():
    """With length weighting, the report equals the mean over all steps pooled."""
    ch = elevated_chain()

    def make_env(seed):
        lib = sine_library(ch, loop="none")
        cfg = tracking_env_config(episode_length=2.0)
        return TrackingEnv(ch, 2, cfg, lib, seed=seed)

    def policy(obs):
        return np.full((obs.shape[0], 3), 0.2)

    episodes = 6
    report_w = evaluate_policy(lambda s: policy, make_env, episodes, seeds=[5],
                               step_weighted=True)
    report_u = evaluate_policy(lambda s: policy, make_env, episodes, seeds=[5])

    # oracle: replay the same rollout, pooling step errors across episodes
    env = make_env(5)
    obs = env.reset()
    sums = np.zeros(2)
    lens = np.zeros(2, dtype=np.int64)
    ep_sums: list[float] = []
    ep_lens: list[int] = []
    while len(ep_sums) < episodes:
        result = env.step(policy(obs))
        sums += result.info["pose_error"]
        lens += 1
        obs = result.obs
        for e in np.flatnonzero(result.done != 0):
            if len(ep_sums) < episodes:
                ep_sums.append(float(sums[e]))
                ep_lens.append(int(lens[e]))
            sums[e] = 0.0
            lens[e] = 0
    pooled = sum(ep_sums) / sum(ep_lens)
    plain = float(np.mean([s / n for s, n in zip(ep_sums, ep_lens)]))
    assert abs(report_w.seeds[0].e_pos_mean - pooled) <= 1e-12
    assert abs(report_u.seeds[0].e_pos_mean - plain) <= 1e-12
    if len(set(ep_lens)) > 1:
        assert report_w.seeds[0].e_pos_mean != report_u.seeds[0].e_pos_mean
