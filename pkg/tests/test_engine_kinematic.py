"""Kinematic backend: direct pose writes, finite-difference velocities."""

import numpy as np
import pytest

from motionrl.engine import EngineConfig, EngineConfigError, build_engine
from motionrl.kinematics import dof_from_pose, pose_from_dof, zero_pose, zero_velocity
from motionrl.rotations import exp_map_to_quat

from conftest import elevated_chain


def kin_config(**overrides):
    doc = {"backend": "kinematic", "control_freq": 30.0, "sim_freq": 30.0}
    doc.update(overrides)
    return EngineConfig.from_dict(doc)


def make(num_envs=4, seed=0, ch=None, **overrides):
    ch = ch or elevated_chain()
    return ch, build_engine(ch, num_envs, kin_config(**overrides),
                            rng=np.random.default_rng(seed))


def test_pos_commands_set_dofs_exactly(rng):
    ch, eng = make()
    targets = rng.uniform(-1.0, 1.0, size=(4, ch.dof_count))
    state = eng.step(targets)
    assert np.allclose(dof_from_pose(ch, state.pose), targets, atol=1e-12)


def test_fd_velocity_of_revolute_dofs(rng):
    ch, eng = make()
    dt = 1.0 / 30.0
    a = rng.uniform(-1, 1, size=(4, ch.dof_count))
    b = rng.uniform(-1, 1, size=(4, ch.dof_count))
    eng.step(a)
    state = eng.step(b)
    assert np.allclose(state.vel.dof_vel, (b - a) / dt, atol=1e-9)


def test_vel_mode_integrates(rng):
    ch, eng = make(control_mode="vel")
    v = rng.uniform(-1, 1, size=(4, ch.dof_count))
    s1 = eng.step(v)
    s2 = eng.step(v)
    dt = 1.0 / 30.0
    assert np.allclose(dof_from_pose(ch, s2.pose), 2 * v * dt, atol=1e-12)
    assert np.allclose(s2.vel.dof_vel, v)


def test_torque_mode_rejected():
    ch = elevated_chain()
    with pytest.raises(EngineConfigError, match="torque"):
        build_engine(ch, 2, kin_config(control_mode="torque"))


def test_write_state_round_trip(rng):
    ch, eng = make()
    pose = pose_from_dof(
        ch,
        rng.normal(size=(4, 3)),
        np.tile([1.0, 0, 0, 0], (4, 1)),
        rng.uniform(-1, 1, size=(4, ch.dof_count)),
    )
    vel = zero_velocity(ch, (4,))
    vel.dof_vel[:] = rng.normal(size=(4, ch.dof_count))
    eng.write_state(np.arange(4), pose, vel)
    state = eng.state()
    assert np.allclose(state.pose.root_pos, pose.root_pos)
    assert np.allclose(dof_from_pose(ch, state.pose), dof_from_pose(ch, pose), atol=1e-12)
    assert np.allclose(state.vel.dof_vel, vel.dof_vel)


def test_partial_write_touches_only_selected_envs(rng):
    ch, eng = make()
    eng.step(np.ones((4, ch.dof_count)))
    pose = zero_pose(ch, (2,))
    vel = zero_velocity(ch, (2,))
    eng.write_state(np.array([1, 3]), pose, vel)
    dof = dof_from_pose(ch, eng.state().pose)
    assert np.allclose(dof[[1, 3]], 0.0)
    assert np.allclose(dof[[0, 2]], 1.0)


def test_snapshot_restore_reproduces_trajectory(rng):
    ch, eng = make(actuation_noise=0.01)
    eng.step(rng.uniform(-1, 1, size=(4, ch.dof_count)))
    snap = eng.snapshot()
    cmds = [rng.uniform(-1, 1, size=(4, ch.dof_count)) for _ in range(3)]
    first = [eng.step(c) for c in cmds]
    eng.restore(snap)
    second = [eng.step(c) for c in cmds]
    for s1, s2 in zip(first, second):
        assert np.array_equal(dof_from_pose(ch, s1.pose), dof_from_pose(ch, s2.pose))
        assert np.array_equal(s1.vel.dof_vel, s2.vel.dof_vel)


def test_actuation_noise_is_seeded():
    ch = elevated_chain()
    outs = []
    for _ in range(2):
        eng = build_engine(ch, 2, kin_config(actuation_noise=0.05),
                           rng=np.random.default_rng(7))
        s = eng.step(np.zeros((2, ch.dof_count)))
        outs.append(dof_from_pose(ch, s.pose))
    assert np.array_equal(outs[0], outs[1])
    assert not np.allclose(outs[0], 0.0)


def test_contact_flags_near_ground():
    # chain at the default height 0 keeps non-leaf bodies in ground contact
    ch0 = elevated_chain()
    _, eng_high = make(ch=ch0)
    state = eng_high.step(np.zeros((4, ch0.dof_count)))
    assert not state.contacts.any()

    from motionrl.character import make_planar_chain

    low = make_planar_chain(root_height=0.0)
    eng_low = build_engine(low, 2, kin_config(), rng=np.random.default_rng(0))
    state = eng_low.step(np.zeros((2, low.dof_count)))
    assert state.contacts.any()


def test_spherical_fd_velocity_uses_relative_rotation(rng):
    from motionrl.character import BodySpec, CharacterModel, JointSpec

    sph = CharacterModel(
        name="sph",
        joints=(
            JointSpec(name="j", kind="spherical", parent=-1, local_offset=(0, 0, 0)),
        ),
        bodies=(BodySpec(name="r"), BodySpec(name="b")),
        up_axis="z",
        root_fixed=True,
    )
    eng = build_engine(sph, 1, kin_config(), rng=np.random.default_rng(0))
    dt = 1.0 / 30.0
    # rotate about a fixed axis: angular velocity should be axis * dangle / dt
    axis = np.array([0.0, 0.0, 1.0])
    eng.step((axis * 0.3)[None].copy())
    state = eng.step((axis * 0.5)[None].copy())
    assert np.allclose(state.vel.dof_vel[0], axis * 0.2 / dt, atol=1e-9)
