"""Planar dynamics backend: equilibria, energy, contacts, PD control."""

import numpy as np
import pytest

from motionrl.character import (
    BodySpec,
    CharacterModel,
    JointSpec,
    make_pendulum,
    make_planar_chain,
)
from motionrl.engine import EngineConfig, EngineConfigError, build_engine
from motionrl.kinematics import zero_pose, zero_velocity


def planar_config(**overrides):
    doc = {
        "backend": "planar_dynamics",
        "control_mode": "none",
        "control_freq": 30.0,
        "sim_freq": 600.0,
        "gravity": [0.0, -9.81, 0.0],
    }
    doc.update(overrides)
    return EngineConfig.from_dict(doc)


def set_joint_angles(ch, eng, angles):
    """Write joint angles (E, J) with everything else at rest."""
    angles = np.asarray(angles, dtype=np.float64)
    n = angles.shape[0]
    pose = zero_pose(ch, (n,))
    pose.root_pos[:, 1] = ch.extras.get("root_height", 0.0)
    for j in range(ch.num_joints):
        pose.joint_rot[j][:] = angles[:, j]
    eng.write_state(np.arange(n), pose, zero_velocity(ch, (n,)))


def test_hanging_pendulum_is_an_equilibrium():
    ch = make_pendulum()
    eng = build_engine(ch, 2, planar_config())
    for _ in range(30):
        state = eng.step(None)
    assert np.allclose(state.pose.joint_rot[0], 0.0, atol=1e-12)
    assert np.allclose(state.vel.dof_vel, 0.0, atol=1e-12)


def test_torque_free_pendulum_conserves_energy():
    ch = make_pendulum()
    eng = build_engine(ch, 1, planar_config())
    set_joint_angles(ch, eng, [[np.pi / 2]])
    e0 = eng.mechanical_energy()[0]
    drift = 0.0
    for _ in range(90):  # 3 s
        eng.step(None)
        drift = max(drift, abs(eng.mechanical_energy()[0] - e0))
    # semi-implicit Euler keeps the error bounded; swing amplitude is ~4.9 J
    assert drift < 0.05


def test_pendulum_small_oscillation_period():
    # analytic: omega^2 = m g l_c / (I_com + m l_c^2) for a rod on a pivot
    length, mass = 1.0, 1.0
    ch = make_pendulum(length=length, mass=mass)
    l_c = length / 2.0
    inertia = mass * length**2 / 12.0 + mass * l_c**2
    period = 2.0 * np.pi * np.sqrt(inertia / (mass * 9.81 * l_c))

    eng = build_engine(ch, 1, planar_config())
    set_joint_angles(ch, eng, [[0.05]])
    dt = eng.control_dt
    angles = [0.05]
    for _ in range(150):  # 5 s
        angles.append(float(eng.step(None).pose.joint_rot[0][0]))
    angles = np.asarray(angles)
    crossings = []
    for k in range(len(angles) - 1):
        if angles[k] == 0.0 or angles[k] * angles[k + 1] >= 0.0:
            continue
        frac = angles[k] / (angles[k] - angles[k + 1])
        crossings.append((k + frac) * dt)
    half_periods = np.diff(crossings)
    assert len(half_periods) >= 4
    assert abs(half_periods.mean() * 2.0 - period) < 0.01 * period


def test_pd_control_swings_pendulum_upright():
    ch = make_pendulum()
    eng = build_engine(ch, 2, planar_config(control_mode="pos"))
    target = np.full((2, 1), np.pi)
    for _ in range(90):  # 3 s
        state = eng.step(target)
    # gravity torque vanishes upright, so the PD settles on the target
    assert np.allclose(state.pose.joint_rot[0], np.pi, atol=0.05)
    assert np.allclose(state.vel.dof_vel, 0.0, atol=0.05)


def test_torque_commands_are_clamped_to_limit():
    ch = make_pendulum(torque_limit=25.0)
    runs = []
    for command in (1e6, 25.0):
        eng = build_engine(ch, 1, planar_config(control_mode="torque"))
        traj = [eng.step(np.full((1, 1), command)).pose.joint_rot[0].copy() for _ in range(10)]
        runs.append(np.stack(traj))
    assert np.array_equal(runs[0], runs[1])
    assert abs(runs[0][-1][0]) > 0.1  # the clamped torque still moves the rod


def test_floating_base_free_fall_matches_gravity():
    ch = make_planar_chain(num_links=2, root_fixed=False, root_height=2.0)
    eng = build_engine(ch, 1, planar_config())
    t = 0.3
    steps = int(round(t / eng.control_dt))
    for _ in range(steps):
        state = eng.step(None)
    dt = 1.0 / eng.config.sim_freq
    # semi-implicit Euler: y = y0 - g t (t + dt) / 2
    expected = 2.0 - 0.5 * 9.81 * t * (t + dt)
    assert abs(state.pose.root_pos[0, 1] - expected) < 1e-9
    # a chain released at rest falls without internal motion
    for rot in state.pose.joint_rot:
        assert np.allclose(rot, 0.0, atol=1e-9)


def test_fixed_base_root_does_not_move():
    ch = make_planar_chain(num_links=2, root_fixed=True, root_height=1.5)
    eng = build_engine(ch, 1, planar_config())
    for _ in range(30):
        state = eng.step(None)
    assert np.allclose(state.pose.root_pos[0], [0.0, 1.5, 0.0])
    assert not np.allclose(state.pose.joint_rot[0], 0.0)  # links still swing


def test_ground_contact_stops_the_fall():
    ch = make_planar_chain(num_links=1, root_fixed=False, root_height=1.0)
    eng = build_engine(ch, 1, planar_config())
    min_y = np.inf
    for _ in range(75):  # 2.5 s
        state = eng.step(None)
        min_y = min(min_y, float(state.pose.root_pos[0, 1]))
    assert min_y > -0.02  # penalty springs prevent tunnelling
    assert state.contacts[0].any()
    speed = np.linalg.norm(state.vel.root_lin_vel[0])
    assert speed < 0.1


def test_vel_mode_imposes_joint_rates_kinematically():
    ch = make_planar_chain(num_links=2, root_fixed=False, root_height=1.0)
    eng = build_engine(ch, 3, planar_config(control_mode="vel"))
    rates = np.array([[0.5, -0.25]] * 3)
    for _ in range(30):
        state = eng.step(rates)
    assert np.allclose(state.pose.joint_rot[0], 0.5, atol=1e-9)
    assert np.allclose(state.pose.joint_rot[1], -0.25, atol=1e-9)
    # the base is not simulated in vel mode: it keeps its zero velocity
    assert np.allclose(state.pose.root_pos[0], [0.0, 1.0, 0.0])


def test_snapshot_restore_reproduces_dynamics(rng):
    ch = make_pendulum()
    eng = build_engine(ch, 2, planar_config(control_mode="torque"))
    eng.step(rng.uniform(-5, 5, size=(2, 1)))
    snap = eng.snapshot()
    cmds = [rng.uniform(-5, 5, size=(2, 1)) for _ in range(5)]
    first = [eng.step(c) for c in cmds]
    eng.restore(snap)
    second = [eng.step(c) for c in cmds]
    for s1, s2 in zip(first, second):
        assert np.array_equal(s1.pose.joint_rot[0], s2.pose.joint_rot[0])
        assert np.array_equal(s1.vel.dof_vel, s2.vel.dof_vel)


def test_rejects_nonplanar_configurations():
    chain = make_planar_chain()
    with pytest.raises(EngineConfigError, match="zero z component"):
        build_engine(chain, 1, planar_config(gravity=[0.0, 0.0, -9.81]))

    zup = CharacterModel(
        name="zup",
        joints=(
            JointSpec(name="j", kind="revolute", parent=-1,
                      local_offset=(0, 0, 0), axis=(0, 0, 1)),
        ),
        bodies=(BodySpec(name="r"), BodySpec(name="b")),
        up_axis="z",
        root_fixed=True,
    )
    with pytest.raises(EngineConfigError, match="up_axis"):
        build_engine(zup, 1, planar_config())

    spherical = CharacterModel(
        name="sph",
        joints=(
            JointSpec(name="j", kind="spherical", parent=-1, local_offset=(0, 0, 0)),
        ),
        bodies=(BodySpec(name="r"), BodySpec(name="b")),
        up_axis="y",
        root_fixed=True,
    )
    with pytest.raises(EngineConfigError, match="revolute"):
        build_engine(spherical, 1, planar_config())
