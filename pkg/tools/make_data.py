"""Regenerate built-in character assets and the sample data tree.

Run from the repository root:

    python3 tools/make_data.py
"""

from __future__ import annotations

import json
import math
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from motionrl.character import (  # noqa: E402
    BodySpec,
    CharacterModel,
    JointSpec,
    make_pendulum,
    make_planar_chain,
    save_character,
)
from motionrl.motion import save_motion  # noqa: E402
from motionrl.synthetic import make_sine_chain_clip, make_static_clip  # noqa: E402

ASSETS = ROOT / "src" / "motionrl" / "assets" / "characters"
MOTIONS = ROOT / "data" / "motions"


def sph(name, parent, offset, kp, kd, limit):
    return JointSpec(
        name=name, kind="spherical", parent=parent, local_offset=offset,
        torque_limit=limit, kp=kp, kd=kd,
    )


def rev(name, parent, offset, kp, kd, limit):
    return JointSpec(
        name=name, kind="revolute", parent=parent, local_offset=offset,
        axis=(0.0, 1.0, 0.0), torque_limit=limit, kp=kp, kd=kd,
    )


def make_humanoid() -> CharacterModel:
    """Floating-base humanoid: 8 spherical + 4 revolute joints, 34-wide frames."""
    joints = (
        sph("abdomen", -1, (0.0, 0.0, 0.12), 500, 50, 200),
        sph("neck", 0, (0.0, 0.0, 0.40), 100, 10, 50),
        sph("right_shoulder", 0, (0.0, -0.22, 0.33), 400, 40, 100),
        rev("right_elbow", 2, (0.0, 0.0, -0.28), 300, 30, 60),
        sph("left_shoulder", 0, (0.0, 0.22, 0.33), 400, 40, 100),
        rev("left_elbow", 4, (0.0, 0.0, -0.28), 300, 30, 60),
        sph("right_hip", -1, (0.0, -0.10, -0.05), 500, 50, 200),
        rev("right_knee", 6, (0.0, 0.0, -0.42), 500, 50, 150),
        sph("right_ankle", 7, (0.0, 0.0, -0.42), 400, 40, 90),
        sph("left_hip", -1, (0.0, 0.10, -0.05), 500, 50, 200),
        rev("left_knee", 9, (0.0, 0.0, -0.42), 500, 50, 150),
        sph("left_ankle", 10, (0.0, 0.0, -0.42), 400, 40, 90),
    )

    def seg(name, mass, length, radius, com):
        return BodySpec(
            name=name, mass=mass, inertia=mass * length * length / 12.0,
            size=(length, radius), com=com,
        )

    bodies = (
        seg("pelvis", 6.0, 0.20, 0.12, (0.0, 0.0, 0.0)),
        seg("chest", 14.0, 0.35, 0.15, (0.0, 0.0, 0.18)),
        seg("head", 3.5, 0.20, 0.10, (0.0, 0.0, 0.13)),
        seg("right_upper_arm", 1.5, 0.28, 0.045, (0.0, 0.0, -0.14)),
        seg("right_forearm", 1.0, 0.25, 0.04, (0.0, 0.0, -0.13)),
        seg("left_upper_arm", 1.5, 0.28, 0.045, (0.0, 0.0, -0.14)),
        seg("left_forearm", 1.0, 0.25, 0.04, (0.0, 0.0, -0.13)),
        seg("right_thigh", 4.5, 0.42, 0.06, (0.0, 0.0, -0.21)),
        seg("right_shin", 3.0, 0.42, 0.05, (0.0, 0.0, -0.21)),
        BodySpec(
            name="right_foot", mass=1.0, inertia=0.005, shape="box",
            size=(0.18, 0.09, 0.06), com=(0.06, 0.0, -0.03),
        ),
        seg("left_thigh", 4.5, 0.42, 0.06, (0.0, 0.0, -0.21)),
        seg("left_shin", 3.0, 0.42, 0.05, (0.0, 0.0, -0.21)),
        BodySpec(
            name="left_foot", mass=1.0, inertia=0.005, shape="box",
            size=(0.18, 0.09, 0.06), com=(0.06, 0.0, -0.03),
        ),
    )
    return CharacterModel(
        name="humanoid", joints=joints, bodies=bodies, up_axis="z",
        root_fixed=False, extras={"root_height": 0.9},
    )


def main() -> None:
    ASSETS.mkdir(parents=True, exist_ok=True)
    MOTIONS.mkdir(parents=True, exist_ok=True)

    chain = make_planar_chain(root_height=1.5)
    save_character(chain, ASSETS / "chain3.json")
    save_character(make_pendulum(), ASSETS / "pendulum.json")
    humanoid = make_humanoid()
    assert humanoid.frame_width == 34, humanoid.frame_width
    save_character(humanoid, ASSETS / "humanoid.json")

    elevated = (0.0, 1.5, 0.0)
    save_motion(
        make_sine_chain_clip(chain, duration=2.0, fps=30.0, amplitude=0.6,
                             frequency=0.5, root_pos=elevated),
        MOTIONS / "chain_sine.json",
    )
    save_motion(
        make_sine_chain_clip(chain, duration=2.0, fps=30.0, amplitude=0.4,
                             frequency=1.0, root_pos=elevated),
        MOTIONS / "chain_sine_fast.json",
    )
    (MOTIONS / "chain_dataset.json").write_text(
        json.dumps(
            [
                {"file": "chain_sine.json", "weight": 2.0},
                {"file": "chain_sine_fast.json", "weight": 1.0},
            ],
            indent=2,
        )
    )
    pendulum = make_pendulum()
    save_motion(
        make_static_clip(pendulum, dof_values=[math.pi], root_pos=elevated, hold=10.0),
        MOTIONS / "pendulum_upright.json",
    )
    print(f"assets -> {ASSETS}")
    print(f"motions -> {MOTIONS}")


if __name__ == "__main__":
    main()
