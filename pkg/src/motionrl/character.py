"""Character definitions: kinematic tree, body geometry, actuation limits.

A character is a JSON document with an ordered ``joints`` array (depth-first
over the kinematic tree, parent index always smaller than the joint's own
index) and a ``bodies`` array. ``bodies[0]`` is the root body; ``bodies[i]``
for i >= 1 is the body moved by ``joints[i-1]``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

JOINT_KINDS = ("spherical", "revolute", "fixed")
JOINT_DOF = {"spherical": 3, "revolute": 1, "fixed": 0}


class CharacterError(ValueError):
    """Raised for malformed character definitions."""


@dataclass(frozen=True)
class JointSpec:
    name: str
    kind: str  # spherical | revolute | fixed
    parent: int  # joint index, -1 = root body
    local_offset: tuple[float, float, float]
    axis: tuple[float, float, float] | None = None  # revolute only
    torque_limit: float = 100.0
    kp: float = 50.0
    kd: float = 5.0

    @property
    def dof(self) -> int:
        return JOINT_DOF[self.kind]


@dataclass(frozen=True)
class BodySpec:
    name: str
    mass: float = 1.0
    inertia: float = 0.05  # about COM, normal to the plane for planar bodies
    shape: str = "capsule"  # capsule | box
    # capsule: length along local x + radius; box: full extents
    size: tuple[float, ...] = (0.3, 0.05)
    com: tuple[float, float, float] = (0.0, 0.0, 0.0)


@dataclass(frozen=True)
class CharacterModel:
    name: str
    joints: tuple[JointSpec, ...]
    bodies: tuple[BodySpec, ...]  # len == len(joints) + 1, [0] is root
    up_axis: str = "z"
    root_fixed: bool = False
    extras: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if len(self.bodies) != len(self.joints) + 1:
            raise CharacterError(
                f"expected {len(self.joints) + 1} bodies (root + one per joint), got {len(self.bodies)}"
            )
        if self.up_axis not in ("y", "z"):
            raise CharacterError(f"unsupported up_axis {self.up_axis!r}")
        for i, j in enumerate(self.joints):
            if j.kind not in JOINT_KINDS:
                raise CharacterError(f"joint {j.name!r}: unknown kind {j.kind!r}")
            if not (-1 <= j.parent < i):
                raise CharacterError(
                    f"joint {j.name!r}: parent index {j.parent} must be < {i} (depth-first order)"
                )
            if j.kind == "revolute":
                if j.axis is None:
                    raise CharacterError(f"revolute joint {j.name!r} has no axis")
                n = float(np.linalg.norm(j.axis))
                if abs(n - 1.0) > 1e-6:
                    raise CharacterError(f"joint {j.name!r}: axis must be unit length")

    @property
    def num_joints(self) -> int:
        return len(self.joints)

    @property
    def num_bodies(self) -> int:
        return len(self.bodies)

    @property
    def dof_count(self) -> int:
        return sum(j.dof for j in self.joints)

    @property
    def frame_width(self) -> int:
        # root position (3) + root rotation exp map (3) + joint dofs
        return 6 + self.dof_count

    def dof_slices(self) -> list[slice]:
        """Per-joint slices into a flat dof vector (empty slice for fixed)."""
        out, off = [], 0
        for j in self.joints:
            out.append(slice(off, off + j.dof))
            off += j.dof
        return out

    def joint_children(self) -> list[list[int]]:
        kids: list[list[int]] = [[] for _ in range(self.num_joints)]
        for i, j in enumerate(self.joints):
            if j.parent >= 0:
                kids[j.parent].append(i)
        return kids

    def end_effector_bodies(self) -> list[int]:
        """Indices of leaf bodies (no child joints attach to them)."""
        has_child = [False] * self.num_bodies
        for j in self.joints:
            has_child[j.parent + 1] = True
        leaves = [b for b in range(1, self.num_bodies) if not has_child[b]]
        return leaves or [self.num_bodies - 1]

    def body_index(self, name: str) -> int:
        for i, b in enumerate(self.bodies):
            if b.name == name:
                return i
        raise CharacterError(f"no body named {name!r}")


def character_to_dict(ch: CharacterModel) -> dict:
    joints = []
    for j in ch.joints:
        d = {
            "name": j.name,
            "kind": j.kind,
            "parent": j.parent,
            "local_offset": list(j.local_offset),
            "torque_limit": j.torque_limit,
            "pd_gains": [j.kp, j.kd],
        }
        if j.axis is not None:
            d["axis"] = list(j.axis)
        joints.append(d)
    bodies = [
        {
            "name": b.name,
            "mass": b.mass,
            "inertia": b.inertia,
            "shape": b.shape,
            "size": list(b.size),
            "com": list(b.com),
        }
        for b in ch.bodies
    ]
    doc = {
        "name": ch.name,
        "up_axis": ch.up_axis,
        "root_fixed": ch.root_fixed,
        "joints": joints,
        "bodies": bodies,
    }
    if ch.extras:
        doc["extras"] = dict(ch.extras)
    return doc


def character_from_dict(doc: dict) -> CharacterModel:
    try:
        joints = []
        for jd in doc["joints"]:
            gains = jd.get("pd_gains", [50.0, 5.0])
            joints.append(
                JointSpec(
                    name=jd["name"],
                    kind=jd["kind"],
                    parent=int(jd["parent"]),
                    local_offset=tuple(float(x) for x in jd["local_offset"]),
                    axis=tuple(float(x) for x in jd["axis"]) if "axis" in jd else None,
                    torque_limit=float(jd.get("torque_limit", 100.0)),
                    kp=float(gains[0]),
                    kd=float(gains[1]),
                )
            )
        bodies = [
            BodySpec(
                name=bd["name"],
                mass=float(bd.get("mass", 1.0)),
                inertia=float(bd.get("inertia", 0.05)),
                shape=bd.get("shape", "capsule"),
                size=tuple(float(x) for x in bd.get("size", (0.3, 0.05))),
                com=tuple(float(x) for x in bd.get("com", (0.0, 0.0, 0.0))),
            )
            for bd in doc["bodies"]
        ]
    except (KeyError, TypeError, ValueError) as e:
        raise CharacterError(f"malformed character document: {e}") from e
    return CharacterModel(
        name=doc.get("name", "character"),
        joints=tuple(joints),
        bodies=tuple(bodies),
        up_axis=doc.get("up_axis", "z"),
        root_fixed=bool(doc.get("root_fixed", False)),
        extras=dict(doc.get("extras", {})),
    )


def save_character(ch: CharacterModel, path) -> None:
    Path(path).write_text(json.dumps(character_to_dict(ch), indent=2))


def load_character(path) -> CharacterModel:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise CharacterError(f"{path}: invalid JSON ({e})") from e
    return character_from_dict(doc)


def resolve_character(name_or_path) -> CharacterModel:
    """Load a character by file path or by built-in asset name."""
    p = Path(name_or_path)
    if p.suffix == ".json" and p.exists():
        return load_character(p)
    asset = resources.files("motionrl") / "assets" / "characters" / f"{name_or_path}.json"
    if asset.is_file():
        return character_from_dict(json.loads(asset.read_text()))
    if p.exists():
        return load_character(p)
    raise CharacterError(f"character {name_or_path!r}: no such file or built-in asset")


def make_planar_chain(
    num_links: int = 3,
    link_length: float = 0.4,
    link_mass: float = 1.0,
    root_fixed: bool = True,
    root_height: float = 0.0,
    kp: float = 60.0,
    kd: float = 6.0,
    torque_limit: float = 60.0,
    name: str | None = None,
) -> CharacterModel:
    """N-link serial chain of revolute-z joints in the x-y plane (y up)."""
    joints = []
    bodies = [BodySpec(name="base", mass=link_mass, inertia=0.02, size=(0.05, 0.05))]
    for i in range(num_links):
        joints.append(
            JointSpec(
                name=f"link{i}",
                kind="revolute",
                parent=i - 1,
                # first joint sits at the base origin, later ones at parent tip
                local_offset=(0.0, 0.0, 0.0) if i == 0 else (link_length, 0.0, 0.0),
                axis=(0.0, 0.0, 1.0),
                torque_limit=torque_limit,
                kp=kp,
                kd=kd,
            )
        )
        inertia = link_mass * link_length**2 / 12.0
        bodies.append(
            BodySpec(
                name=f"link{i}_body",
                mass=link_mass,
                inertia=inertia,
                size=(link_length, 0.04),
                com=(link_length / 2.0, 0.0, 0.0),
            )
        )
    return CharacterModel(
        name=name or f"chain{num_links}",
        joints=tuple(joints),
        bodies=tuple(bodies),
        up_axis="y",
        root_fixed=root_fixed,
        extras={"root_height": root_height},
    )


def make_pendulum(
    length: float = 1.0,
    mass: float = 1.0,
    kp: float = 40.0,
    kd: float = 4.0,
    torque_limit: float = 25.0,
) -> CharacterModel:
    """Single revolute-z link hanging from a welded base; angle 0 = down.

    The link's local x axis points along the rod toward the tip, so the
    rest pose (angle 0) aligned with -y means the joint zero is rotated;
    instead we point the rod along -y at angle 0 by giving the body its
    geometry along x and mounting the joint with zero offset: dynamics
    only see masses/inertias/COM, so the convention is set here by the
    COM direction. Angle is measured from straight down, CCW positive.
    """
    inertia = mass * length**2 / 12.0
    joints = (
        JointSpec(
            name="hinge",
            kind="revolute",
            parent=-1,
            local_offset=(0.0, 0.0, 0.0),
            axis=(0.0, 0.0, 1.0),
            torque_limit=torque_limit,
            kp=kp,
            kd=kd,
        ),
    )
    bodies = (
        BodySpec(name="base", mass=1.0, inertia=0.01, size=(0.05, 0.05)),
        BodySpec(
            name="rod",
            mass=mass,
            inertia=inertia,
            size=(length, 0.03),
            com=(0.0, -length / 2.0, 0.0),
        ),
    )
    return CharacterModel(
        name="pendulum",
        joints=joints,
        bodies=bodies,
        up_axis="y",
        root_fixed=True,
        extras={"root_height": 1.5},
    )
