"""Checkpoint file IO.

A checkpoint file holds a dict with a num_workers header and one state
payload per worker (see Agent.state).  Worker 0's payload carries the model;
replicas are bit-identical, so evaluation always loads worker 0.
"""

from __future__ import annotations

from pathlib import Path

import torch

from .agents import CheckpointError


def save_checkpoint(path: str | Path, payload: dict) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    torch.save(payload, tmp)
    tmp.replace(path)


def load_checkpoint(path: str | Path) -> dict:
    path = Path(path)
    if not path.exists():
        raise CheckpointError(f"checkpoint file not found: {path}")
    payload = torch.load(path, map_location="cpu", weights_only=False)
    if not isinstance(payload, dict) or "workers" not in payload:
        raise CheckpointError(f"{path} is not a checkpoint file")
    return payload
