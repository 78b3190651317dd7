"""Run-argument parsing with arg-file support.

Arguments are ``--key value`` pairs. When ``--arg_file`` names a file, the
file's tokens are parsed first and any keys given on the command line
override them individually, so an arg file acts as a reusable base config.
Lines in an arg file may carry ``#`` comments.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from pathlib import Path


class ArgsError(ValueError):
    """Raised for malformed or inconsistent command-line arguments."""


MODES = ("train", "test")
LOGGERS = ("csv", "tb", "wandb")

_TRUE = {"true", "1", "yes", "on"}
_FALSE = {"false", "0", "no", "off"}


def _parse_bool(key: str, value: str) -> bool:
    low = value.lower()
    if low in _TRUE:
        return True
    if low in _FALSE:
        return False
    raise ArgsError(f"--{key} expects true/false, got {value!r}")


@dataclass
class RunArgs:
    """Everything a train or test run needs from the command line."""

    mode: str = "train"
    env_config: str | None = None
    agent_config: str | None = None
    num_envs: int = 16
    num_workers: int = 1
    seed: int = 0
    device: str = "cpu"
    logger: str = "csv"
    log_file: str = "output/log.txt"
    out_model_file: str = "output/model.pt"
    model_file: str | None = None
    visualize: bool = False
    arg_file: str | None = None


VALID_KEYS = tuple(f.name for f in fields(RunArgs))

_INT_KEYS = ("num_envs", "num_workers", "seed")
_BOOL_KEYS = ("visualize",)


def _convert(key: str, value: str):
    if key in _INT_KEYS:
        try:
            return int(value)
        except ValueError:
            raise ArgsError(f"--{key} expects an integer, got {value!r}") from None
    if key in _BOOL_KEYS:
        return _parse_bool(key, value)
    return value


def _collect_pairs(tokens: list[str], source: str) -> dict[str, str]:
    """Pair up ``--key value`` tokens; later duplicates win."""
    pairs: dict[str, str] = {}
    i = 0
    while i < len(tokens):
        token = tokens[i]
        if not token.startswith("--"):
            raise ArgsError(f"{source}: expected --key, got {token!r}")
        key = token[2:]
        if key not in VALID_KEYS:
            raise ArgsError(
                f"{source}: unknown argument --{key}; valid arguments are "
                + ", ".join(f"--{k}" for k in VALID_KEYS)
            )
        if i + 1 >= len(tokens) or tokens[i + 1].startswith("--"):
            raise ArgsError(f"{source}: --{key} is missing a value")
        pairs[key] = tokens[i + 1]
        i += 2
    return pairs


def _tokenize_arg_file(path: Path) -> list[str]:
    tokens: list[str] = []
    for line in path.read_text().splitlines():
        text = line.split("#", 1)[0]
        tokens.extend(text.split())
    return tokens


def parse_args(tokens: list[str]) -> RunArgs:
    """Parse command-line tokens (plus any arg file they reference)."""
    cli_pairs = _collect_pairs(list(tokens), "command line")

    pairs = dict(cli_pairs)
    if "arg_file" in cli_pairs:
        path = Path(cli_pairs["arg_file"])
        if not path.exists():
            raise ArgsError(f"arg file not found: {path}")
        file_pairs = _collect_pairs(_tokenize_arg_file(path), str(path))
        if "arg_file" in file_pairs:
            raise ArgsError(f"{path}: arg files cannot reference other arg files")
        pairs = {**file_pairs, **cli_pairs}

    args = RunArgs()
    for key, raw in pairs.items():
        setattr(args, key, _convert(key, raw))

    if args.mode not in MODES:
        raise ArgsError(f"--mode must be one of {MODES}, got {args.mode!r}")
    if args.logger not in LOGGERS:
        raise ArgsError(f"--logger must be one of {LOGGERS}, got {args.logger!r}")
    if args.num_envs < 1:
        raise ArgsError("--num_envs must be >= 1")
    if args.num_workers < 1:
        raise ArgsError("--num_workers must be >= 1")
    if args.env_config is None:
        raise ArgsError("--env_config is required")
    if args.mode == "train" and args.agent_config is None:
        raise ArgsError("--agent_config is required in train mode")
    if args.mode == "test" and args.model_file is None:
        raise ArgsError("--mode test requires --model_file")
    if args.mode == "test" and args.agent_config is None:
        raise ArgsError("--agent_config is required in test mode")
    return args


def render_args(args: RunArgs) -> list[str]:
    """Render args back to tokens; ``parse_args(render_args(a)) == a``."""
    tokens: list[str] = []
    for f in fields(RunArgs):
        value = getattr(args, f.name)
        if value is None:
            continue
        if isinstance(value, bool):
            value = "true" if value else "false"
        tokens.extend([f"--{f.name}", str(value)])
    return tokens
