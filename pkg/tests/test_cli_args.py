"""Tests for run-argument parsing and arg-file layering."""

from __future__ import annotations

import pytest

from motionrl.cli.args import (
    VALID_KEYS,
    ArgsError,
    RunArgs,
    parse_args,
    render_args,
)

BASE = ["--env_config", "env.yaml", "--agent_config", "agent.yaml"]


def test_defaults_fill_unset_keys():
    args = parse_args(BASE)
    assert args.mode == "train"
    assert args.num_envs == 16
    assert args.num_workers == 1
    assert args.seed == 0
    assert args.device == "cpu"
    assert args.logger == "csv"
    assert args.log_file == "output/log.txt"
    assert args.out_model_file == "output/model.pt"
    assert args.model_file is None
    assert args.visualize is False
    assert args.arg_file is None


def test_explicit_values_and_types():
    args = parse_args(
        BASE
        + [
            "--num_envs", "64",
            "--seed", "3",
            "--visualize", "true",
            "--log_file", "runs/a/log.txt",
        ]
    )
    assert args.num_envs == 64
    assert isinstance(args.num_envs, int)
    assert args.seed == 3
    assert args.visualize is True
    assert args.log_file == "runs/a/log.txt"


def test_arg_file_provides_base_and_cli_overrides(tmp_path):
    arg_file = tmp_path / "train.txt"
    arg_file.write_text(
        "--env_config env.yaml  # the env\n"
        "--agent_config agent.yaml\n"
        "--num_envs 32\n"
        "--seed 11\n"
    )
    args = parse_args(["--arg_file", str(arg_file)])
    assert args.env_config == "env.yaml"
    assert args.num_envs == 32
    assert args.seed == 11

    # individual command-line keys override the file, others survive
    args = parse_args(["--arg_file", str(arg_file), "--seed", "99"])
    assert args.seed == 99
    assert args.num_envs == 32


def test_arg_file_comments_and_blank_lines(tmp_path):
    arg_file = tmp_path / "a.txt"
    arg_file.write_text(
        "# full-line comment\n"
        "\n"
        "--env_config env.yaml --agent_config agent.yaml\n"
        "--num_envs 8 # trailing comment\n"
    )
    args = parse_args(["--arg_file", str(arg_file)])
    assert args.num_envs == 8


def test_missing_arg_file_errors(tmp_path):
    with pytest.raises(ArgsError, match="not found"):
        parse_args(["--arg_file", str(tmp_path / "nope.txt")])


def test_nested_arg_files_rejected(tmp_path):
    inner = tmp_path / "inner.txt"
    inner.write_text("--seed 1\n")
    outer = tmp_path / "outer.txt"
    outer.write_text(f"--env_config env.yaml --arg_file {inner}\n")
    with pytest.raises(ArgsError, match="cannot reference"):
        parse_args(["--arg_file", str(outer)])


def test_unknown_key_lists_valid_arguments():
    with pytest.raises(ArgsError) as err:
        parse_args(BASE + ["--bogus", "1"])
    message = str(err.value)
    assert "--bogus" in message
    for key in VALID_KEYS:
        assert f"--{key}" in message


def test_missing_value_errors():
    with pytest.raises(ArgsError, match="missing a value"):
        parse_args(["--env_config"])
    with pytest.raises(ArgsError, match="missing a value"):
        parse_args(["--env_config", "--agent_config", "agent.yaml"])


def test_bare_token_errors():
    with pytest.raises(ArgsError, match="expected --key"):
        parse_args(["train"])


def test_type_validation():
    with pytest.raises(ArgsError, match="integer"):
        parse_args(BASE + ["--num_envs", "lots"])
    with pytest.raises(ArgsError, match="true/false"):
        parse_args(BASE + ["--visualize", "maybe"])
    with pytest.raises(ArgsError, match="mode"):
        parse_args(BASE + ["--mode", "demo"])
    with pytest.raises(ArgsError, match="logger"):
        parse_args(BASE + ["--logger", "stdout"])
    with pytest.raises(ArgsError, match="num_envs"):
        parse_args(BASE + ["--num_envs", "0"])
    with pytest.raises(ArgsError, match="num_workers"):
        parse_args(BASE + ["--num_workers", "-1"])


def test_required_keys_by_mode():
    with pytest.raises(ArgsError, match="env_config"):
        parse_args(["--agent_config", "agent.yaml"])
    with pytest.raises(ArgsError, match="agent_config"):
        parse_args(["--env_config", "env.yaml"])
    with pytest.raises(ArgsError, match="model_file"):
        parse_args(BASE + ["--mode", "test"])
    args = parse_args(BASE + ["--mode", "test", "--model_file", "m.pt"])
    assert args.mode == "test"


def test_duplicate_key_last_one_wins():
    args = parse_args(BASE + ["--seed", "1", "--seed", "2"])
    assert args.seed == 2


def test_render_parse_round_trip():
    args = parse_args(
        BASE
        + [
            "--mode", "test",
            "--model_file", "out/model.pt",
            "--num_envs", "4",
            "--visualize", "true",
            "--seed", "17",
        ]
    )
    rendered = render_args(args)
    assert parse_args(rendered) == args
    assert all(isinstance(t, str) for t in rendered)


def test_render_skips_unset_optionals():
    args = parse_args(BASE)
    rendered = render_args(args)
    assert "--model_file" not in rendered
    assert "--arg_file" not in rendered
    assert parse_args(rendered) == RunArgs(
        env_config="env.yaml", agent_config="agent.yaml"
    )
