"""Command-line entry points for training, testing, and log plotting."""

from .args import ArgsError, RunArgs, parse_args, render_args

__all__ = ["ArgsError", "RunArgs", "parse_args", "render_args"]
