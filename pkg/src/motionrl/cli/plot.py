"""Training-log plotting: one SVG line chart per logged statistic.

Logs whose filenames differ only by a trailing ``_seed<k>`` (or ``-seed<k>``)
are grouped: the chart shows the group's mean with a min/max band across
seeds at aligned sample counts, one series per group.
"""

from __future__ import annotations

import argparse
import csv
import re
import sys
from pathlib import Path

import numpy as np


class LogFormatError(ValueError):
    """Raised for unreadable or malformed log CSVs."""


def read_log(path: str | Path) -> dict[str, np.ndarray]:
    """Read a training-log CSV into per-column float arrays."""
    path = Path(path)
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None:
            raise LogFormatError(f"{path}: log file is empty")
        columns: list[list[float]] = [[] for _ in header]
        for row in reader:
            if len(row) != len(header):
                raise LogFormatError(
                    f"{path}:{reader.line_num}: expected {len(header)} fields, got {len(row)}"
                )
            for i, cell in enumerate(row):
                try:
                    columns[i].append(float(cell))
                except ValueError:
                    raise LogFormatError(
                        f"{path}:{reader.line_num}: {header[i]!r} value {cell!r} is not a number"
                    ) from None
    if not columns[0]:
        raise LogFormatError(f"{path}: log file has a header but no rows")
    return {name: np.array(vals) for name, vals in zip(header, columns)}


def group_label(path: str | Path) -> str:
    return re.sub(r"[_-]seed\d+$", "", Path(path).stem)


def _grouped(paths) -> dict[str, list[dict]]:
    groups: dict[str, list[dict]] = {}
    for p in paths:
        log = read_log(p)
        if "samples" not in log:
            raise LogFormatError(f"{p}: log has no 'samples' column to plot against")
        groups.setdefault(group_label(p), []).append(log)
    return groups


def _aligned(logs: list[dict], stat: str):
    """Truncate a seed group to its shortest log; returns (samples, values)."""
    n = min(len(log[stat]) for log in logs)
    samples = logs[0]["samples"][:n]
    for log in logs[1:]:
        if not np.allclose(log["samples"][:n], samples):
            raise LogFormatError(
                "grouped logs disagree on sample counts; were they run with "
                "the same config?"
            )
    return samples, np.stack([log[stat][:n] for log in logs])


def plot_logs(paths, out_dir: str | Path) -> list[Path]:
    """Write one SVG per statistic shared by the given logs."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    groups = _grouped(paths)
    first = next(iter(groups.values()))[0]
    skip = {"iteration", "samples"}
    stats = [c for c in first if c not in skip]
    stats = [s for s in stats if all(s in log for logs in groups.values() for log in logs)]
    if not stats:
        raise LogFormatError("logs share no plottable statistics")

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    for stat in stats:
        fig, ax = plt.subplots(figsize=(6, 4))
        for label, logs in sorted(groups.items()):
            samples, values = _aligned(logs, stat)
            mean = values.mean(axis=0)
            (line,) = ax.plot(samples, mean, label=label)
            if len(logs) > 1:
                ax.fill_between(
                    samples, values.min(axis=0), values.max(axis=0),
                    alpha=0.2, color=line.get_color(),
                )
        ax.set_xlabel("samples")
        ax.set_ylabel(stat)
        ax.legend()
        fig.tight_layout()
        out_path = out_dir / (re.sub(r"[^A-Za-z0-9_.-]", "_", stat) + ".svg")
        fig.savefig(out_path)
        plt.close(fig)
        written.append(out_path)
    return written


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="motionrl-plot", description="Plot training-log CSVs as SVG charts."
    )
    parser.add_argument("logs", nargs="+", help="log CSV files")
    parser.add_argument("--out", default="plots", help="output directory (default: plots)")
    opts = parser.parse_args(argv)
    try:
        written = plot_logs(opts.logs, opts.out)
    except (LogFormatError, FileNotFoundError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    for path in written:
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
