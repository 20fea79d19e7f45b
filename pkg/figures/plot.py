#!/usr/bin/env python3
"""Render solver output files as figures.

Usage: plot.py <solution.csv|history.csv> -o OUT

A solution file (columns t, u, w, phi, ...) becomes an overlay of the primal
control (solid), the dual (dashed) and the operator fixed point (dotted).  A
history file (columns k, residual_linf, ...) becomes a log-scale residual
curve.  The file kind is detected from the header; rendering is headless.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt


def read_table(path: Path) -> dict[str, list[float]]:
    """Parse a CSV written by the solver, skipping '#' metadata lines."""
    lines = [ln.strip() for ln in path.read_text(encoding="utf-8").splitlines()
             if ln.strip() and not ln.startswith("#")]
    if not lines:
        raise SystemExit(f"error: {path} is empty")
    header = lines[0].split(",")
    columns: dict[str, list[float]] = {name: [] for name in header}
    for line in lines[1:]:
        parts = line.split(",")
        if len(parts) != len(header):
            raise SystemExit(f"error: {path} has a malformed row")
        for name, value in zip(header, parts):
            columns[name].append(float(value))
    return columns


def require_columns(table: dict, names: list[str], path: Path) -> None:
    for name in names:
        if name not in table:
            raise SystemExit(f"error: {path} is missing column {name}")


def plot_duality(table: dict) -> plt.Figure:
    """Overlay of primal control, dual, and fixed point over time."""
    fig, ax = plt.subplots(figsize=(8, 5))
    t = table["t"]
    ax.plot(t, table["u"], "-", color="tab:blue", linewidth=1.8, label="u")
    ax.plot(t, table["w"], "--", color="tab:orange", linewidth=1.8, label="w")
    ax.plot(t, table["phi"], ":", color="gold", linewidth=2.2, label="phi")
    ax.set_xlabel("t")
    ax.set_ylabel("signal value")
    ax.legend(loc="best")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    return fig


def plot_history(table: dict) -> plt.Figure:
    """Stopping-rule residual per iteration on a log scale."""
    fig, ax = plt.subplots(figsize=(8, 5))
    ax.semilogy(table["k"], table["residual_linf"], "-", color="tab:blue",
                marker="." if len(table["k"]) < 40 else None)
    ax.set_xlabel("k")
    ax.set_ylabel("residual (sup norm)")
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    return fig


def render(path: Path) -> plt.Figure:
    table = read_table(path)
    if "t" in table:
        require_columns(table, ["u", "w", "phi"], path)
        return plot_duality(table)
    if "k" in table:
        require_columns(table, ["residual_linf"], path)
        return plot_history(table)
    raise SystemExit(f"error: {path} has neither a 't' nor a 'k' column")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("csv", help="solution.csv or history.csv from the solver")
    parser.add_argument("-o", "--out", required=True, help="output image path")
    args = parser.parse_args(argv)

    path = Path(args.csv)
    if not path.exists():
        print(f"error: no such file {path}", file=sys.stderr)
        return 2
    fig = render(path)
    fig.savefig(args.out, dpi=150)
    plt.close(fig)
    return 0


if __name__ == "__main__":
    sys.exit(main())
