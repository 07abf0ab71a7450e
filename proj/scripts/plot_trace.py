#!/usr/bin/env python3
"""Plot a trace.csv or energy.csv written by the mfc CLI."""

import argparse
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd


def plot_trace(df, title, out):
    fig, axes = plt.subplots(3, 1, sharex=True, figsize=(8, 8))
    axes[0].plot(df.t, df.ystar, label="y*")
    axes[0].plot(df.t, df.y, label="y")
    axes[0].legend()
    axes[1].plot(df.t, df.u)
    axes[1].set_ylabel("u")
    axes[2].plot(df.t, df.alpha)
    axes[2].set_ylabel("alpha")
    axes[2].set_xlabel("t [s]")
    fig.suptitle(title)
    fig.savefig(out, dpi=120)


def plot_energy(df, title, out):
    fig, ax = plt.subplots(figsize=(8, 4))
    for method, g in df.groupby("method"):
        ax.plot(g.t, g.energy, label=method)
    ax.set_xlabel("t")
    ax.set_ylabel("energy")
    ax.legend()
    ax.set_title(title)
    fig.savefig(out, dpi=120)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("csv")
    ap.add_argument("-o", "--output", default="plot.png")
    args = ap.parse_args()

    df = pd.read_csv(args.csv, comment="#")
    if "energy" in df.columns:
        plot_energy(df, args.csv, args.output)
    elif {"t", "y", "ystar", "u", "alpha"} <= set(df.columns):
        plot_trace(df, args.csv, args.output)
    else:
        sys.exit(f"{args.csv}: not a trace or energy file")


if __name__ == "__main__":
    main()
