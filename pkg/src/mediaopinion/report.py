"""Static figures and tables summarizing a pipeline run."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import pandas as pd  # noqa: E402

from .exceptions import DataError  # noqa: E402
from .io import write_csv  # noqa: E402
from .topics import TOPICS  # noqa: E402

_RC = {"svg.hashsalt": "mediaopinion", "svg.fonttype": "none"}


def _save(fig, path):
    with matplotlib.rc_context(_RC):
        fig.savefig(path, format="svg", metadata={"Date": None, "Creator": None})
    plt.close(fig)


def plot_opinion(opinion: pd.DataFrame, path):
    fig, ax = plt.subplots(figsize=(8, 3.5))
    ax.fill_between(opinion["year"], opinion["ci_low"], opinion["ci_high"],
                    color="0.85", label="95% interval")
    ax.plot(opinion["year"], opinion["mu"], color="k", marker="o", ms=3, label="opinion")
    ax.axhline(0, color="0.5", lw=0.8, ls=":")
    ax.set_xlabel("year")
    ax.set_ylabel("opinion relative to baseline")
    ax.legend(frameon=False)
    _save(fig, path)


def plot_volumes(series: pd.DataFrame, path):
    fig, axes = plt.subplots(4, 2, figsize=(10, 10), sharex=True)
    for ax, topic in zip(axes.flat, TOPICS):
        part = series[series["topic"] == topic.value]
        ax.bar(part["year"], part["n_positive"], color="tab:blue", label="positive")
        ax.bar(part["year"], part["n_negative"], bottom=part["n_positive"],
               color="tab:red", label="negative")
        ax.set_title(topic.value, fontsize=9)
    axes.flat[0].legend(frameon=False, fontsize=8)
    fig.tight_layout()
    _save(fig, path)


def plot_fractions(series: pd.DataFrame, path):
    fig, axes = plt.subplots(4, 2, figsize=(10, 10), sharex=True, sharey=True)
    for ax, topic in zip(axes.flat, TOPICS):
        part = series[series["topic"] == topic.value]
        for sign, color in (("positive", "tab:blue"), ("negative", "tab:red")):
            f, se = part[f"f_{sign}"], part[f"se_{sign}"]
            ax.plot(part["year"], f, color=color, label=sign)
            ax.fill_between(part["year"], f - se, f + se, color=color, alpha=0.2)
        ax.set_title(topic.value, fontsize=9)
    axes.flat[0].legend(frameon=False, fontsize=8)
    fig.tight_layout()
    _save(fig, path)


def plot_fit(predictions: pd.DataFrame, path):
    fig, ax = plt.subplots(figsize=(8, 3.5))
    ax.plot(predictions["year"], predictions["actual"], color="k", label="opinion")
    ax.plot(predictions["year"], predictions["predicted"], color="tab:blue", ls="--",
            label="predicted")
    ax.set_xlabel("year")
    ax.legend(frameon=False)
    _save(fig, path)


def write_report(directory, opinion, series, predictions, table) -> list:
    """Write the four figures, their data and the nested-model table.

    Returns the written paths.
    """
    if series["year"].nunique() < 2 or opinion["year"].nunique() < 2:
        raise DataError("need >= 2 years for series plots")
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    jobs = [
        ("opinion", plot_opinion, opinion),
        ("volumes", plot_volumes, series[["topic", "year", "n_total", "n_positive", "n_negative"]]),
        ("fractions", plot_fractions,
         series[["topic", "year", "f_positive", "f_negative", "se_positive", "se_negative"]]),
        ("fit", plot_fit, predictions.dropna(subset=["actual"])),
    ]
    for name, plot, data in jobs:
        write_csv(directory / f"{name}.csv", data)
        plot(data, directory / f"{name}.svg")
        written += [directory / f"{name}.csv", directory / f"{name}.svg"]
    write_csv(directory / "nested_models.csv", table, index=True)
    written.append(directory / "nested_models.csv")
    return written
