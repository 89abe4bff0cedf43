"""Render sweep results as figures saved next to the data files."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .sweep import LOSS_EXPERIMENTS, MISMATCH_EXPERIMENTS, SweepResult


def render_figure(result: SweepResult, path: str) -> str:
    """Plot a sweep result to `path` (PNG); returns the path written."""
    if result.config.experiment in LOSS_EXPERIMENTS:
        fig = _loss_figure(result)
    elif result.config.experiment in MISMATCH_EXPERIMENTS:
        fig = _mismatch_figure(result)
    else:
        raise ValueError(f"no figure defined for experiment {result.config.experiment!r}")
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def _series(records, key_field, x_field, y_field):
    by_key: dict = {}
    for rec in records:
        by_key.setdefault(rec[key_field], []).append((rec[x_field], rec[y_field]))
    for pts in by_key.values():
        pts.sort()
    return by_key


def _loss_figure(result: SweepResult):
    recs = result.records
    sweep_switch = len({r["eta_s"] for r in recs}) > 1
    x_field = "eta_s" if sweep_switch else "eta_f"
    key_field = "eta_f" if sweep_switch else "m"
    x_label = "switch efficiency" if sweep_switch else "loop efficiency"
    key_label = "eta_f" if sweep_switch else "m"

    fig, (ax_s, ax_p) = plt.subplots(2, 1, figsize=(6.0, 7.0), sharex=True)
    for key, pts in sorted(_series(recs, key_field, x_field, "s_max").items()):
        ax_s.plot(*zip(*pts), marker="o", label=f"{key_label}={key}")
    for key, pts in sorted(_series(recs, key_field, x_field, "p_s_at_best").items()):
        ax_p.plot(*zip(*pts), marker="o", label=f"{key_label}={key}")
    ax_s.set_ylabel("best similarity")
    ax_p.set_ylabel("post-selection probability")
    ax_p.set_xlabel(x_label)
    for ax in (ax_s, ax_p):
        ax.grid(True, alpha=0.4)
        ax.legend(fontsize=8)
    fig.suptitle(f"{result.config.experiment} (seed {result.config.master_seed})")
    fig.tight_layout()
    return fig


def _mismatch_figure(result: SweepResult):
    recs = result.records
    jitter = result.config.experiment == "jitter-sigma"
    x_field = "sigma_over_width" if jitter else "delta_over_width"
    x_label = ("jitter sigma" if jitter else "loop length error") + " / width"

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for m, pts in sorted(_series(recs, "m", x_field, "f_mean").items()):
        xs, ys = zip(*pts)
        ax.plot(xs, ys, marker="o", label=f"m={m}")
        lo = dict(_series([r for r in recs if r["m"] == m], "m", x_field, "f_min"))[m]
        hi = dict(_series([r for r in recs if r["m"] == m], "m", x_field, "f_max"))[m]
        ax.fill_between(xs, [y for _, y in lo], [y for _, y in hi], alpha=0.15)
    ax.set_xlabel(x_label)
    ax.set_ylabel("fidelity (mean, min-max band)")
    ax.grid(True, alpha=0.4)
    ax.legend(fontsize=8)
    fig.suptitle(f"{result.config.experiment} (seed {result.config.master_seed})")
    fig.tight_layout()
    return fig
