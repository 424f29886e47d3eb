"""Figure renderers for specbatch result files.

Every annotation that could be precomputed upstream (optimum markers, fitted
curves) is recomputed here from the data in the input files, so a figure can
never disagree with the numbers it displays.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
# stable glyph ids make SVG output byte-reproducible
matplotlib.rcParams["svg.hashsalt"] = "specbatch"

import matplotlib.pyplot as plt
import numpy as np

from .io import SchemaError, read_csv, require_columns

POLICY_ORDER = ["none", "fixed-2", "fixed-4", "adaptive"]


def _save(fig, out_path) -> Path:
    out = Path(out_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    metadata = {"Date": None} if out.suffix == ".svg" else {}
    fig.savefig(out, dpi=120, metadata=metadata)
    plt.close(fig)
    return out


def _policy_sort_key(label: str):
    return (POLICY_ORDER.index(label) if label in POLICY_ORDER else len(POLICY_ORDER), label)


def sweep_argmin(rows: list[dict]) -> dict[int, int]:
    """Per-batch-size optimum recomputed from the latency cells, ignoring
    any precomputed marker column. Ties go to the smaller s."""
    best: dict[int, tuple[float, int]] = {}
    for row in rows:
        b, s = int(row["batch_size"]), int(row["spec_len"])
        cell = (float(row["per_token_ms"]), s)
        if b not in best or cell < best[b]:
            best[b] = cell
    return {b: s for b, (_, s) in best.items()}


def render_heatmap(sweep_csv, out_path) -> Path:
    """Per-token latency over the (batch size, speculation length) grid with
    one marker per row at its recomputed minimum."""
    _, rows = read_csv(sweep_csv)
    require_columns(rows, ["batch_size", "spec_len", "per_token_ms"], sweep_csv)
    sizes = sorted({int(r["batch_size"]) for r in rows})
    s_vals = sorted({int(r["spec_len"]) for r in rows})
    grid = np.full((len(sizes), len(s_vals)), np.nan)
    for row in rows:
        i = sizes.index(int(row["batch_size"]))
        j = s_vals.index(int(row["spec_len"]))
        grid[i, j] = float(row["per_token_ms"])
    argmin = sweep_argmin(rows)

    fig, ax = plt.subplots(figsize=(1.0 + 0.7 * len(s_vals), 1.0 + 0.5 * len(sizes)))
    im = ax.imshow(grid, aspect="auto", cmap="viridis")
    for i, b in enumerate(sizes):
        ax.plot(s_vals.index(argmin[b]), i, marker="*", markersize=14,
                color="white", markeredgecolor="black")
    ax.set_xticks(range(len(s_vals)), [str(s) for s in s_vals])
    ax.set_yticks(range(len(sizes)), [str(b) for b in sizes])
    ax.set_xlabel("speculation length s")
    ax.set_ylabel("batch size b")
    ax.set_title("per-token latency (ms); star = per-row optimum")
    fig.colorbar(im, ax=ax, label="ms/token")
    fig.tight_layout()
    return _save(fig, out_path)


def render_acceptance(trace_csv, out_path, fit: tuple[float, float] | None = None) -> Path:
    """Censored-mean acceptance points l(s) with a power-law overlay. The
    points are recomputed from the raw trace; the curve comes from a
    calibration file when given, else from a log-log fit of the points."""
    meta, rows = read_csv(trace_csv)
    require_columns(rows, ["correct_tokens"], trace_csv)
    samples = np.array([int(r["correct_tokens"]) for r in rows])
    horizon = int(meta.get("horizon", samples.max(initial=1)))
    s_vals = np.arange(1, min(horizon, 8) + 1)
    points = np.array([np.minimum(samples, s).mean() for s in s_vals])
    if fit is None:
        mask = points > 0
        gamma, logc = np.polyfit(np.log(s_vals[mask]), np.log(points[mask]), 1)
        c = float(np.exp(logc))
    else:
        c, gamma = fit

    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.plot(s_vals, points, "o", label="measured l(s)")
    dense = np.linspace(s_vals[0], s_vals[-1], 200)
    ax.plot(dense, c * dense**gamma, "-", color="tab:orange",
            label=f"{c:.3g} s^{gamma:.3g}")
    ax.set_xlabel("speculation length s")
    ax.set_ylabel("expected accepted tokens")
    ax.legend()
    fig.tight_layout()
    return _save(fig, out_path)


def render_steptime(samples_csv, out_path) -> Path:
    """Measured LLM step time versus query length, one line per batch size."""
    _, rows = read_csv(samples_csv)
    require_columns(rows, ["batch_size", "query_len", "time_ms"], samples_csv)
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for b in sorted({int(r["batch_size"]) for r in rows}):
        pts = sorted(
            (int(r["query_len"]), float(r["time_ms"]))
            for r in rows if int(r["batch_size"]) == b
        )
        ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o", label=f"b={b}")
    ax.set_xlabel("query length (tokens per step)")
    ax.set_ylabel("step time (ms)")
    ax.legend()
    fig.tight_layout()
    return _save(fig, out_path)


def render_uniform(uniform_csv, out_path) -> Path:
    """Normalized latency bars per batch size, grouped by policy."""
    _, rows = read_csv(uniform_csv)
    require_columns(rows, ["batch_size", "policy", "normalized_latency"], uniform_csv)
    sizes = sorted({int(r["batch_size"]) for r in rows})
    policies = sorted({r["policy"] for r in rows}, key=_policy_sort_key)
    fig, ax = plt.subplots(figsize=(1.5 + 0.8 * len(sizes), 3.5))
    width = 0.8 / len(policies)
    x = np.arange(len(sizes))
    for k, policy in enumerate(policies):
        vals = [
            float(r["normalized_latency"])
            for b in sizes for r in rows
            if int(r["batch_size"]) == b and r["policy"] == policy
        ]
        ax.bar(x + (k - (len(policies) - 1) / 2) * width, vals, width, label=policy)
    ax.axhline(1.0, color="gray", lw=0.8, ls="--")
    ax.set_xticks(x, [str(b) for b in sizes])
    ax.set_xlabel("batch size")
    ax.set_ylabel("latency / no-speculation baseline")
    ax.legend()
    fig.tight_layout()
    return _save(fig, out_path)


def render_dynamic(dynamic_csv, out_path) -> Path:
    """Average latency versus arrival interval, one panel per CV, one line
    per policy."""
    _, rows = read_csv(dynamic_csv)
    require_columns(rows, ["interval_s", "cv", "policy", "avg_latency_s"], dynamic_csv)
    cvs = sorted({float(r["cv"]) for r in rows})
    policies = sorted({r["policy"] for r in rows}, key=_policy_sort_key)
    fig, axes = plt.subplots(
        1, len(cvs), figsize=(3.2 * len(cvs), 3.2), sharey=True, squeeze=False
    )
    for ax, cv in zip(axes[0], cvs):
        for policy in policies:
            pts = sorted(
                (float(r["interval_s"]), float(r["avg_latency_s"]))
                for r in rows if float(r["cv"]) == cv and r["policy"] == policy
            )
            ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o", label=policy)
        ax.set_title(f"CV = {cv:g}")
        ax.set_xlabel("mean arrival interval (s)")
    axes[0][0].set_ylabel("average latency (s)")
    axes[0][-1].legend()
    fig.tight_layout()
    return _save(fig, out_path)


def render_timeline(timeline_csvs, out_path, phase_duration: float = 50.0) -> Path:
    """Group-latency timelines for several policies on one axis, with
    alternating phases shaded every phase_duration seconds."""
    series = []
    t_max = 0.0
    for path in timeline_csvs:
        _, rows = read_csv(path)
        require_columns(rows, ["group_start_s", "avg_latency_s"], path)
        ts = [float(r["group_start_s"]) for r in rows]
        lats = [float(r["avg_latency_s"]) for r in rows]
        label = Path(path).stem.replace("timeline_", "")
        series.append((label, ts, lats))
        t_max = max(t_max, max(ts))
    series.sort(key=lambda item: _policy_sort_key(item[0]))

    fig, ax = plt.subplots(figsize=(7, 3.5))
    edge = 0.0
    k = 0
    while edge < t_max:
        if k % 2 == 0:
            ax.axvspan(edge, edge + phase_duration, color="gray", alpha=0.12, lw=0)
        edge += phase_duration
        k += 1
    for label, ts, lats in series:
        ax.plot(ts, lats, marker=".", label=label)
    ax.set_xlabel("time (s); shaded spans are intense phases")
    ax.set_ylabel("group average latency (s)")
    ax.legend()
    fig.tight_layout()
    return _save(fig, out_path)
