"""Experiment orchestration: the sweep, uniform-traffic, dynamic-traffic,
and timeline experiments, plus LUT profiling and acceptance fitting.

Every output file embeds the seed and a hash of the effective config;
rerunning a command with the same config is byte-identical. Workloads are
generated once per cell and shared by all policies.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np

from .acceptance import AcceptanceTrace, estimate_expected_correct, fit_power_law, load_trace
from .cost_model import LinearStepModel, load_calibration, save_calibration
from .engine import SequenceState, TraceSampler, run_batch
from .errors import ConfigError
from .policy import AdaptivePolicy, SpeculationLUT, build_lut, fixed_policy, save_lut
from .presets import PRESET_NAME, example_calibration, example_fit, example_trace
from .simulator import ServerConfig, run_simulation, save_records, save_report
from .traffic import PhaseSchedule, TrafficConfig, gen_phased, gen_arrivals, save_workload

__all__ = [
    "ExperimentConfig",
    "cmd_sweep",
    "cmd_profile",
    "cmd_uniform",
    "cmd_dynamic",
    "cmd_timeline",
    "cmd_fit",
]


@dataclass
class ExperimentConfig:
    calibration: str = PRESET_NAME
    trace: str | None = None  # None -> shipped example trace
    sizes: tuple[int, ...] = (1, 2, 4, 8, 16, 32)
    s_grid: tuple[int, ...] = tuple(range(9))
    lut_mode: str = "analytic"
    profile_samples: int = 200
    requests: int = 1000
    gen_len: int = 128
    max_batch: int = 16
    intervals: tuple[float, ...] = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8)
    cvs: tuple[float, ...] = (0.5, 1.0, 2.0, 5.0)
    phase_duration: float = 50.0
    intense_interval: float = 0.2
    sparse_interval: float = 1.0
    n_phases: int = 6
    sweep_samples: int = 200
    seed: int = 0
    out_dir: str = "out"

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        try:
            doc = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(doc) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        for key in ("sizes", "s_grid", "intervals", "cvs"):
            if key in doc:
                doc[key] = tuple(doc[key])
        return cls(**doc)

    def config_hash(self) -> str:
        # where the results land does not change what they are
        doc = {k: v for k, v in asdict(self).items() if k != "out_dir"}
        canon = json.dumps(doc, sort_keys=True, default=list)
        return hashlib.sha256(canon.encode()).hexdigest()[:16]


def _load_inputs(cfg: ExperimentConfig):
    """Resolve the calibration model, power-law fit, and trace."""
    if cfg.calibration == PRESET_NAME:
        model, fit = example_calibration(), example_fit()
    else:
        model, fit = load_calibration(cfg.calibration)
    trace = example_trace() if cfg.trace is None else load_trace(cfg.trace)
    if fit is None:
        pts = [(s, estimate_expected_correct(trace, s))
               for s in range(1, min(trace.horizon, 8) + 1)]
        fit = fit_power_law(pts)
    return model, fit, trace


def _meta_lines(cfg: ExperimentConfig) -> list[str]:
    return [f"# seed={cfg.seed}", f"# config_hash={cfg.config_hash()}"]


def _write_csv(path: Path, cfg: ExperimentConfig, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="") as f:
        for line in _meta_lines(cfg):
            f.write(line + "\n")
        writer = csv.writer(f)
        writer.writerow(header)
        writer.writerows(rows)


def read_result_csv(path) -> list[dict]:
    """Read back a result CSV produced by this module, skipping metadata."""
    body = [ln for ln in Path(path).read_text().splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(body))


def _rng(cfg: ExperimentConfig, *ids: int) -> np.random.Generator:
    return np.random.default_rng([cfg.seed, *ids])


def _simulate_cell(model, trace, b, s, n_requests, gen_len, rng):
    """Average per-token latency over >= n_requests simulated requests."""
    oracle = TraceSampler(trace)
    n_batches = math.ceil(n_requests / b)
    total_ms = 0.0
    total_tokens = 0
    total_steps = 0
    for k in range(n_batches):
        states = [SequenceState(request_id=k * b + i, target_len=gen_len) for i in range(b)]
        res = run_batch(states, s, model, oracle, rng)
        total_ms += res.total_time
        total_tokens += res.tokens_generated
        total_steps += res.steps
    return total_steps, total_ms, total_tokens


def cmd_sweep(cfg: ExperimentConfig) -> Path:
    """Per-token latency over the (batch size, speculation length) grid,
    with the per-batch-size argmin marked."""
    model, _fit, trace = _load_inputs(cfg)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for bi, b in enumerate(sorted(cfg.sizes)):
        cells = []
        for s in sorted(cfg.s_grid):
            rng = _rng(cfg, 1, bi, s)
            steps, total_ms, tokens = _simulate_cell(
                model, trace, b, s, cfg.sweep_samples, cfg.gen_len, rng
            )
            cells.append((b, s, steps, total_ms, tokens, total_ms / tokens))
        best = min(range(len(cells)), key=lambda i: (cells[i][5], cells[i][1]))
        for i, (b_, s_, steps, total_ms, tokens, ptk) in enumerate(cells):
            rows.append(
                [b_, s_, steps, f"{total_ms:.6f}", tokens, f"{ptk:.9f}", int(i == best)]
            )
    path = out / "sweep.csv"
    _write_csv(path, cfg, ["batch_size", "spec_len", "steps", "total_ms", "tokens", "per_token_ms", "is_optimal"], rows)
    return path


def cmd_profile(cfg: ExperimentConfig) -> Path:
    """Build the speculation-length LUT and write it as CSV."""
    model, _fit, trace = _load_inputs(cfg)
    lut = build_lut(
        model,
        trace,
        s_grid=cfg.s_grid,
        profiled_sizes=cfg.sizes,
        mode=cfg.lut_mode,
        sample_size=cfg.profile_samples,
        rng=_rng(cfg, 2),
        gen_len=cfg.gen_len,
    )
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "lut.csv"
    save_lut(lut, path, seed=cfg.seed, calibration=cfg.calibration)
    return path


def _build_policies(cfg: ExperimentConfig, model, trace) -> list:
    lut = build_lut(
        model, trace, s_grid=cfg.s_grid, profiled_sizes=cfg.sizes,
        mode=cfg.lut_mode, sample_size=cfg.profile_samples,
        rng=_rng(cfg, 2), gen_len=cfg.gen_len,
    )
    return [fixed_policy(0), fixed_policy(2), fixed_policy(4), AdaptivePolicy(lut)]


def cmd_uniform(cfg: ExperimentConfig) -> Path:
    """End-to-end time for a fixed-batch-size workload, adaptive vs the
    no-speculation baseline, normalized to the baseline."""
    model, _fit, trace = _load_inputs(cfg)
    lut = build_lut(
        model, trace, s_grid=cfg.s_grid, profiled_sizes=cfg.sizes,
        mode=cfg.lut_mode, sample_size=cfg.profile_samples,
        rng=_rng(cfg, 2), gen_len=cfg.gen_len,
    )
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for bi, b in enumerate(sorted(cfg.sizes)):
        totals = {}
        for pi, policy in enumerate([fixed_policy(0), AdaptivePolicy(lut)]):
            s = policy.decide(b).chosen_s
            rng = _rng(cfg, 3, bi, pi)
            oracle = TraceSampler(trace)
            n_batches = math.ceil(cfg.requests / b)
            total_ms = 0.0
            for k in range(n_batches):
                n_seqs = min(b, cfg.requests - k * b)
                states = [
                    SequenceState(request_id=k * b + i, target_len=cfg.gen_len)
                    for i in range(n_seqs)
                ]
                total_ms += run_batch(states, s, model, oracle, rng).total_time
            totals[policy.label] = total_ms
        for label, total_ms in totals.items():
            rows.append(
                [b, label, f"{total_ms:.6f}", f"{total_ms / totals['none']:.9f}"]
            )
    path = out / "uniform.csv"
    _write_csv(path, cfg, ["batch_size", "policy", "total_ms", "normalized_latency"], rows)
    return path


def cmd_dynamic(cfg: ExperimentConfig) -> Path:
    """Average latency over the (interval, CV) traffic grid for the four
    comparison policies; each cell's workload is shared by all policies."""
    model, _fit, trace = _load_inputs(cfg)
    policies = _build_policies(cfg, model, trace)
    out = Path(cfg.out_dir)
    (out / "reports").mkdir(parents=True, exist_ok=True)
    rows = []
    for ii, interval in enumerate(cfg.intervals):
        for ci, cv in enumerate(cfg.cvs):
            workload = gen_arrivals(
                TrafficConfig(mean_interval=interval, cv=cv, count=cfg.requests),
                _rng(cfg, 4, ii, ci),
                gen_len=cfg.gen_len,
            )
            save_workload(workload, out / f"workload_i{ii}_cv{ci}.csv")
            for pi, policy in enumerate(policies):
                server = ServerConfig(policy=policy, max_batch=cfg.max_batch, seed=cfg.seed)
                report = run_simulation(
                    workload, server, model, trace, _rng(cfg, 5, ii, ci, pi)
                )
                save_report(report, out / "reports" / f"dynamic_i{ii}_cv{ci}_{policy.label}.json")
                rows.append(
                    [f"{interval:.3f}", f"{cv:.3f}", policy.label, f"{report.avg_latency:.9f}"]
                )
    path = out / "dynamic.csv"
    _write_csv(path, cfg, ["interval_s", "cv", "policy", "avg_latency_s"], rows)
    return path


def timeline_schedule(cfg: ExperimentConfig) -> PhaseSchedule:
    """Alternating intense/sparse phases at CV=1, starting intense."""
    phases = []
    for k in range(cfg.n_phases):
        interval = cfg.intense_interval if k % 2 == 0 else cfg.sparse_interval
        phases.append(
            (cfg.phase_duration, TrafficConfig(mean_interval=interval, cv=1.0, count=cfg.requests))
        )
    return PhaseSchedule(phases=tuple(phases))


def cmd_timeline(cfg: ExperimentConfig) -> Path:
    """Group-of-40 latency timeline under phase-switching traffic."""
    model, _fit, trace = _load_inputs(cfg)
    policies = _build_policies(cfg, model, trace)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    workload = gen_phased(timeline_schedule(cfg), _rng(cfg, 6), gen_len=cfg.gen_len)
    save_workload(workload, out / "workload_timeline.csv")
    summary_rows = []
    for pi, policy in enumerate(policies):
        server = ServerConfig(policy=policy, max_batch=cfg.max_batch, seed=cfg.seed)
        report = run_simulation(workload, server, model, trace, _rng(cfg, 7, pi))
        save_records(report, out / f"records_timeline_{policy.label}.csv")
        rows = [[f"{t:.9f}", f"{lat:.9f}"] for t, lat in report.timeline]
        _write_csv(out / f"timeline_{policy.label}.csv", cfg, ["group_start_s", "avg_latency_s"], rows)
        summary_rows.append([policy.label, f"{report.avg_latency:.9f}"])
    path = out / "timeline_summary.csv"
    _write_csv(path, cfg, ["policy", "avg_latency_s"], summary_rows)
    return path


def cmd_fit(cfg: ExperimentConfig) -> Path:
    """Fit the acceptance power law from the trace and write it into a
    calibration JSON in the output directory."""
    if cfg.calibration == PRESET_NAME:
        model = example_calibration()
    else:
        model, _ = load_calibration(cfg.calibration)
    trace = example_trace() if cfg.trace is None else load_trace(cfg.trace)
    pts = [(s, estimate_expected_correct(trace, s))
           for s in range(1, min(trace.horizon, 8) + 1)]
    fit = fit_power_law(pts)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "calibration.json"
    save_calibration(model, path, fit=fit)
    return path
