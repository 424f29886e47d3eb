"""Discrete-event simulation of the serving loop.

One server drains a FIFO queue. Whenever it is idle and requests are
waiting, it merges up to max_batch of them, asks the policy for a
speculation length given the formed batch size, and runs the batch to
completion (non-preemptive). Latency is finish minus arrival, so queueing
delay is included.
"""

from __future__ import annotations

import csv
import json
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .acceptance import AcceptanceTrace
from .cost_model import LinearStepModel
from .engine import SequenceState, TraceSampler, run_batch
from .traffic import Request

__all__ = [
    "ServerConfig",
    "RequestRecord",
    "SimulationReport",
    "run_simulation",
    "form_batch",
    "summarize",
    "save_records",
    "save_report",
]

MS_PER_S = 1000.0


@dataclass(frozen=True)
class ServerConfig:
    policy: object  # anything with .decide(batch_size) -> PolicyDecision and .label
    max_batch: int = 16
    seed: int = 0

    def __post_init__(self):
        if self.max_batch < 1:
            raise ValueError(f"max_batch must be >= 1, got {self.max_batch}")


@dataclass(frozen=True)
class RequestRecord:
    request_id: int
    t_a: float
    t_start: float
    t_b: float
    latency: float
    served_batch_size: int
    used_s: int


@dataclass(frozen=True)
class SimulationReport:
    records: tuple[RequestRecord, ...]
    avg_latency: float
    timeline: tuple[tuple[float, float], ...]
    policy: str
    seed: int = 0


def form_batch(queue: deque, max_batch: int) -> list[Request]:
    """Dequeue the first min(len, max_batch) requests in arrival order."""
    if not queue:
        raise ValueError("form_batch on an empty queue")
    return [queue.popleft() for _ in range(min(len(queue), max_batch))]


def run_simulation(
    workload: list[Request],
    server: ServerConfig,
    calibration: LinearStepModel,
    trace: AcceptanceTrace,
    rng: np.random.Generator,
    group_size: int = 40,
) -> SimulationReport:
    """Serve the workload and record per-request latency.

    The event loop alternates between pulling arrivals that have occurred
    by the current virtual time and serving one batch; the server is never
    idle while the queue is non-empty.
    """
    for a, b in zip(workload, workload[1:]):
        if b.arrival < a.arrival:
            raise ValueError("workload must be sorted by arrival time")

    oracle = TraceSampler(trace)
    queue: deque[Request] = deque()
    records: list[RequestRecord] = []
    now = 0.0
    i = 0
    n = len(workload)
    while i < n or queue:
        if not queue:
            # jump to the next arrival
            now = max(now, workload[i].arrival)
        while i < n and workload[i].arrival <= now:
            queue.append(workload[i])
            i += 1
        if not queue:
            continue
        batch = form_batch(queue, server.max_batch)
        decision = server.policy.decide(len(batch))
        states = [SequenceState(request_id=r.id, target_len=r.gen_len) for r in batch]
        result = run_batch(states, decision.chosen_s, calibration, oracle, rng)
        for r in batch:
            t_b = now + result.per_sequence_finish[r.id] / MS_PER_S
            records.append(
                RequestRecord(
                    request_id=r.id,
                    t_a=r.arrival,
                    t_start=now,
                    t_b=t_b,
                    latency=t_b - r.arrival,
                    served_batch_size=len(batch),
                    used_s=decision.chosen_s,
                )
            )
        now += result.total_time / MS_PER_S
    return summarize(records, group_size=group_size, policy=server.policy.label, seed=server.seed)


def summarize(
    records: list[RequestRecord], group_size: int = 40, policy: str = "", seed: int = 0
) -> SimulationReport:
    """Aggregate records into a global mean and a group-of-``group_size``
    timeline stamped by each group's first arrival."""
    if not records:
        raise ValueError("no records to summarize")
    ordered = sorted(records, key=lambda r: (r.t_a, r.request_id))
    timeline = []
    for start in range(0, len(ordered), group_size):
        group = ordered[start : start + group_size]
        timeline.append(
            (group[0].t_a, sum(r.latency for r in group) / len(group))
        )
    avg = sum(r.latency for r in ordered) / len(ordered)
    return SimulationReport(
        records=tuple(ordered),
        avg_latency=avg,
        timeline=tuple(timeline),
        policy=policy,
        seed=seed,
    )


# -- result file I/O ---------------------------------------------------------

def save_records(report: SimulationReport, path) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(
            ["request_id", "t_a_s", "t_start_s", "t_b_s", "latency_s", "batch_size", "spec_len", "policy"]
        )
        for r in report.records:
            writer.writerow(
                [
                    r.request_id,
                    f"{r.t_a:.9f}",
                    f"{r.t_start:.9f}",
                    f"{r.t_b:.9f}",
                    f"{r.latency:.9f}",
                    r.served_batch_size,
                    r.used_s,
                    report.policy,
                ]
            )


def save_report(report: SimulationReport, path) -> None:
    doc = {
        "policy": report.policy,
        "seed": report.seed,
        "avg_latency_s": round(report.avg_latency, 9),
        "timeline": [[round(t, 9), round(lat, 9)] for t, lat in report.timeline],
    }
    with open(path, "w") as f:
        json.dump(doc, f, indent=2, sort_keys=True)
        f.write("\n")
