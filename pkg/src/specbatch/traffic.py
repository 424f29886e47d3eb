"""Request arrival generation: Gamma inter-arrival times and phase schedules.

The two user-facing controls are the mean inter-arrival interval and its
coefficient of variation (CV); they map uniquely onto the Gamma shape
k = 1/CV^2 and scale theta = mean * CV^2.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "TrafficConfig",
    "PhaseSchedule",
    "Request",
    "gen_arrivals",
    "gen_phased",
    "save_workload",
    "load_workload",
]

DEFAULT_GEN_LEN = 128


@dataclass(frozen=True)
class TrafficConfig:
    mean_interval: float
    cv: float
    count: int

    def __post_init__(self):
        if self.mean_interval <= 0:
            raise ValueError(f"mean_interval must be > 0, got {self.mean_interval}")
        if self.cv <= 0:
            raise ValueError(f"cv must be > 0, got {self.cv}")
        if self.count < 0:
            raise ValueError(f"count must be >= 0, got {self.count}")

    @property
    def shape(self) -> float:
        return 1.0 / self.cv**2

    @property
    def scale(self) -> float:
        return self.mean_interval * self.cv**2


@dataclass(frozen=True)
class PhaseSchedule:
    """Ordered traffic phases; each phase runs for its duration, and its
    config's count caps how many requests it may emit."""

    phases: tuple[tuple[float, TrafficConfig], ...]

    def __post_init__(self):
        if not self.phases:
            raise ValueError("schedule needs at least one phase")
        for duration, _ in self.phases:
            if duration <= 0:
                raise ValueError(f"phase duration must be > 0, got {duration}")


@dataclass(frozen=True)
class Request:
    id: int
    arrival: float
    gen_len: int = DEFAULT_GEN_LEN

    def __post_init__(self):
        if self.arrival < 0:
            raise ValueError(f"arrival must be >= 0, got {self.arrival}")
        if self.gen_len < 1:
            raise ValueError(f"gen_len must be >= 1, got {self.gen_len}")


def gen_arrivals(
    config: TrafficConfig,
    rng: np.random.Generator,
    start: float = 0.0,
    id_start: int = 0,
    gen_len: int = DEFAULT_GEN_LEN,
) -> list[Request]:
    """Generate ``config.count`` requests with i.i.d. Gamma inter-arrival gaps."""
    gaps = rng.gamma(config.shape, config.scale, size=config.count)
    arrivals = start + np.cumsum(gaps)
    return [
        Request(id=id_start + i, arrival=float(t), gen_len=gen_len)
        for i, t in enumerate(arrivals)
    ]


def gen_phased(
    schedule: PhaseSchedule,
    rng: np.random.Generator,
    gen_len: int = DEFAULT_GEN_LEN,
) -> list[Request]:
    """Concatenate per-phase Gamma arrivals.

    A gap that would cross the phase boundary is dropped; generation
    restarts at the boundary with the next phase's parameters.
    """
    requests: list[Request] = []
    phase_start = 0.0
    next_id = 0
    for duration, config in schedule.phases:
        phase_end = phase_start + duration
        t = phase_start
        emitted = 0
        while emitted < config.count:
            t += float(rng.gamma(config.shape, config.scale))
            if t > phase_end:
                break
            requests.append(Request(id=next_id, arrival=t, gen_len=gen_len))
            next_id += 1
            emitted += 1
        phase_start = phase_end
    return requests


# -- workload file I/O -------------------------------------------------------

def save_workload(requests: list[Request], path) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["request_id", "arrival_s", "gen_len"])
        for r in requests:
            writer.writerow([r.id, f"{r.arrival:.9f}", r.gen_len])


def load_workload(path) -> list[Request]:
    requests = []
    with open(path, newline="") as f:
        for row in csv.DictReader(f):
            requests.append(
                Request(
                    id=int(row["request_id"]),
                    arrival=float(row["arrival_s"]),
                    gen_len=int(row["gen_len"]),
                )
            )
    return requests
