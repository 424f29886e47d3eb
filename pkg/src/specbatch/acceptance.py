"""Acceptance-length statistics: how many drafted tokens the verifier keeps.

The empirical estimator is the censored mean (1/n) * sum(min(l_i, s)); its
shape over s is fitted by a sublinear power law c * s^gamma in log-log
space. A bootstrap sampler resamples the recorded counts so that simulated
acceptance has exactly the estimator's mean.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import CalibrationWarning, HorizonError, UnfittableError

__all__ = [
    "AcceptanceTrace",
    "PowerLawFit",
    "estimate_expected_correct",
    "fit_power_law",
    "sample_accepted_length",
    "load_trace",
    "save_trace",
]


@dataclass(frozen=True)
class AcceptanceTrace:
    """Recorded correct-token counts, one per measured prompt."""

    samples: tuple[int, ...]
    horizon: int
    _array: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError(f"horizon must be >= 1, got {self.horizon}")
        if not self.samples:
            raise ValueError("trace needs at least one sample")
        for li in self.samples:
            if not 0 <= li <= self.horizon:
                raise ValueError(f"sample {li} outside [0, {self.horizon}]")
        object.__setattr__(self, "_array", np.array(self.samples, dtype=np.int64))

    @property
    def count(self) -> int:
        return len(self.samples)


@dataclass(frozen=True)
class PowerLawFit:
    """l(s) ~= c * s**gamma with 0 < gamma <= 1 (sublinear)."""

    c: float
    gamma: float

    def __post_init__(self):
        if self.c <= 0:
            raise ValueError(f"c must be > 0, got {self.c}")
        if not 0 < self.gamma <= 1:
            raise ValueError(f"gamma must be in (0, 1], got {self.gamma}")

    def __call__(self, s: float) -> float:
        return self.c * s**self.gamma


def estimate_expected_correct(trace: AcceptanceTrace, s: int) -> float:
    """Censored-mean estimate of the expected accepted length at speculation
    length s. Valid only up to the measurement horizon."""
    if s < 0:
        raise ValueError(f"s must be >= 0, got {s}")
    if s > trace.horizon:
        raise HorizonError(
            f"s={s} exceeds the measurement horizon m={trace.horizon}; "
            "the estimator is censored beyond it"
        )
    return float(np.minimum(trace._array, s).mean())


def fit_power_law(points) -> PowerLawFit:
    """Least-squares fit of ln(l) = ln(c) + gamma*ln(s) over (s, l) pairs.

    Points with l <= 0 or s < 1 are excluded. A raw gamma above 1 signals
    non-sublinear data; it is clamped to 1 with a warning.
    """
    usable = [(s, l) for s, l in points if s >= 1 and l > 0]
    if len({s for s, _ in usable}) < 2:
        raise UnfittableError("need >= 2 points with distinct s >= 1 and l > 0")
    xs = np.log([s for s, _ in usable])
    ys = np.log([l for _, l in usable])
    gamma, log_c = np.polyfit(xs, ys, 1)
    if gamma > 1:
        warnings.warn(
            f"fitted gamma {gamma:.4g} > 1 is not sublinear; clamping to 1",
            CalibrationWarning,
            stacklevel=2,
        )
        gamma = 1.0
    if gamma <= 0:
        raise UnfittableError(f"fitted gamma {gamma:.4g} <= 0: data is not increasing in s")
    return PowerLawFit(c=float(math.exp(log_c)), gamma=float(gamma))


def sample_accepted_length(trace: AcceptanceTrace, s: int, rng: np.random.Generator) -> int:
    """Bootstrap one accepted length: a uniformly resampled recorded count,
    censored at s. The mean over draws equals estimate_expected_correct."""
    if not 1 <= s <= trace.horizon:
        raise ValueError(f"s must be in [1, {trace.horizon}], got {s}")
    li = trace.samples[rng.integers(trace.count)]
    return min(li, s)


# -- trace file I/O ----------------------------------------------------------

def save_trace(trace: AcceptanceTrace, path) -> None:
    with open(path, "w", newline="") as f:
        f.write(f"# horizon={trace.horizon}\n")
        writer = csv.writer(f)
        writer.writerow(["prompt_id", "correct_tokens"])
        for i, li in enumerate(trace.samples):
            writer.writerow([i, li])


def load_trace(path) -> AcceptanceTrace:
    horizon = None
    samples = []
    lines = Path(path).read_text().splitlines()
    body = []
    for line in lines:
        if line.startswith("#"):
            key, _, val = line.lstrip("# ").partition("=")
            if key.strip() == "horizon":
                horizon = int(val)
        elif line.strip():
            body.append(line)
    if horizon is None:
        raise ValueError(f"{path}: missing '# horizon=<m>' metadata line")
    for row in csv.DictReader(body):
        samples.append(int(row["correct_tokens"]))
    return AcceptanceTrace(samples=tuple(samples), horizon=horizon)
