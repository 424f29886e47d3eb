"""Speculation-length selection: offline-profiled LUT and fixed baselines.

Profiling evaluates a small grid of speculation lengths at power-of-two
batch sizes, either analytically through the cost model or by simulating
profiling batches, and stores the per-batch-size argmin in a lookup table.
At serving time a batch size between two profiled sizes takes the smaller
of the two neighboring speculation lengths.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .acceptance import AcceptanceTrace, PowerLawFit, estimate_expected_correct
from .cost_model import LinearStepModel, predict_runtime_from_l
from .engine import SequenceState, TraceSampler, run_batch

__all__ = [
    "SpeculationLUT",
    "PolicyDecision",
    "build_lut",
    "lookup",
    "fixed_policy",
    "FixedPolicy",
    "AdaptivePolicy",
    "save_lut",
    "load_lut",
]


@dataclass(frozen=True)
class PolicyDecision:
    batch_size: int
    chosen_s: int
    source: str  # lut-exact | lut-interpolated | lut-clamped | fixed | none


@dataclass(frozen=True)
class SpeculationLUT:
    """Profiled mapping batch size -> optimal speculation length."""

    entries: dict[int, int]
    s_grid: tuple[int, ...]
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.entries:
            raise ValueError("LUT must have at least one entry")
        for b, s in self.entries.items():
            if b & (b - 1) != 0 or b < 1:
                raise ValueError(f"profiled batch sizes must be powers of two, got {b}")
            if s not in self.s_grid:
                raise ValueError(f"entry {b}->{s} outside s_grid {self.s_grid}")

    @property
    def sizes(self) -> list[int]:
        return sorted(self.entries)


def _expected_l(accept, s: int) -> float:
    if s == 0:
        return 0.0
    if isinstance(accept, AcceptanceTrace):
        return estimate_expected_correct(accept, min(s, accept.horizon))
    return accept(s)


def build_lut(
    calibration: LinearStepModel,
    accept,
    s_grid=tuple(range(9)),
    profiled_sizes=(1, 2, 4, 8, 16, 32),
    mode: str = "analytic",
    sample_size: int = 200,
    rng: np.random.Generator | None = None,
    gen_len: int = 128,
    interpolate: bool = True,
) -> SpeculationLUT:
    """Profile each power-of-two batch size over the s grid and keep the
    per-token-latency argmin (ties toward smaller s).

    ``accept`` is either an AcceptanceTrace or a PowerLawFit. Analytic mode
    evaluates the closed-form prediction; simulated mode runs profiling
    batches totalling >= sample_size requests per (b, s) cell and needs a
    trace plus an rng.
    """
    grid = tuple(sorted(set(int(s) for s in s_grid)))
    if not grid:
        raise ValueError("s_grid must be non-empty")
    if mode not in ("analytic", "simulated"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "simulated":
        if not isinstance(accept, AcceptanceTrace):
            raise ValueError("simulated mode requires an AcceptanceTrace")
        if rng is None:
            raise ValueError("simulated mode requires an rng")

    entries: dict[int, int] = {}
    for b in sorted(profiled_sizes):
        best_s, best_t = None, math.inf
        for s in grid:
            if mode == "analytic":
                t = predict_runtime_from_l(
                    calibration, _expected_l(accept, s), gen_len, b, s, interpolate
                ).per_token
            else:
                oracle = TraceSampler(accept)
                n_batches = math.ceil(sample_size / b)
                total_ms = 0.0
                total_tokens = 0
                for k in range(n_batches):
                    states = [
                        SequenceState(request_id=k * b + i, target_len=gen_len)
                        for i in range(b)
                    ]
                    res = run_batch(states, s, calibration, oracle, rng, interpolate)
                    total_ms += res.total_time
                    total_tokens += res.tokens_generated
                t = total_ms / total_tokens
            if t < best_t:
                best_s, best_t = s, t
        entries[b] = best_s
    prov = {"mode": mode, "sample_size": sample_size if mode == "simulated" else None}
    return SpeculationLUT(entries=entries, s_grid=grid, provenance=prov)


def lookup(lut: SpeculationLUT, b: int) -> PolicyDecision:
    """Resolve a batch size against the LUT.

    Exact hits return their entry; sizes strictly between two profiled
    sizes take the smaller of the two neighbors' speculation lengths;
    sizes outside the profiled range clamp to the boundary entry.
    """
    if b < 1:
        raise ValueError(f"batch size must be >= 1, got {b}")
    if b in lut.entries:
        return PolicyDecision(batch_size=b, chosen_s=lut.entries[b], source="lut-exact")
    sizes = lut.sizes
    if b < sizes[0]:
        return PolicyDecision(batch_size=b, chosen_s=lut.entries[sizes[0]], source="lut-clamped")
    if b > sizes[-1]:
        return PolicyDecision(batch_size=b, chosen_s=lut.entries[sizes[-1]], source="lut-clamped")
    lo = max(x for x in sizes if x < b)
    hi = min(x for x in sizes if x > b)
    s = min(lut.entries[lo], lut.entries[hi])
    return PolicyDecision(batch_size=b, chosen_s=s, source="lut-interpolated")


class FixedPolicy:
    """Always the same speculation length; s=0 is the no-speculation baseline."""

    def __init__(self, s: int):
        if s < 0:
            raise ValueError(f"s must be >= 0, got {s}")
        self.s = s
        self.source = "none" if s == 0 else "fixed"

    @property
    def label(self) -> str:
        return "none" if self.s == 0 else f"fixed-{self.s}"

    def decide(self, batch_size: int) -> PolicyDecision:
        return PolicyDecision(batch_size=batch_size, chosen_s=self.s, source=self.source)


class AdaptivePolicy:
    """LUT-backed policy: chooses per formed batch size."""

    label = "adaptive"

    def __init__(self, lut: SpeculationLUT):
        self.lut = lut

    def decide(self, batch_size: int) -> PolicyDecision:
        return lookup(self.lut, batch_size)


def fixed_policy(s: int) -> FixedPolicy:
    return FixedPolicy(s)


# -- LUT file I/O ------------------------------------------------------------

def save_lut(lut: SpeculationLUT, path, seed=None, calibration: str = "") -> None:
    with open(path, "w", newline="") as f:
        f.write(f"# seed={seed}\n")
        f.write(f"# mode={lut.provenance.get('mode', '')}\n")
        f.write(f"# calibration={calibration}\n")
        writer = csv.writer(f)
        writer.writerow(["batch_size", "spec_len"])
        for b in lut.sizes:
            writer.writerow([b, lut.entries[b]])


def load_lut(path) -> SpeculationLUT:
    entries = {}
    meta = {}
    with open(path, newline="") as f:
        body = []
        for line in f:
            if line.startswith("#"):
                key, _, val = line.lstrip("# ").partition("=")
                meta[key.strip()] = val.strip()
            else:
                body.append(line)
    for row in csv.DictReader(body):
        entries[int(row["batch_size"])] = int(row["spec_len"])
    grid = tuple(sorted(set(entries.values())))
    return SpeculationLUT(entries=entries, s_grid=grid, provenance=meta)
