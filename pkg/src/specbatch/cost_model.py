"""Analytical runtime model for batched speculative decoding.

Per-step costs of the large model are approximated as lines in the
speculation length, one slope per batch size. On top of that sit the total
runtime prediction and the optimal-speculation-length condition, solved
either continuously (bisection on the derivative numerator) or by grid
search.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import CalibrationWarning, DegenerateFitError, UncalibratedBatchError

__all__ = [
    "StepTimeSample",
    "LinearStepModel",
    "RuntimePrediction",
    "OptimalityParams",
    "fit_linear_step_time",
    "llm_step_time",
    "ssm_step_time",
    "predict_runtime",
    "predict_runtime_from_l",
    "eval_delta",
    "optimal_speculation_continuous",
    "optimal_speculation_discrete",
    "load_calibration",
    "save_calibration",
    "load_step_samples",
]


@dataclass(frozen=True)
class StepTimeSample:
    """One raw (batch size, query length, time) measurement."""

    batch_size: int
    query_len: int
    measured_time: float

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.query_len < 1:
            raise ValueError(f"query_len must be >= 1, got {self.query_len}")
        if self.measured_time <= 0:
            raise ValueError(f"measured_time must be > 0, got {self.measured_time}")


@dataclass(frozen=True)
class LinearStepModel:
    """Calibrated per-step costs: large-model time is ``alpha[b]*s + beta``
    milliseconds, small-model time is ``ssm_step[b]`` per drafted token."""

    alpha: dict[int, float]
    beta: float
    ssm_step: dict[int, float]

    def __post_init__(self):
        if not self.alpha or not self.ssm_step:
            raise ValueError("alpha and ssm_step tables must be non-empty")
        if self.beta < 0:
            raise ValueError(f"beta must be >= 0, got {self.beta}")
        for name, table in (("alpha", self.alpha), ("ssm_step", self.ssm_step)):
            prev = 0.0
            for b in sorted(table):
                v = table[b]
                if v <= 0:
                    raise ValueError(f"{name}[{b}] must be > 0, got {v}")
                if v < prev:
                    raise ValueError(f"{name} must be non-decreasing in batch size")
                prev = v

    @property
    def batch_sizes(self) -> list[int]:
        return sorted(self.alpha)


def _interp_table(table: dict[int, float], b: int, interpolate: bool) -> float:
    """Piecewise-linear interpolation in batch size, clamped at the extremes."""
    if b in table:
        return table[b]
    if not interpolate:
        raise UncalibratedBatchError(
            f"batch size {b} not calibrated (have {sorted(table)}) and interpolation disabled"
        )
    sizes = sorted(table)
    return float(np.interp(b, sizes, [table[k] for k in sizes]))


@dataclass(frozen=True)
class RuntimePrediction:
    """Closed-form runtime decomposition for one (N, b, s) point."""

    T_L: float
    T_S: float
    T_total: float
    expected_steps: float
    per_token: float


@dataclass(frozen=True)
class OptimalityParams:
    """Parameters of the derivative-numerator function delta(s).

    ``alpha_eff`` is the merged slope: the large-model slope plus the
    per-token small-model cost, which enter the runtime identically.
    """

    alpha_eff: float
    beta: float
    c: float
    gamma: float
    K: float = field(init=False)
    L: float = field(init=False)

    def __post_init__(self):
        if self.alpha_eff <= 0:
            raise ValueError("alpha_eff must be > 0")
        if self.beta < 0:
            raise ValueError("beta must be >= 0")
        if self.c <= 0:
            raise ValueError("c must be > 0")
        if not 0 < self.gamma < 1:
            raise ValueError(f"gamma must be in (0, 1), got {self.gamma}")
        object.__setattr__(self, "K", (1.0 - self.gamma) * self.c)
        object.__setattr__(self, "L", self.c * self.beta * self.gamma)

    @classmethod
    def from_model(cls, model: LinearStepModel, fit, b: int, interpolate: bool = True):
        alpha = _interp_table(model.alpha, b, interpolate)
        ts = _interp_table(model.ssm_step, b, interpolate)
        return cls(alpha_eff=alpha + ts, beta=model.beta, c=fit.c, gamma=fit.gamma)


def fit_linear_step_time(samples: list[StepTimeSample]) -> tuple[float, float]:
    """Ordinary least-squares fit of measured step time against query length.

    All samples must share one batch size. Returns (slope, intercept) in
    ms/token and ms. A non-positive slope is suspicious but not fatal; a
    CalibrationWarning is emitted and the fit returned as-is.
    """
    if not samples:
        raise DegenerateFitError("no samples")
    batch_sizes = {smp.batch_size for smp in samples}
    if len(batch_sizes) != 1:
        raise ValueError(f"samples span multiple batch sizes: {sorted(batch_sizes)}")
    xs = np.array([smp.query_len for smp in samples], dtype=float)
    ys = np.array([smp.measured_time for smp in samples], dtype=float)
    if len(np.unique(xs)) < 2:
        raise DegenerateFitError("need samples at >= 2 distinct query lengths")
    slope, intercept = np.polyfit(xs, ys, 1)
    if abs(slope) < 1e-12:
        slope = 0.0
    if slope <= 0:
        warnings.warn(
            f"fitted slope {slope:.4g} is non-positive for b={samples[0].batch_size}",
            CalibrationWarning,
            stacklevel=2,
        )
    return float(slope), float(intercept)


def llm_step_time(model: LinearStepModel, b: int, s: int, interpolate: bool = True) -> float:
    """Large-model time in ms for one verification step of s tokens at batch size b."""
    if s < 1:
        raise ValueError(f"s must be >= 1, got {s}")
    return _interp_table(model.alpha, b, interpolate) * s + model.beta


def ssm_step_time(model: LinearStepModel, b: int, interpolate: bool = True) -> float:
    """Small-model time in ms to draft one token at batch size b."""
    return _interp_table(model.ssm_step, b, interpolate)


def predict_runtime_from_l(
    model: LinearStepModel, l_of_s: float, N: int, b: int, s: int,
    interpolate: bool = True,
) -> RuntimePrediction:
    """Runtime prediction with an explicit expected accepted length ``l_of_s``.

    s=0 is the no-speculation baseline: one token per large-model step of
    query length 1, no drafting cost.
    """
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    if s < 0:
        raise ValueError(f"s must be >= 0, got {s}")
    if s == 0:
        steps = float(N)
        t_l = steps * llm_step_time(model, b, 1, interpolate)
        t_s = 0.0
    else:
        steps = N / (l_of_s + 1.0)
        t_l = steps * llm_step_time(model, b, s, interpolate)
        t_s = steps * s * ssm_step_time(model, b, interpolate)
    total = t_l + t_s
    return RuntimePrediction(
        T_L=t_l, T_S=t_s, T_total=total, expected_steps=steps, per_token=total / N
    )


def predict_runtime(
    model: LinearStepModel, fit, N: int, b: int, s: int, interpolate: bool = True
) -> RuntimePrediction:
    """Closed-form total runtime using the power-law acceptance model."""
    l_of_s = fit.c * s**fit.gamma if s >= 1 else 0.0
    return predict_runtime_from_l(model, l_of_s, N, b, s, interpolate)


def eval_delta(p: OptimalityParams, s: float) -> float:
    """Derivative-numerator function whose root is the continuous optimum.

    delta(s) = K*alpha_eff*s^gamma - L*s^(gamma-1) + alpha_eff; strictly
    increasing in s.
    """
    if s <= 0:
        raise ValueError(f"s must be > 0, got {s}")
    return p.K * p.alpha_eff * s**p.gamma - p.L * s ** (p.gamma - 1.0) + p.alpha_eff


def optimal_speculation_continuous(
    p: OptimalityParams, s_min: float = 1.0, s_max: float = 8.0, tol: float = 1e-6
) -> float:
    """Root of delta in [s_min, s_max] by bisection, clamped at the boundaries."""
    if not 0 < s_min < s_max:
        raise ValueError(f"need 0 < s_min < s_max, got [{s_min}, {s_max}]")
    if tol <= 0:
        raise ValueError(f"tol must be > 0, got {tol}")
    if eval_delta(p, s_min) >= 0:
        return s_min
    if eval_delta(p, s_max) <= 0:
        return s_max
    lo, hi = s_min, s_max
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if eval_delta(p, mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def optimal_speculation_discrete(
    model: LinearStepModel, fit, N: int, b: int, s_grid, interpolate: bool = True
) -> int:
    """Grid search for the speculation length minimizing predicted per-token
    latency. Ties break toward the smallest s."""
    grid = sorted(set(int(s) for s in s_grid))
    if not grid:
        raise ValueError("s_grid must be non-empty")
    if grid[0] < 0:
        raise ValueError("s_grid members must be >= 0")
    best_s, best_t = None, math.inf
    for s in grid:
        t = predict_runtime(model, fit, N, b, s, interpolate).per_token
        if t < best_t:
            best_s, best_t = s, t
    return best_s


# -- calibration / sample file I/O -------------------------------------------

def save_calibration(model: LinearStepModel, path, fit=None) -> None:
    """Write the calibration JSON; ``fit`` adds the "acceptance" section."""
    doc = {
        "alpha": [[b, model.alpha[b]] for b in sorted(model.alpha)],
        "beta": model.beta,
        "ssm_step": [[b, model.ssm_step[b]] for b in sorted(model.ssm_step)],
    }
    if fit is not None:
        doc["acceptance"] = {"c": fit.c, "gamma": fit.gamma}
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def load_calibration(path):
    """Read a calibration JSON. Returns (LinearStepModel, PowerLawFit | None)."""
    from .acceptance import PowerLawFit

    doc = json.loads(Path(path).read_text())
    model = LinearStepModel(
        alpha={int(b): float(v) for b, v in doc["alpha"]},
        beta=float(doc["beta"]),
        ssm_step={int(b): float(v) for b, v in doc["ssm_step"]},
    )
    fit = None
    if "acceptance" in doc:
        acc = doc["acceptance"]
        fit = PowerLawFit(c=float(acc["c"]), gamma=float(acc["gamma"]))
    return model, fit


def load_step_samples(path) -> list[StepTimeSample]:
    """Read the step-time sample CSV (batch_size,query_len,time_ms)."""
    samples = []
    with open(path, newline="") as f:
        for row in csv.DictReader(f):
            samples.append(
                StepTimeSample(
                    batch_size=int(row["batch_size"]),
                    query_len=int(row["query_len"]),
                    measured_time=float(row["time_ms"]),
                )
            )
    return samples
