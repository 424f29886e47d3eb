"""Shipped example calibration and acceptance trace.

The "rtx3090-like" calibration is illustrative, not measured: slopes rise
with batch size and the acceptance fit is the 0.9 * s**0.548 curve, chosen
so the sweep reproduces the qualitative landscape (large optimal
speculation length at batch 1, small at batch 32). Absolute milliseconds
carry no meaning.
"""

from __future__ import annotations

from .acceptance import AcceptanceTrace, PowerLawFit
from .cost_model import LinearStepModel

__all__ = ["example_calibration", "example_fit", "example_trace", "PRESET_NAME"]

PRESET_NAME = "rtx3090-like"


def example_calibration() -> LinearStepModel:
    return LinearStepModel(
        alpha={1: 0.35, 2: 0.45, 4: 0.60, 8: 0.80, 16: 1.00, 32: 1.25},
        beta=5.0,
        ssm_step={1: 0.08, 2: 0.09, 4: 0.10, 8: 0.12, 16: 0.15, 32: 0.20},
    )


def example_fit() -> PowerLawFit:
    return PowerLawFit(c=0.9, gamma=0.548)


def example_trace(n: int = 200, horizon: int = 80) -> AcceptanceTrace:
    """Deterministic trace whose censored means track the example power law.

    The number of samples >= k is n * (l(k) - l(k-1)) rounded, i.e. the
    increments of the target curve become tail counts. Samples beyond 8
    are spread over the horizon; they only matter for estimates past the
    fitted range.
    """
    fit = example_fit()
    tail = [round(n * (fit(k) - fit(k - 1) if k > 1 else fit(1)))
            for k in range(1, 9)]
    counts = {0: n - tail[0]}
    for v in range(1, 8):
        counts[v] = tail[v - 1] - tail[v]
    samples: list[int] = []
    for v in sorted(counts):
        samples.extend([v] * counts[v])
    n_tail = tail[-1]
    for j in range(n_tail):
        samples.append(8 + (j * (horizon - 9)) // max(n_tail - 1, 1))
    return AcceptanceTrace(samples=tuple(samples), horizon=horizon)
