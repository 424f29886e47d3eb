"""Estimate the expected number of accepted draft tokens l(s) from a trace,
fit the sublinear power law, and sample accepted lengths for simulation.

Run: python3 demos/02_acceptance.py
"""

import numpy as np

from specbatch import estimate_expected_correct, fit_power_law, sample_accepted_length
from specbatch.presets import example_trace

trace = example_trace()
print(f"trace: {len(trace.samples)} prompts, horizon {trace.horizon}")

# The estimator censors each recorded run length at s and averages.
points = [(s, estimate_expected_correct(trace, s)) for s in range(1, 9)]
for s, l in points:
    print(f"  l({s}) = {l:.3f}")

fit = fit_power_law(points)
print(f"\npower-law fit: l(s) = {fit.c:.3f} * s^{fit.gamma:.3f}")
print("increments shrink with s: drafting deeper yields diminishing returns.")

# The bootstrap sampler's mean converges to the estimator.
rng = np.random.default_rng(0)
s = 4
draws = [sample_accepted_length(trace, s, rng) for _ in range(100_000)]
print(f"\nsampler mean at s={s}: {np.mean(draws):.4f} "
      f"(estimator {estimate_expected_correct(trace, s):.4f})")
