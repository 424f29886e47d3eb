"""Profile a speculation-length lookup table offline, then consult it for
arbitrary batch sizes at serving time.

Run: python3 demos/04_policy_lut.py
"""

import numpy as np

from specbatch import AdaptivePolicy, build_lut, fixed_policy
from specbatch.presets import example_calibration, example_trace

model = example_calibration()
trace = example_trace()

analytic = build_lut(model, trace, mode="analytic")
simulated = build_lut(model, trace, mode="simulated", sample_size=200,
                      rng=np.random.default_rng(0))

print("batch size -> chosen speculation length")
print(f"{'b':>4} {'analytic':>9} {'simulated':>10}")
for b in analytic.sizes:
    print(f"{b:>4} {analytic.entries[b]:>9} {simulated.entries[b]:>10}")

# Lookups cover every batch size: exact hits, interpolation between profiled
# powers of two, and clamping outside the profiled range.
policy = AdaptivePolicy(analytic)
print("\nlookups:")
for b in (3, 8, 11, 64):
    d = policy.decide(b)
    print(f"  b={b:2d} -> s={d.chosen_s} ({d.source})")

print(f"\nfixed baseline for comparison: {fixed_policy(4).decide(8)}")
