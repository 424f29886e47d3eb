"""Calibrate the linear step-time model and find the optimal speculation
length, both continuously (bisection on the derivative condition) and on an
integer grid.

Run: python3 demos/01_cost_model.py
"""

from specbatch import (
    OptimalityParams,
    StepTimeSample,
    eval_delta,
    fit_linear_step_time,
    optimal_speculation_continuous,
    optimal_speculation_discrete,
    predict_runtime,
)
from specbatch.presets import example_calibration, example_fit

# Fit a per-batch-size line t_L(b, s) = alpha_b * s + beta from noisy-looking
# step-time measurements (here: a step function, as real kernels produce).
samples = [StepTimeSample(batch_size=1, query_len=s, measured_time=6.0 if s <= 4 else 9.0)
           for s in range(1, 9)]
slope, intercept = fit_linear_step_time(samples)
print(f"fitted line: alpha={slope:.4f} ms/token, beta={intercept:.4f} ms")

model = example_calibration()
fit = example_fit()
print(f"\nshipped calibration '{', '.join(map(str, model.batch_sizes))}' sizes, "
      f"acceptance fit l(s) = {fit.c}*s^{fit.gamma}")

# Predict end-to-end runtime for N=128 tokens at a few (b, s) points.
for b in (1, 8, 32):
    print(f"\nbatch size {b}:")
    for s in (0, 2, 4, 6, 8):
        pred = predict_runtime(model, fit, N=128, b=b, s=s)
        print(f"  s={s}: {pred.per_token:.3f} ms/token "
              f"({pred.expected_steps:.1f} steps, T_L={pred.T_L:.0f} ms, T_S={pred.T_S:.0f} ms)")
    p = OptimalityParams.from_model(model, fit, b)
    s_cont = optimal_speculation_continuous(p, 1.0, 8.0)
    s_disc = optimal_speculation_discrete(model, fit, 128, b, range(9))
    print(f"  delta(1)={eval_delta(p, 1):+.3f}, delta(8)={eval_delta(p, 8):+.3f} "
          f"-> continuous s_opt={s_cont:.3f}, grid s_opt={s_disc}")

print("\nlarger batches push the optimum toward shorter speculation.")
