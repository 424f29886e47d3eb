"""Run the full experiment harness at a reduced scale and print where the
result files landed. The same runs are available from the command line:

  specbatch sweep --out demo_out
  specbatch dynamic --out demo_out
  ...

Every output embeds the seed and a config hash; rerunning is byte-identical.

Run: python3 demos/06_experiments.py
"""

from specbatch.harness import (
    ExperimentConfig,
    cmd_dynamic,
    cmd_fit,
    cmd_profile,
    cmd_sweep,
    cmd_timeline,
    cmd_uniform,
    read_result_csv,
)

cfg = ExperimentConfig(
    requests=200,
    sweep_samples=50,
    intervals=(0.1, 0.4, 0.8),
    cvs=(1.0, 2.0),
    n_phases=4,
    phase_duration=25.0,
    seed=0,
    out_dir="demo_out",
)

for cmd in (cmd_sweep, cmd_profile, cmd_uniform, cmd_dynamic, cmd_timeline, cmd_fit):
    path = cmd(cfg)
    print(f"{cmd.__name__:>12} -> {path}")

print("\nper-batch-size optimum from the sweep:")
for row in read_result_csv("demo_out/sweep.csv"):
    if row["is_optimal"] == "1":
        print(f"  b={row['batch_size']:>2}: s_opt={row['spec_len']} "
              f"({float(row['per_token_ms']):.3f} ms/token)")

print("\ndynamic-traffic summary (avg latency in s):")
for row in read_result_csv("demo_out/dynamic.csv"):
    if row["interval_s"] == "0.100":
        print(f"  cv={row['cv']} {row['policy']:>8}: {float(row['avg_latency_s']):.3f}")
