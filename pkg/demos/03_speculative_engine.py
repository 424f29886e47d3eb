"""Speculative decoding never changes the output, only the step count.

A token-level toy target model is decoded two ways: plain greedy (one token
per step) and speculatively (draft s tokens, verify, keep the leading correct
run plus one). The sequences match exactly; the speculative run takes fewer
steps whenever the draft is any good.

Run: python3 demos/03_speculative_engine.py
"""

import numpy as np

from specbatch import SequenceState, TokenLevel, decode_step, greedy_reference, run_batch
from specbatch.engine import TraceSampler
from specbatch.presets import example_calibration, example_trace

rng = np.random.default_rng(7)
N = 128

for p_err in (0.0, 0.2, 0.8):
    oracle = TokenLevel(p_err=p_err, seed=42)
    state = SequenceState(request_id=0, target_len=N)
    steps = 0
    while not state.done:
        decode_step(state, s=4, oracle=oracle, rng=rng)
        steps += 1
    assert state.tokens == greedy_reference(oracle, request_id=0, n=N)
    print(f"draft error rate {p_err:.1f}: {steps:3d} verification steps "
          f"for {N} tokens (greedy needs {N}); output identical")

# Timed batch execution against the shipped calibration and acceptance trace.
model = example_calibration()
sampler = TraceSampler(example_trace())
print()
for b in (1, 16):
    for s in (0, 4):
        states = [SequenceState(request_id=i, target_len=N) for i in range(b)]
        res = run_batch(states, s, model, sampler, np.random.default_rng(1))
        print(f"b={b:2d} s={s}: {res.total_time:8.1f} ms total, "
              f"{res.total_time / res.tokens_generated:.3f} ms/token")
