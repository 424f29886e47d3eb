import math

import numpy as np
import pytest

from specbatch import (
    AcceptanceTrace,
    SequenceState,
    TokenLevel,
    TraceSampler,
    decode_step,
    greedy_reference,
    run_batch,
    verify,
)
from specbatch.cost_model import predict_runtime_from_l
from specbatch.acceptance import estimate_expected_correct
from specbatch.engine import DraftOracle


class ConstOracle(DraftOracle):
    """Deterministic stand-in: always l = min(fixed, s) tokens accepted."""

    def __init__(self, accepted: int):
        self.accepted = accepted

    def step(self, state, s, rng):
        return min(self.accepted, s)


class TestVerify:
    def test_first_mismatch(self):
        assert verify([5, 7, 3, 9], [5, 7, 9, 2]) == 2

    def test_all_correct(self):
        assert verify([1, 2, 3, 4], [1, 2, 3, 4]) == 4

    def test_immediate_mismatch(self):
        assert verify([1, 0, 0], [2, 0, 0]) == 0

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            verify([1, 2], [1, 2, 3])


class TestDecodeStep:
    def test_perfect_oracle(self, rng):
        state = SequenceState(request_id=0, target_len=8)
        out = decode_step(state, 4, TokenLevel(p_err=0.0), rng)
        assert out.accepted == 4
        assert out.advanced == 5
        assert state.produced == 5

    def test_hopeless_oracle(self, rng):
        state = SequenceState(request_id=0, target_len=8)
        out = decode_step(state, 4, TokenLevel(p_err=1.0), rng)
        assert out.accepted == 0
        assert out.advanced == 1

    def test_end_of_request_clamp(self, rng):
        state = SequenceState(request_id=0, target_len=3)
        out = decode_step(state, 4, TokenLevel(p_err=0.0), rng)
        assert out.advanced == 3
        assert state.done

    def test_s_zero_advances_one(self, rng):
        state = SequenceState(request_id=0, target_len=4)
        out = decode_step(state, 0, TokenLevel(p_err=0.0), rng)
        assert (out.accepted, out.advanced) == (0, 1)

    def test_done_sequence_rejected(self, rng):
        state = SequenceState(request_id=0, target_len=1, produced=1)
        with pytest.raises(ValueError):
            decode_step(state, 2, TokenLevel(p_err=0.0), rng)

    def test_tokens_match_target_stream(self, rng):
        oracle = TokenLevel(p_err=0.3, seed=5)
        state = SequenceState(request_id=9, target_len=20)
        while not state.done:
            decode_step(state, 4, oracle, rng)
        assert state.tokens == greedy_reference(oracle, 9, 20)


class TestRunBatch:
    def test_hopeless_hand_sim(self, simple_model, rng):
        states = [SequenceState(request_id=0, target_len=5)]
        res = run_batch(states, 2, simple_model, ConstOracle(0), rng)
        # 5 steps of (1*2 + 5 + 2*0.2) = 7.4 ms
        assert res.steps == 5
        assert res.total_time == pytest.approx(37.0)

    def test_perfect_hand_sim(self, simple_model, rng):
        states = [SequenceState(request_id=0, target_len=8)]
        res = run_batch(states, 4, simple_model, ConstOracle(4), rng)
        # 5 tokens then clamped 3: two steps of (9 + 0.8) ms
        assert res.steps == 2
        assert res.total_time == pytest.approx(19.6)

    def test_no_speculation_baseline(self, simple_model, rng):
        states = [SequenceState(request_id=0, target_len=100)]
        res = run_batch(states, 0, simple_model, ConstOracle(0), rng)
        assert res.steps == 100
        assert res.total_time == pytest.approx(600.0)

    def test_batch_result_invariants(self, calibration, trace, rng):
        states = [SequenceState(request_id=i, target_len=32) for i in range(4)]
        res = run_batch(states, 3, calibration, TraceSampler(trace), rng)
        assert res.tokens_generated == 4 * 32
        assert res.batch_size == 4
        assert all(0 < t <= res.total_time for t in res.per_sequence_finish.values())
        assert len(res.per_sequence_finish) == 4

    def test_empty_batch_rejected(self, calibration, rng):
        with pytest.raises(ValueError):
            run_batch([], 2, calibration, ConstOracle(0), rng)

    def test_stale_state_rejected(self, calibration, rng):
        with pytest.raises(ValueError):
            run_batch(
                [SequenceState(request_id=0, target_len=4, produced=2)],
                2, calibration, ConstOracle(0), rng,
            )


class TestOutputEquivalence:
    def test_speculative_equals_greedy(self):
        rng = np.random.default_rng(42)
        for i in range(1000):
            p_err = float(rng.uniform(0, 1))
            s = int(rng.integers(1, 9))
            n = int(rng.integers(1, 257))
            oracle = TokenLevel(p_err=p_err, seed=i)
            state = SequenceState(request_id=i, target_len=n)
            while not state.done:
                decode_step(state, s, oracle, rng)
            assert state.tokens == greedy_reference(oracle, i, n)


class TestTerminationBounds:
    def test_exhaustive_deterministic(self, simple_model, rng):
        for n in range(1, 33):
            for s in range(0, 9):
                for accepted in (0, s // 2, s):
                    states = [SequenceState(request_id=0, target_len=n)]
                    res = run_batch(states, s, simple_model, ConstOracle(accepted), rng)
                    assert math.ceil(n / (s + 1)) <= res.steps <= n


class TestDeterminism:
    def test_identical_seed_identical_result(self, calibration, trace):
        def go():
            states = [SequenceState(request_id=i, target_len=64) for i in range(3)]
            return run_batch(states, 4, calibration, TraceSampler(trace), np.random.default_rng(99))

        assert go() == go()


class TestClosedFormConvergence:
    def test_single_combo(self, calibration, trace):
        n = 10**5
        res = run_batch(
            [SequenceState(request_id=0, target_len=n)],
            4, calibration, TraceSampler(trace), np.random.default_rng(0),
        )
        sim = res.total_time / res.tokens_generated
        pred = predict_runtime_from_l(
            calibration, estimate_expected_correct(trace, 4), n, 1, 4
        ).per_token
        assert sim == pytest.approx(pred, rel=0.02)
