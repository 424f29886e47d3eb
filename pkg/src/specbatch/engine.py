"""Token-level speculative decoding loop and its batched timed simulation.

Each step drafts s tokens, verifies them against the target stream, keeps
the leading correct run, and appends one corrected/look-ahead token, so
every step advances each live sequence by at least one token. Batched runs
charge a constant per-step cost from the calibrated linear model, holding
the formed batch size for the whole batch lifetime (masked padding).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .acceptance import AcceptanceTrace, sample_accepted_length
from .cost_model import LinearStepModel, llm_step_time, ssm_step_time

__all__ = [
    "SequenceState",
    "StepOutcome",
    "BatchResult",
    "DraftOracle",
    "TraceSampler",
    "TokenLevel",
    "verify",
    "decode_step",
    "run_batch",
    "greedy_reference",
]

VOCAB = 32000


@dataclass
class SequenceState:
    """Mutable per-request decoding state."""

    request_id: int
    target_len: int
    produced: int = 0
    tokens: list[int] = field(default_factory=list)

    def __post_init__(self):
        if self.target_len < 1:
            raise ValueError(f"target_len must be >= 1, got {self.target_len}")

    @property
    def done(self) -> bool:
        return self.produced >= self.target_len

    @property
    def remaining(self) -> int:
        return self.target_len - self.produced


@dataclass(frozen=True)
class StepOutcome:
    accepted: int
    advanced: int
    step_time: float = 0.0


@dataclass(frozen=True)
class BatchResult:
    batch_size: int
    spec_len: int
    total_time: float
    steps: int
    tokens_generated: int
    per_sequence_finish: dict[int, float]


def verify(draft: list[int], target: list[int]) -> int:
    """Length of the longest common prefix of draft and target tokens.

    A speculated token only counts if all tokens before it were correct.
    """
    if len(draft) != len(target):
        raise ValueError(f"length mismatch: {len(draft)} vs {len(target)}")
    l = 0
    for d, t in zip(draft, target):
        if d != t:
            break
        l += 1
    return l


def _mix(a: int, b: int, c: int) -> int:
    # splitmix64-style integer hash; pure function of its inputs
    x = (a * 0x9E3779B97F4A7C15 + b * 0xBF58476D1CE4E5B9 + c * 0x94D049BB133111EB) & 0xFFFFFFFFFFFFFFFF
    x ^= x >> 30
    x = (x * 0xBF58476D1CE4E5B9) & 0xFFFFFFFFFFFFFFFF
    x ^= x >> 27
    x = (x * 0x94D049BB133111EB) & 0xFFFFFFFFFFFFFFFF
    x ^= x >> 31
    return x


class DraftOracle:
    """Stand-in for the draft/verify model pair."""

    def step(self, state: SequenceState, s: int, rng: np.random.Generator) -> int:
        """Return the accepted length l in [0, s] for one speculation step,
        appending the tokens actually generated when operating at token level."""
        raise NotImplementedError


class TraceSampler(DraftOracle):
    """Draws accepted lengths by bootstrap from a recorded trace."""

    def __init__(self, trace: AcceptanceTrace):
        self.trace = trace

    def step(self, state, s, rng):
        if s == 0:
            return 0
        return sample_accepted_length(self.trace, min(s, self.trace.horizon), rng)


class TokenLevel(DraftOracle):
    """Explicit draft tokens against a deterministic toy target stream.

    The target token at (request_id, position) is a pure hash of those
    inputs and the generator seed; drafts match the target except for
    independent corruptions with probability p_err.
    """

    def __init__(self, p_err: float, seed: int = 0):
        if not 0 <= p_err <= 1:
            raise ValueError(f"p_err must be in [0, 1], got {p_err}")
        self.p_err = p_err
        self.seed = seed

    def target_token(self, request_id: int, position: int) -> int:
        return _mix(self.seed, request_id, position) % VOCAB

    def draft_tokens(self, state: SequenceState, s: int, rng) -> list[int]:
        draft = []
        for i in range(s):
            tok = self.target_token(state.request_id, state.produced + i)
            if rng.random() < self.p_err:
                tok = (tok + 1 + int(rng.integers(VOCAB - 1))) % VOCAB
            draft.append(tok)
        return draft

    def step(self, state, s, rng):
        if s == 0:
            return 0
        draft = self.draft_tokens(state, s, rng)
        target = [self.target_token(state.request_id, state.produced + i) for i in range(s)]
        return verify(draft, target)


def decode_step(state: SequenceState, s: int, oracle: DraftOracle, rng) -> StepOutcome:
    """One speculation step for a single sequence.

    Advances by accepted+1 (the verifier always contributes one corrected
    or look-ahead token), clamped to the tokens still owed. With s=0 the
    step is plain autoregression: exactly one token, no draft.
    """
    if state.done:
        raise ValueError(f"decode_step on finished sequence {state.request_id}")
    if s < 0:
        raise ValueError(f"s must be >= 0, got {s}")
    accepted = oracle.step(state, s, rng)
    advanced = min(accepted + 1, state.remaining)
    if isinstance(oracle, TokenLevel):
        state.tokens.extend(
            oracle.target_token(state.request_id, state.produced + i) for i in range(advanced)
        )
    state.produced += advanced
    return StepOutcome(accepted=accepted, advanced=advanced)


def run_batch(
    states: list[SequenceState],
    s: int,
    cost: LinearStepModel,
    oracle: DraftOracle,
    rng: np.random.Generator,
    interpolate: bool = True,
) -> BatchResult:
    """Simulate a batch to completion under a fixed speculation length.

    Every step costs the full formed-batch, full-s price (finished or
    rejected positions are masked, not reshaped), so step time is constant:
    llm_step_time(b, max(s,1)) + s * ssm_step(b).
    """
    if not states:
        raise ValueError("empty batch")
    for st in states:
        if st.produced != 0:
            raise ValueError(f"sequence {st.request_id} is not fresh (produced={st.produced})")
    b = len(states)
    step_cost = llm_step_time(cost, b, max(s, 1), interpolate) + s * ssm_step_time(
        cost, b, interpolate
    )
    finish: dict[int, float] = {}
    live = list(states)
    total_time = 0.0
    steps = 0
    while live:
        total_time += step_cost
        steps += 1
        still = []
        for st in live:
            decode_step(st, s, oracle, rng)
            if st.done:
                finish[st.request_id] = total_time
            else:
                still.append(st)
        live = still
    return BatchResult(
        batch_size=b,
        spec_len=s,
        total_time=total_time,
        steps=steps,
        tokens_generated=sum(st.target_len for st in states),
        per_sequence_finish=finish,
    )


def greedy_reference(oracle: TokenLevel, request_id: int, n: int) -> list[int]:
    """Plain greedy decoding of the toy target stream: the ground truth any
    speculative run must reproduce exactly."""
    return [oracle.target_token(request_id, i) for i in range(n)]
