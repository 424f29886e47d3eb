"""specbatch: modeling, simulation, and autotuning of batched speculative
decoding for LLM serving, against synthetic oracles instead of real GPUs."""

from .acceptance import (
    AcceptanceTrace,
    PowerLawFit,
    estimate_expected_correct,
    fit_power_law,
    sample_accepted_length,
)
from .cost_model import (
    LinearStepModel,
    OptimalityParams,
    RuntimePrediction,
    StepTimeSample,
    eval_delta,
    fit_linear_step_time,
    llm_step_time,
    optimal_speculation_continuous,
    optimal_speculation_discrete,
    predict_runtime,
)
from .engine import (
    BatchResult,
    SequenceState,
    StepOutcome,
    TokenLevel,
    TraceSampler,
    decode_step,
    greedy_reference,
    run_batch,
    verify,
)
from .policy import (
    AdaptivePolicy,
    FixedPolicy,
    PolicyDecision,
    SpeculationLUT,
    build_lut,
    fixed_policy,
    lookup,
)
from .presets import example_calibration, example_fit, example_trace
from .simulator import (
    RequestRecord,
    ServerConfig,
    SimulationReport,
    form_batch,
    run_simulation,
    summarize,
)
from .traffic import PhaseSchedule, Request, TrafficConfig, gen_arrivals, gen_phased

__version__ = "0.1.0"
