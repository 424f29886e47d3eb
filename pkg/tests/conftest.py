import numpy as np
import pytest

from specbatch import AcceptanceTrace, LinearStepModel, PowerLawFit
from specbatch.presets import example_calibration, example_fit, example_trace


@pytest.fixture
def calibration() -> LinearStepModel:
    return example_calibration()


@pytest.fixture
def fit() -> PowerLawFit:
    return example_fit()


@pytest.fixture
def trace() -> AcceptanceTrace:
    return example_trace()


@pytest.fixture
def simple_model() -> LinearStepModel:
    # the single-batch toy calibration used in most hand-derived examples
    return LinearStepModel(alpha={1: 1.0}, beta=5.0, ssm_step={1: 0.2})


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)
