"""Shared test fixtures and configuration for pytest"""
import logging
import os
from io import StringIO

import numpy as np
import pytest
from hypothesis import settings

from app.core.config import Config, reset_config
from app.core.dependencies import reset_dependencies
from app.core.logging import CustomJsonFormatter, StructuredLogger
from app.models.graph_models import SingleCommunityParams, SymmetricSbmParams
from app.services.channels import flip_channel

# Configure Hypothesis profiles
settings.register_profile("ci", max_examples=100, deadline=5000)
settings.register_profile("dev", max_examples=20, deadline=None)

# Load profile based on environment
profile = os.getenv("HYPOTHESIS_PROFILE", "dev")
settings.load_profile(profile)


def capture_logs(logger: StructuredLogger) -> StringIO:
    """Route a StructuredLogger into a buffer of JSON lines."""
    log_capture = StringIO()
    handler = logging.StreamHandler(log_capture)
    handler.setFormatter(CustomJsonFormatter('%(timestamp)s %(level)s %(name)s %(message)s'))
    logger.logger.handlers.clear()
    logger.logger.addHandler(handler)
    return log_capture


@pytest.fixture(autouse=True)
def clean_globals():
    """Reset module-level singletons after each test."""
    yield
    reset_config()
    reset_dependencies()


@pytest.fixture
def test_config(tmp_path) -> Config:
    """Config with .env loading disabled and outputs under tmp_path"""
    return Config(_env_file=None, output_root=tmp_path / "runs")


@pytest.fixture
def test_logger() -> StructuredLogger:
    return StructuredLogger("exitsbm_test", level="DEBUG")


@pytest.fixture
def erasure_channel():
    """α = 0.4, ε = 0.1"""
    return flip_channel(0.4, 0.1)


@pytest.fixture
def bsc_channel():
    """Always revealed, α = 0.1"""
    return flip_channel(0.1, 1.0)


@pytest.fixture
def erased_channel():
    """ε = 0: side information carries nothing"""
    return flip_channel(0.4, 0.0)


@pytest.fixture
def symmetric_params() -> SymmetricSbmParams:
    return SymmetricSbmParams(n=2000, a=12.0, b=4.0)


@pytest.fixture
def single_params() -> SingleCommunityParams:
    return SingleCommunityParams(n=2000, k=200, p=0.03, q=0.005)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)
