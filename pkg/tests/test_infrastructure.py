"""Test to verify testing infrastructure is properly set up"""
import pytest
from hypothesis import given, strategies as st

from app.core.config import Config
from app.core.dependencies import Dependencies, get_dependencies, initialize_dependencies, reset_dependencies
from app.services.experiment_service import ExperimentService


@pytest.mark.unit
def test_config_fixture(test_config, tmp_path):
    """Verify test configuration fixture"""
    assert isinstance(test_config, Config)
    assert test_config.output_root == tmp_path / "runs"


@pytest.mark.unit
def test_channel_fixtures(erasure_channel, bsc_channel, erased_channel):
    assert erasure_channel.alphabet_size == 3
    assert bsc_channel.alphabet_size == 3
    assert erased_channel.plus.tolist() == erased_channel.minus.tolist()


@pytest.mark.unit
def test_dependencies_wire_service(test_config, test_logger):
    deps = initialize_dependencies(config=test_config, logger=test_logger)
    assert get_dependencies() is deps
    assert isinstance(deps.get_experiment_service(), ExperimentService)
    assert deps.get_config() is test_config
    assert deps.get_logger() is test_logger


@pytest.mark.unit
def test_dependencies_require_initialization():
    reset_dependencies()
    with pytest.raises(RuntimeError):
        get_dependencies()


@pytest.mark.unit
def test_dependencies_build_defaults(test_config):
    deps = Dependencies(config=test_config)
    assert deps.logger.logger.name == "exitsbm"


@pytest.mark.property
@given(st.text(min_size=1, max_size=100))
def test_hypothesis_integration(text):
    """Verify Hypothesis property-based testing works"""
    assert isinstance(text, str)
    assert len(text) >= 1
