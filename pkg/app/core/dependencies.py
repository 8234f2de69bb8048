"""
Per-process wiring: settings, the logger and the experiment service.

The click group builds one container per invocation and stores it on the
context object; tests hand in their own config and logger.
"""
from typing import Optional

from app.core.config import Config
from app.core.logging import StructuredLogger, setup_logging
from app.services.experiment_service import ExperimentService


class Dependencies:
    def __init__(self, config: Optional[Config] = None, logger: Optional[StructuredLogger] = None):
        self.config = config if config is not None else Config.from_env()
        if logger is None:
            logger = setup_logging(level=self.config.log_level, structured=self.config.enable_structured_logging)
        self.logger = logger
        self.experiment_service = ExperimentService(config=self.config, logger=self.logger)
        self.logger.debug("Dependencies initialized", log_level=self.config.log_level,
                          threads=self.config.threads, output_root=str(self.config.output_root))

    def get_config(self) -> Config:
        return self.config

    def get_logger(self) -> StructuredLogger:
        return self.logger

    def get_experiment_service(self) -> ExperimentService:
        return self.experiment_service


_dependencies: Optional[Dependencies] = None


def get_dependencies() -> Dependencies:
    """The container of the current invocation; RuntimeError before the group callback ran."""
    if _dependencies is None:
        raise RuntimeError("Dependencies not initialized. Call initialize_dependencies() first.")
    return _dependencies


def initialize_dependencies(config: Optional[Config] = None,
                            logger: Optional[StructuredLogger] = None) -> Dependencies:
    global _dependencies
    _dependencies = Dependencies(config=config, logger=logger)
    return _dependencies


def reset_dependencies() -> None:
    global _dependencies
    _dependencies = None
