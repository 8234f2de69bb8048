"""Run configuration validation"""

from app.validators.run_validator import RunValidator

__all__ = ["RunValidator"]
