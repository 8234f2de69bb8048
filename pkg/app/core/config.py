"""
Configuration management for exitsbm.

This module provides centralized, type-safe configuration management
with environment variable support and validation.
"""
from pathlib import Path
from typing import Optional
from pydantic import Field, field_validator, ValidationError
from pydantic_settings import BaseSettings, SettingsConfigDict

from app.core.exceptions import ConfigurationError


class Config(BaseSettings):
    """
    Application configuration with validation.

    Configuration values can be set via:
    1. Environment variables prefixed with EXITSBM_ (highest priority)
    2. .env file
    3. Default values (lowest priority)

    Per-run parameters (model, rates, channel) live in RunConfig; this class
    holds numerical defaults and resource caps shared by every command.
    """

    # Logging Configuration
    log_level: str = Field(
        default="INFO",
        description="Logging level"
    )
    enable_structured_logging: bool = Field(
        default=True,
        description="Emit JSON log lines instead of plain text"
    )

    # Execution
    threads: int = Field(
        default=1,
        ge=1,
        le=256,
        description="Worker cap for Monte Carlo sampling and grid evaluations"
    )
    output_root: Path = Field(
        default=Path("runs"),
        description="Directory under which run directories are created"
    )

    # Quadrature and density evolution
    quadrature_nodes: int = Field(
        default=64,
        ge=8,
        le=512,
        description="Gauss-Hermite nodes for expectations over a standard normal"
    )
    de_tol: float = Field(
        default=1e-10,
        gt=0.0,
        description="Fixed-point tolerance for density evolution"
    )
    de_t_max: int = Field(
        default=500,
        ge=1,
        description="Iteration cap for density evolution"
    )
    scan_t_max: int = Field(
        default=20000,
        ge=1,
        description="Iteration cap for density evolution inside threshold scans"
    )

    # Belief propagation
    bp_max_iters: int = Field(
        default=100,
        ge=1,
        description="Largest accepted BP iteration count"
    )
    belief_clamp: float = Field(
        default=500.0,
        gt=0.0,
        description="Absolute bound applied to messages and beliefs"
    )
    coupling_margin: float = Field(
        default=100.0,
        gt=0.0,
        description="Locally tree-like proxy: (avg degree)^t must not exceed n / margin"
    )

    # Sampling caps
    tree_node_cap: float = Field(
        default=1e8,
        gt=0,
        description="Largest expected node count for explicit tree sampling"
    )
    mc_sample_budget: float = Field(
        default=5e8,
        gt=0,
        description="Largest number of tree nodes touched by one Monte Carlo validation"
    )
    mc_chunk_size: int = Field(
        default=5000,
        ge=1,
        description="Root samples per Monte Carlo work unit (fixed, so results do not depend on threads)"
    )

    # EXIT analysis
    j_grid_size: int = Field(
        default=200,
        ge=8,
        description="Points in the geometric J table grid"
    )
    curve_grid_size: int = Field(
        default=512,
        ge=8,
        description="Points in an EXIT curve"
    )
    crossing_tol: float = Field(
        default=1e-9,
        gt=0.0,
        description="Tolerance on |T(I) - I| for refined crossings"
    )
    escape_fraction: float = Field(
        default=0.5,
        gt=0.0,
        lt=1.0,
        description="Operating point level, as a fraction of I_max, separating trapped from escaped"
    )
    min_jump_fraction: float = Field(
        default=0.1,
        gt=0.0,
        lt=1.0,
        description="Smallest operating point jump, as a fraction of I_max, reported as a transition"
    )

    # Pydantic configuration
    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
        env_prefix="EXITSBM_"
    )

    @field_validator("log_level")
    @classmethod
    def validate_log_level(cls, v: str) -> str:
        """Validate log level is one of the standard levels."""
        valid_levels = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]
        v_upper = v.upper()
        if v_upper not in valid_levels:
            raise ValueError(
                f"log_level must be one of {valid_levels}, got '{v}'"
            )
        return v_upper

    @field_validator("quadrature_nodes")
    @classmethod
    def validate_quadrature_nodes(cls, v: int) -> int:
        """Gauss-Hermite rules are used in even sizes so the doubling check is symmetric."""
        if v % 2:
            raise ValueError(f"quadrature_nodes must be even, got {v}")
        return v

    @classmethod
    def from_env(cls, _env_file: Optional[str] = ".env", **overrides) -> "Config":
        """
        Load configuration from environment variables and .env file.

        Args:
            _env_file: Path to .env file, or None to disable .env loading
            **overrides: Explicit values that win over the environment

        Returns:
            Config: Configured instance

        Raises:
            ConfigurationError: If configuration is invalid
        """
        try:
            return cls(_env_file=_env_file, **overrides)
        except ValidationError as e:
            invalid_fields = [
                f"{'.'.join(str(loc) for loc in error['loc'])}: {error['msg']}"
                for error in e.errors()
            ]
            raise ConfigurationError(
                f"Invalid configuration: {'; '.join(invalid_fields)}",
                details={"invalid_fields": invalid_fields}
            ) from e


# Global configuration instance (initialized on first use)
_config: Optional[Config] = None


def get_config() -> Config:
    """
    Get the global configuration instance.

    Returns:
        Config: The global configuration instance
    """
    global _config
    if _config is None:
        _config = Config.from_env()
    return _config


def reset_config() -> None:
    """
    Reset the global configuration instance.

    This is primarily useful for testing.
    """
    global _config
    _config = None
