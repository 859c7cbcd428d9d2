"""
Environment Settings

Process-level settings read from EIGN_* environment variables or a .env
file. Per-run experiment settings live in RunConfig instead.
"""

import os
from functools import lru_cache

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Environment-level knobs for the harness."""
    model_config = SettingsConfigDict(env_prefix="EIGN_", env_file=".env", extra="ignore")

    output_dir: str = Field("output", description="Default directory for traces and summaries")
    log_level: str = Field("INFO", description="Root logger level")
    max_workers: int = Field(default_factory=lambda: os.cpu_count() or 1, ge=1,
                             description="Process pool size for suites")
    metrics_enabled: bool = Field(False, description="Expose Prometheus counters over HTTP")
    metrics_port: int = Field(9090, description="Prometheus exporter port")
    gp_sample_seed: int = Field(0, ge=0, description="Seed for gp-* problems without an explicit suffix")
    mc_chunk: int = Field(100_000, ge=1, description="Monte Carlo draws per chunk")
    gradient_workers: int = Field(1, ge=1, description="Threads for the per-coordinate gradient fits of one run")


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    return Settings()
