"""
Runtime settings, read from the environment (and an optional ``.env`` file).
"""

from __future__ import annotations

import os
from functools import lru_cache

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field

load_dotenv()  # Pick up PRECSCHED_* overrides from a local .env if present.

ENV_PREFIX = "PRECSCHED_"


class Settings(BaseModel):
    model_config = ConfigDict(frozen=True)

    workers: int = Field(default=1, ge=1, description="Worker processes for sweeps.")
    brute_force_limit: int = Field(default=12, ge=1)
    parallel_brute_force_limit: int = Field(default=8, ge=1)
    noise_resolution: int = Field(default=10**6, ge=1)
    max_events: int = Field(default=1_000_000, ge=1)
    log_level: str = "WARNING"
    api_url: str = "http://localhost:8000"

    @classmethod
    def from_env(cls) -> "Settings":
        values: dict[str, str] = {}
        for name in cls.model_fields:
            raw = os.getenv(ENV_PREFIX + name.upper())
            if raw is not None and raw.strip():
                values[name] = raw.strip()
        return cls.model_validate(values)


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    return Settings.from_env()
