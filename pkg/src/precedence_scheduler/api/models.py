"""
Request and response bodies of the HTTP API.
"""

from __future__ import annotations

from typing import List, Literal, Optional

from pydantic import BaseModel, Field

from ..core import Instance
from ..engine import ScheduleResult, Trace
from ..experiments import ExperimentSpec, ResultRow
from ..oracles import OptResult
from ..policies.registry import PolicySpec
from ..predictions import PredictionBundle
from ..rationals import Rational


class SimulateRequest(BaseModel):
    instance: Instance
    policy: PolicySpec
    prediction: Optional[PredictionBundle] = None
    machines: int = Field(default=1, ge=1)
    include_trace: bool = Field(default=False, description="Return every segment.")


class SimulateResponse(BaseModel):
    policy: str
    machines: int
    result: ScheduleResult
    rho: Optional[Rational] = Field(default=None, description="None when rho_infinite.")
    rho_infinite: bool = False
    trace: Optional[Trace] = None


class OptRequest(BaseModel):
    instance: Instance
    machines: int = Field(default=1, ge=1)


class OptResponse(BaseModel):
    result: OptResult
    lower_bound: Optional[Rational] = Field(
        default=None, description="Preemptive lower bound, several machines only."
    )


class RunRequest(BaseModel):
    spec: ExperimentSpec
    seed: int = Field(default=0, description="Master seed.")
    workers: Optional[int] = Field(default=None, ge=1)


class RunResponse(BaseModel):
    rows: List[ResultRow]
    failures: int


class ReportRequest(BaseModel):
    rows: List[ResultRow]
    format: Literal["csv", "summary"] = "csv"
    precision: int = Field(default=3, ge=0)


class ReportResponse(BaseModel):
    format: str
    document: str
