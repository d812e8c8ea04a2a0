from __future__ import annotations

import logging
from typing import Any, Callable

from fastapi import FastAPI, HTTPException, Request
from fastapi.concurrency import run_in_threadpool
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from ..engine import min_rho_witness, simulate
from ..errors import SchedulingError
from ..experiments import report, run
from ..oracles import opt_brute_force, optimum, parallel_lower_bound
from ..policies.registry import build_policy, policy_names
from .models import (
    OptRequest,
    OptResponse,
    ReportRequest,
    ReportResponse,
    RunRequest,
    RunResponse,
    SimulateRequest,
    SimulateResponse,
)

logger = logging.getLogger(__name__)

app = FastAPI(
    title="Precedence Scheduler API",
    version="0.1.0",
    description=(
        "Exact simulation of non-clairvoyant scheduling policies on weighted job DAGs, "
        "optimal baselines and seeded experiment sweeps."
    ),
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)


@app.exception_handler(SchedulingError)
async def scheduling_error(request: Request, exc: SchedulingError) -> JSONResponse:
    return JSONResponse(status_code=400, content=exc.to_payload())


async def _call(what: str, func: Callable[..., Any], *args: Any, **kwargs: Any) -> Any:
    try:
        return await run_in_threadpool(func, *args, **kwargs)
    except SchedulingError:
        raise
    except ValueError as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc
    except Exception as exc:  # pragma: no cover
        logger.exception("%s failed", what)
        raise HTTPException(status_code=500, detail=f"{what} failed") from exc


@app.get("/", summary="Health check")
async def index() -> dict[str, Any]:
    return {"status": "ok", "policies": policy_names()}


def _simulate(request: SimulateRequest) -> SimulateResponse:
    policy = build_policy(request.policy, request.prediction, request.machines)
    result, trace = simulate(request.instance, policy, request.machines)
    rho = min_rho_witness(trace, request.instance)
    return SimulateResponse(
        policy=policy.label,
        machines=request.machines,
        result=result,
        rho=rho,
        rho_infinite=rho is None,
        trace=trace if request.include_trace else None,
    )


@app.post("/simulate", response_model=SimulateResponse, summary="Run one policy")
async def simulate_policy(request: SimulateRequest) -> SimulateResponse:
    return await _call("simulation", _simulate, request)


def _opt(request: OptRequest) -> OptResponse:
    if request.machines == 1:
        return OptResponse(result=optimum(request.instance))
    return OptResponse(
        result=opt_brute_force(request.instance, request.machines),
        lower_bound=parallel_lower_bound(request.instance, request.machines),
    )


@app.post("/opt", response_model=OptResponse, summary="Exact optimum")
async def opt(request: OptRequest) -> OptResponse:
    return await _call("optimum", _opt, request)


@app.post("/run", response_model=RunResponse, summary="Run an experiment spec")
async def run_experiment(request: RunRequest) -> RunResponse:
    rows = await _call("experiment", run, request.spec, request.seed, request.workers)
    return RunResponse(rows=rows, failures=sum(1 for row in rows if row.failure))


@app.post("/report", response_model=ReportResponse, summary="Render result rows")
async def render_report(request: ReportRequest) -> ReportResponse:
    document = await _call("report", report, request.rows, request.format, request.precision)
    return ReportResponse(format=request.format, document=document)
