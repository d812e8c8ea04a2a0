"""
Event-driven, exact, continuous-time simulation of rate schedules.

Policies see only `PolicyView`s (front jobs with weights, what was revealed and
completed since the previous query). Rates are held constant between events; an
event is a completion or a wake-up requested by the policy.
"""

from __future__ import annotations

import heapq
import logging
from fractions import Fraction
from typing import TYPE_CHECKING, Callable, Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field

from .config import get_settings
from .core import Instance, successor_weights
from .errors import (
    InfeasibleRatesError,
    InfeasibleSegmentError,
    PolicyStallError,
    RateOnNonFrontJobError,
    TraceInstanceMismatchError,
)
from .rationals import Rational, format_rational, rational_sum

if TYPE_CHECKING:
    from .policies.base import Policy

logger = logging.getLogger(__name__)

RateVector = Dict[int, Fraction]


class PolicyView(BaseModel):
    """Everything a non-clairvoyant policy may observe at an event."""

    model_config = ConfigDict(frozen=True)

    time: Rational
    front: Tuple[Tuple[int, Rational], ...] = Field(
        ..., description="(id, weight) of every front job, ascending id."
    )
    revealed: Tuple[int, ...] = Field(default=(), description="Newly revealed ids, in reveal order.")
    revealed_by: Dict[int, Tuple[int, ...]] = Field(
        default_factory=dict, description="Predecessors of each newly revealed job."
    )
    completed: Tuple[Tuple[int, Rational], ...] = Field(
        default=(), description="(id, weight) of jobs completed since the last query."
    )
    machines: int = 1

    @property
    def front_ids(self) -> Tuple[int, ...]:
        return tuple(job_id for job_id, _ in self.front)

    @property
    def front_weights(self) -> Dict[int, Fraction]:
        return dict(self.front)


class Segment(BaseModel):
    model_config = ConfigDict(frozen=True)

    start: Rational
    end: Rational
    front: Tuple[int, ...]
    unfinished_weight: Rational
    rates: Dict[int, Rational]

    @property
    def length(self) -> Fraction:
        return self.end - self.start


class CompletionEvent(BaseModel):
    model_config = ConfigDict(frozen=True)

    job_id: int
    time: Rational


class Trace(BaseModel):
    model_config = ConfigDict(frozen=True)

    n: int
    machines: int = 1
    segments: Tuple[Segment, ...] = ()
    completions: Tuple[CompletionEvent, ...] = ()

    def to_jsonl(self) -> str:
        return "".join(segment.model_dump_json() + "\n" for segment in self.segments)


class ScheduleResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    completion_times: Tuple[Rational, ...]
    objective: Rational
    makespan: Rational

    def to_csv(self) -> str:
        lines = ["job_id,completion_num,completion_den"]
        for job_id, completion in enumerate(self.completion_times):
            lines.append(f"{job_id},{completion.numerator},{completion.denominator}")
        return "\n".join(lines) + "\n"


ViewObserver = Callable[[PolicyView], None]


class _Simulation:
    """Mutable state of a single run; never shared."""

    def __init__(self, instance: Instance, machines: int) -> None:
        self.instance = instance
        self.machines = machines
        self.remaining: List[Fraction] = list(instance.processing)
        self.missing_preds: List[int] = [len(preds) for preds in instance.predecessors]
        self.front: set[int] = set()
        self.completion: List[Optional[Fraction]] = [None] * instance.n
        self.pending = instance.n
        self.unfinished_weight = instance.total_weight()
        self.time = Fraction(0)
        self.revealed: List[int] = []
        self.completed: List[int] = []
        self.events: List[CompletionEvent] = []

    def reveal(self, job_ids: List[int]) -> None:
        """Reveal jobs, then complete zero-length front jobs in ascending id order."""
        zero: List[int] = []
        for job_id in job_ids:
            self.front.add(job_id)
            self.revealed.append(job_id)
            if self.remaining[job_id] == 0:
                heapq.heappush(zero, job_id)
        while zero:
            job_id = heapq.heappop(zero)
            for child in self._complete(job_id):
                self.front.add(child)
                self.revealed.append(child)
                if self.remaining[child] == 0:
                    heapq.heappush(zero, child)

    def _complete(self, job_id: int) -> List[int]:
        self.front.discard(job_id)
        self.remaining[job_id] = Fraction(0)
        self.completion[job_id] = self.time
        self.pending -= 1
        self.unfinished_weight -= self.instance.weights[job_id]
        self.completed.append(job_id)
        self.events.append(CompletionEvent(job_id=job_id, time=self.time))
        released: List[int] = []
        for child in self.instance.successors[job_id]:
            self.missing_preds[child] -= 1
            if self.missing_preds[child] == 0:
                released.append(child)
        return released

    def complete_batch(self, job_ids: List[int]) -> None:
        released: List[int] = []
        for job_id in sorted(job_ids):
            released.extend(self._complete(job_id))
        self.reveal(sorted(released))

    def view(self) -> PolicyView:
        weights = self.instance.weights
        view = PolicyView(
            time=self.time,
            front=tuple((job_id, weights[job_id]) for job_id in sorted(self.front)),
            revealed=tuple(self.revealed),
            revealed_by={
                job_id: self.instance.predecessors[job_id] for job_id in self.revealed
            },
            completed=tuple((job_id, weights[job_id]) for job_id in self.completed),
            machines=self.machines,
        )
        self.revealed, self.completed = [], []
        return view

    @property
    def finished(self) -> bool:
        return self.pending == 0


def check_rates(rates: RateVector, front: set[int], machines: int, time: Fraction) -> None:
    outside = sorted(job_id for job_id in rates if job_id not in front)
    if outside:
        raise RateOnNonFrontJobError(outside, time)
    bad = {job_id: rate for job_id, rate in rates.items() if rate < 0 or rate > 1}
    if bad:
        raise InfeasibleRatesError(
            f"rates outside [0, 1] at t={format_rational(time)}", rates=bad, time=time
        )
    total = rational_sum(rates.values())
    if total > machines:
        raise InfeasibleRatesError(
            f"rates sum to {format_rational(total)} > m = {machines}",
            total=total,
            machines=machines,
            time=time,
        )


def simulate(
    instance: Instance,
    policy: "Policy",
    machines: int = 1,
    *,
    observer: Optional[ViewObserver] = None,
    max_events: Optional[int] = None,
) -> Tuple[ScheduleResult, Trace]:
    """Run ``policy`` on ``instance`` with ``machines`` identical machines."""
    if machines < 1:
        raise ValueError("machine count must be at least 1")
    limit = get_settings().max_events if max_events is None else max_events
    runner = policy.spawn()
    state = _Simulation(instance, machines)
    state.reveal(list(instance.roots))
    segments: List[Segment] = []

    while not state.finished:
        if len(segments) >= limit:
            raise PolicyStallError(f"exceeded {limit} events", events=len(segments))
        view = state.view()
        if observer is not None:
            observer(view)
        rates = {job_id: Fraction(rate) for job_id, rate in runner.decide(view).items()}
        check_rates(rates, state.front, machines, state.time)
        active = {job_id: rate for job_id, rate in rates.items() if rate > 0}

        step: Optional[Fraction] = None
        for job_id, rate in active.items():
            candidate = state.remaining[job_id] / rate
            if step is None or candidate < step:
                step = candidate
        wakeup = runner.next_wakeup()
        if wakeup is not None and wakeup > state.time:
            until_wakeup = wakeup - state.time
            if step is None or until_wakeup < step:
                step = until_wakeup
        if step is None:
            raise PolicyStallError(
                f"no positive rate at t={format_rational(state.time)} with "
                f"{len(state.front)} front jobs",
                time=state.time,
                front=sorted(state.front),
            )

        segments.append(
            Segment.model_construct(
                start=state.time,
                end=state.time + step,
                front=tuple(sorted(state.front)),
                unfinished_weight=state.unfinished_weight,
                rates=dict(sorted(active.items())),
            )
        )
        finished: List[int] = []
        for job_id, rate in active.items():
            state.remaining[job_id] -= rate * step
            if state.remaining[job_id] == 0:
                finished.append(job_id)
        state.time += step
        state.complete_batch(finished)

    completion_times = tuple(time for time in state.completion if time is not None)
    objective = rational_sum(w * c for w, c in zip(instance.weights, completion_times))
    makespan = max(completion_times, default=Fraction(0))
    logger.debug("simulated %s on n=%d: %d segments", runner.label, instance.n, len(segments))
    result = ScheduleResult(
        completion_times=completion_times, objective=objective, makespan=makespan
    )
    trace = Trace.model_construct(
        n=instance.n,
        machines=machines,
        segments=tuple(segments),
        completions=tuple(state.events),
    )
    return result, trace


# --- McNaughton's wrap-around rule -------------------------------------------


class MachinePiece(BaseModel):
    model_config = ConfigDict(frozen=True)

    machine: int
    job_id: int
    start: Rational
    end: Rational


class MachineTimeline(BaseModel):
    model_config = ConfigDict(frozen=True)

    start: Rational
    end: Rational
    pieces: Tuple[MachinePiece, ...] = ()

    def for_machine(self, machine: int) -> List[MachinePiece]:
        return [piece for piece in self.pieces if piece.machine == machine]

    def for_job(self, job_id: int) -> List[MachinePiece]:
        return [piece for piece in self.pieces if piece.job_id == job_id]


def realize_mcnaughton(segment: Segment, machines: int) -> MachineTimeline:
    """Lay jobs (ascending id) contiguously over machines of capacity L, wrapping at L."""
    length = segment.length
    if length <= 0:
        raise InfeasibleSegmentError("segment length must be positive", start=segment.start)
    if any(rate < 0 or rate > 1 for rate in segment.rates.values()):
        raise InfeasibleSegmentError("segment rate outside [0, 1]", rates=segment.rates)
    if rational_sum(segment.rates.values()) > machines:
        raise InfeasibleSegmentError("segment rates exceed machine count", machines=machines)

    pieces: List[MachinePiece] = []
    machine, position = 0, Fraction(0)
    for job_id in sorted(segment.rates):
        load = segment.rates[job_id] * length
        while load > 0:
            if position == length:
                machine, position = machine + 1, Fraction(0)
            portion = min(load, length - position)
            pieces.append(
                MachinePiece(
                    machine=machine,
                    job_id=job_id,
                    start=segment.start + position,
                    end=segment.start + position + portion,
                )
            )
            position += portion
            load -= portion
    return MachineTimeline(start=segment.start, end=segment.end, pieces=tuple(pieces))


# --- rate-condition monitor --------------------------------------------------


def min_rho_witness(trace: Trace, instance: Instance) -> Optional[Fraction]:
    """Smallest rho with w(S(j)) <= rho * R_j * W(t) (single machine) or
    m * w(S(j)) / W(t) <= rho * R_j for R_j < 1 (parallel), over every segment.

    Returns None when some front job with w(S(j)) > 0 has rate 0 (no finite rho).
    """
    if trace.n != instance.n:
        raise TraceInstanceMismatchError(
            f"trace has {trace.n} jobs, instance has {instance.n}", trace_n=trace.n, n=instance.n
        )
    subtree_weight = successor_weights(instance)
    machines = trace.machines
    rho = Fraction(0)
    for segment in trace.segments:
        if any(job_id >= instance.n for job_id in segment.front):
            raise TraceInstanceMismatchError("trace references unknown jobs")
        total = segment.unfinished_weight
        for job_id in segment.front:
            rate = segment.rates.get(job_id, Fraction(0))
            if machines > 1 and rate == 1:
                continue
            weight = subtree_weight[job_id]
            if weight == 0:
                continue
            if rate == 0:
                return None
            rho = max(rho, machines * weight / (rate * total))
    return rho
