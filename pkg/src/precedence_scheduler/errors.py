"""
Exception hierarchy. Every error carries the offending ids/values in ``details``
and renders to a machine-readable payload for the CLI and the API.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Any, Optional

from .rationals import format_rational


class SchedulingError(Exception):
    def __init__(self, message: str, **details: Any) -> None:
        super().__init__(message)
        self.message = message
        self.details = details

    def to_payload(self) -> dict[str, Any]:
        return {
            "error": type(self).__name__,
            "message": self.message,
            "details": {key: _jsonable(value) for key, value in self.details.items()},
        }


def _jsonable(value: Any) -> Any:
    if isinstance(value, Fraction):
        return format_rational(value)
    if isinstance(value, (list, tuple, set, frozenset)):
        items = sorted(value) if isinstance(value, (set, frozenset)) else value
        return [_jsonable(item) for item in items]
    if isinstance(value, dict):
        return {str(key): _jsonable(item) for key, item in value.items()}
    if hasattr(value, "model_dump"):
        return value.model_dump(mode="json")
    return value


# --- core --------------------------------------------------------------------


class InstanceValidationError(SchedulingError):
    def __init__(self, defects: list[Any]) -> None:
        summary = "; ".join(defect.describe() for defect in defects)
        super().__init__(f"invalid instance: {summary}", defects=defects)
        self.defects = defects


class EmptyInstanceError(SchedulingError):
    pass


class UnknownIdError(SchedulingError):
    def __init__(self, job_id: int) -> None:
        super().__init__(f"unknown job id {job_id}", job_id=job_id)


# --- engine ------------------------------------------------------------------


class InfeasibleRatesError(SchedulingError):
    pass


class RateOnNonFrontJobError(SchedulingError):
    def __init__(self, job_ids: list[int], time: Any) -> None:
        super().__init__(
            f"rates assigned to jobs outside the front set: {job_ids}",
            job_ids=job_ids,
            time=time,
        )


class PolicyStallError(SchedulingError):
    pass


class InfeasibleSegmentError(SchedulingError):
    pass


class TraceInstanceMismatchError(SchedulingError):
    pass


# --- policies ----------------------------------------------------------------


class MissingPredictionError(SchedulingError):
    def __init__(self, job_id: int, what: str = "prediction") -> None:
        super().__init__(f"no {what} for job {job_id}", job_id=job_id)


class BranchingDetectedError(SchedulingError):
    pass


class OracleFailureError(SchedulingError):
    pass


class OrderNotTotalError(SchedulingError):
    pass


class MissingInitialJobError(SchedulingError):
    pass


class TopologyMismatchError(SchedulingError):
    pass


class UnmatchedChainError(SchedulingError):
    pass


class UnknownPolicyError(SchedulingError):
    def __init__(self, name: str, known: Optional[list[str]] = None) -> None:
        super().__init__(f"unknown policy {name!r}", name=name, known=known or [])


# --- oracles / predictions ---------------------------------------------------


class TooLargeError(SchedulingError):
    def __init__(self, n: int, limit: int, what: str = "brute force") -> None:
        super().__init__(f"{what} limited to n <= {limit}, got n = {n}", n=n, limit=limit)


class UndefinedAverageError(SchedulingError):
    def __init__(self, job_id: int) -> None:
        super().__init__(f"a(S({job_id})) undefined: p(S({job_id})) = 0", job_id=job_id)


class IncompatibleNoiseError(SchedulingError):
    pass


class HistoryMismatchError(SchedulingError):
    pass


class UnitProcessingRequiredError(SchedulingError):
    pass


# --- adversarial -------------------------------------------------------------


class OutOfRangeError(SchedulingError):
    pass


class NonIntegralLengthError(SchedulingError):
    pass


# --- experiments -------------------------------------------------------------


class RatioBelowOneError(SchedulingError):
    pass
