"""
Policy lookup by name, for the CLI, the API and the experiment runner.
"""

from __future__ import annotations

from fractions import Fraction
from typing import TYPE_CHECKING, Any, Callable, Dict, FrozenSet, List, Optional

from pydantic import BaseModel, ConfigDict, Field

from ..errors import MissingPredictionError, UnknownPolicyError
from ..rationals import parse_rational
from .actions import follow_action, follow_input
from .base import Policy
from .combinators import learning_augmented_wrr, robustify, time_share
from .orders import order_adaptive, order_static
from .weights import equal_share, wdeq_chains, wrr_adaptive, wrr_chains

if TYPE_CHECKING:
    from ..predictions import PredictionBundle


class PolicySpec(BaseModel):
    """A policy by registry name plus parameters, e.g.
    ``{"name": "order_static", "params": {"variant": "work_conserving"}}``."""

    model_config = ConfigDict(frozen=True)

    name: str
    params: Dict[str, Any] = Field(default_factory=dict)


# (bundle, params, machines) -> Policy
Builder = Callable[..., Policy]


class PolicyEntry(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    builder: Builder
    models: FrozenSet[str] = frozenset()
    description: str = ""


def _payload(bundle: Optional["PredictionBundle"], name: str, models: FrozenSet[str]) -> Any:
    if bundle is None or bundle.model not in models:
        raise MissingPredictionError(-1, f"{' or '.join(sorted(models))} prediction for {name}")
    if bundle.weights is not None:
        return bundle.weights
    if bundle.order is not None:
        return bundle.order
    return bundle.instance


def _order_static(bundle, params, machines):
    return order_static(
        _payload(bundle, "order_static", STATIC_ORDER), params.get("variant", "strict")
    )


def _follow_action(bundle, params, machines):
    order = _payload(bundle, "follow_action", ACTIONS)
    mode = "adaptive" if bundle.model == "actions_adaptive" else "static"
    return follow_action(order, mode)


def _time_share(bundle, params, machines):
    first = build_policy(PolicySpec.model_validate(params["first"]), bundle, machines)
    second = build_policy(
        PolicySpec.model_validate(params.get("second", {"name": "equal_share"})), bundle, machines
    )
    return time_share(first, second, parse_rational(params.get("share", Fraction(1, 2))))


STATIC_WEIGHTS = frozenset({"static_weights"})
ADAPTIVE_WEIGHTS = frozenset({"adaptive_weights"})
STATIC_ORDER = frozenset({"static_order"})
ADAPTIVE_ORDER = frozenset({"adaptive_order"})
ACTIONS = frozenset({"actions_static", "actions_adaptive"})
INPUT = frozenset({"input"})

POLICY_REGISTRY: Dict[str, PolicyEntry] = {
    "equal_share": PolicyEntry(
        builder=lambda bundle, params, machines: equal_share(),
        description="Every front job gets min{1, m/|F|}.",
    ),
    "wrr_chains": PolicyEntry(
        builder=lambda bundle, params, machines: wrr_chains(
            _payload(bundle, "wrr_chains", STATIC_WEIGHTS)
        ),
        models=STATIC_WEIGHTS,
        description="Weighted round robin on chains with static weight predictions.",
    ),
    "wdeq_chains": PolicyEntry(
        builder=lambda bundle, params, machines: wdeq_chains(
            _payload(bundle, "wdeq_chains", STATIC_WEIGHTS), int(params.get("machines", machines))
        ),
        models=STATIC_WEIGHTS,
        description="Weighted round robin on chains, capped for parallel machines.",
    ),
    "wrr_adaptive": PolicyEntry(
        builder=lambda bundle, params, machines: wrr_adaptive(
            _payload(bundle, "wrr_adaptive", ADAPTIVE_WEIGHTS)
        ),
        models=ADAPTIVE_WEIGHTS,
        description="Adaptive weighted round robin for out-forests.",
    ),
    "order_adaptive": PolicyEntry(
        builder=lambda bundle, params, machines: order_adaptive(
            _payload(bundle, "order_adaptive", ADAPTIVE_ORDER)
        ),
        models=ADAPTIVE_ORDER,
        description="Harmonic rates from an adaptive weight order.",
    ),
    "order_static": PolicyEntry(
        builder=_order_static,
        models=STATIC_ORDER,
        description="Harmonic rates from the initial weight order.",
    ),
    "follow_action": PolicyEntry(
        builder=_follow_action,
        models=ACTIONS,
        description="Nonpreemptively follow predicted priorities.",
    ),
    "follow_input": PolicyEntry(
        builder=lambda bundle, params, machines: follow_input(
            _payload(bundle, "follow_input", INPUT)
        ),
        models=INPUT,
        description="Follow the optimal schedule of a predicted chain instance.",
    ),
    "learning_augmented_wrr": PolicyEntry(
        builder=lambda bundle, params, machines: learning_augmented_wrr(
            _payload(bundle, "learning_augmented_wrr", STATIC_WEIGHTS)
        ),
        models=STATIC_WEIGHTS,
        description="Weighted round robin on chains time-shared with equal share.",
    ),
    "time_share": PolicyEntry(
        builder=_time_share, description="Time-share params.first and params.second."
    ),
}


def policy_names() -> List[str]:
    return sorted(POLICY_REGISTRY)


def lookup(name: str) -> PolicyEntry:
    try:
        return POLICY_REGISTRY[name]
    except KeyError:
        raise UnknownPolicyError(name, policy_names()) from None


def required_model(spec: PolicySpec) -> FrozenSet[str]:
    """Prediction models the policy accepts (empty when it needs none)."""
    entry = lookup(spec.name)
    if spec.name == "time_share":
        models = required_model(PolicySpec.model_validate(spec.params["first"]))
        second = spec.params.get("second")
        return models or (required_model(PolicySpec.model_validate(second)) if second else models)
    return entry.models


def check_spec(spec: PolicySpec) -> None:
    """Raise before any simulation if ``spec`` names an unknown policy."""
    lookup(spec.name)
    if spec.name == "time_share":
        if "first" not in spec.params:
            raise UnknownPolicyError("time_share without params.first", policy_names())
        check_spec(PolicySpec.model_validate(spec.params["first"]))
        if "second" in spec.params:
            check_spec(PolicySpec.model_validate(spec.params["second"]))


def build_policy(
    spec: PolicySpec, bundle: Optional["PredictionBundle"] = None, machines: int = 1
) -> Policy:
    check_spec(spec)
    policy = lookup(spec.name).builder(bundle, dict(spec.params), machines)
    if spec.params.get("robust"):
        policy = robustify(policy)
    return policy
