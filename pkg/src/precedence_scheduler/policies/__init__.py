"""
Scheduling policies. Each constructor returns a `Policy` template for
`precedence_scheduler.engine.simulate`.
"""

from .actions import follow_action, follow_input
from .base import ChainTracker, Policy
from .combinators import learning_augmented_wrr, robustify, time_share
from .orders import order_adaptive, order_static
from .registry import POLICY_REGISTRY, PolicySpec, build_policy, policy_names, required_model
from .weights import equal_share, wdeq_chains, wrr_adaptive, wrr_chains

__all__ = [
    "ChainTracker",
    "POLICY_REGISTRY",
    "Policy",
    "PolicySpec",
    "build_policy",
    "equal_share",
    "follow_action",
    "follow_input",
    "learning_augmented_wrr",
    "order_adaptive",
    "order_static",
    "policy_names",
    "required_model",
    "robustify",
    "time_share",
    "wdeq_chains",
    "wrr_adaptive",
    "wrr_chains",
]
