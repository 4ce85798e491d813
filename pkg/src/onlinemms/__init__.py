"""Online maximin-share allocation of goods and chores with exact arithmetic."""

from .core import (
    AdaptiveAdversary,
    Allocation,
    DecisionError,
    DimensionError,
    GuaranteeViolation,
    Instance,
    Kind,
    OnlineAllocator,
    OnlineMMSError,
    PreconditionViolation,
    ScriptedAllocator,
    agent_ratios,
    bundle_value,
    bundle_values,
    play_match,
    run_stream,
    to_scalar,
    worst_ratio,
)
from .oracle import CapacityError, certify, mms_all, mms_exact, mms_reduced

__all__ = [
    "AdaptiveAdversary",
    "Allocation",
    "CapacityError",
    "DecisionError",
    "DimensionError",
    "GuaranteeViolation",
    "Instance",
    "Kind",
    "OnlineAllocator",
    "OnlineMMSError",
    "PreconditionViolation",
    "ScriptedAllocator",
    "agent_ratios",
    "bundle_value",
    "bundle_values",
    "certify",
    "mms_all",
    "mms_exact",
    "mms_reduced",
    "play_match",
    "run_stream",
    "to_scalar",
    "worst_ratio",
]
