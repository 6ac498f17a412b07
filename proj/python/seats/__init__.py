# SPDX-License-Identifier: Apache-2.0
"""Stage-adaptive token selection for omni-modal prefill."""

from ._seats import (
    FLOPS_MODEL,
    BudgetPlan,
    InfeasibleError,
    LayerBoundaries,
    ModelConfig,
    RelevanceScores,
    RetentionSpec,
    SchedulePlan,
    SeatsError,
    SynthSpec,
    allocate,
    audio_intact_ratio_v,
    build_schedule,
    decode_ots_header,
    delta_oracle,
    greedy_maxmin,
    layer_flops,
    mean_received_attention,
    ots_roundtrip,
    overall_ratio,
    run_synthetic,
    select_topk,
    solve_delta,
    window_relevance,
)

__all__ = [
    "FLOPS_MODEL",
    "BudgetPlan",
    "InfeasibleError",
    "LayerBoundaries",
    "ModelConfig",
    "RelevanceScores",
    "RetentionSpec",
    "SchedulePlan",
    "SeatsError",
    "SynthSpec",
    "allocate",
    "audio_intact_ratio_v",
    "build_schedule",
    "decode_ots_header",
    "delta_oracle",
    "greedy_maxmin",
    "layer_flops",
    "mean_received_attention",
    "ots_roundtrip",
    "overall_ratio",
    "run_synthetic",
    "select_topk",
    "solve_delta",
    "window_relevance",
]
