"""Desk-scale autoregressive attention runtime with pluggable KV eviction.

The package is organized bottom up: `numerics` holds the shared float64
primitives, `model` the deterministic toy decoder, `cache` the per
(layer, KV head) stores with their attention-profile windows, `morph` the
constant-size selective retention policy, `baselines` the comparison
policies, `oracle` the exhaustive ground truth, `metrics` byte accounting
and degeneration measures, and `harness` the run loop and sweeps.
"""

from .cache import AttentionProfileWindow, KvCacheState, KvEntry, aggregate_group_scores, record_profile
from .config import EvictionPolicyConfig, ModelConfig
from .harness import (
    CompareReport,
    RunConfig,
    RunResult,
    StepRecord,
    StepTrace,
    compare,
    load_run_config,
    oracle_regression,
    run,
)
from .metrics import RepetitionReport, kv_bytes, relative_cache_ratio, repetition_rate
from .model import (
    DecoderWeights,
    StepOutput,
    decode_step,
    greedy_token,
    init_model,
    load_weights,
    prefill,
    save_weights,
    weights_checksum,
)
from .morph import fuse, morphkv_step, prefill_compress, select_retained
from .baselines import (
    CumulativeScoreState,
    h2o_step,
    scissorhands_step,
    snapkv_policy,
    streamingllm_step,
)
from .numerics import apply_rope, scaled_dot_attention, softmax
from .oracle import ErrorRecord, optimal_subset, shadow_error

__version__ = "0.1.0"

__all__ = [
    "AttentionProfileWindow",
    "CompareReport",
    "CumulativeScoreState",
    "DecoderWeights",
    "ErrorRecord",
    "EvictionPolicyConfig",
    "KvCacheState",
    "KvEntry",
    "ModelConfig",
    "RepetitionReport",
    "RunConfig",
    "RunResult",
    "StepOutput",
    "StepRecord",
    "StepTrace",
    "aggregate_group_scores",
    "apply_rope",
    "compare",
    "decode_step",
    "fuse",
    "greedy_token",
    "h2o_step",
    "init_model",
    "kv_bytes",
    "load_run_config",
    "load_weights",
    "morphkv_step",
    "optimal_subset",
    "oracle_regression",
    "prefill",
    "prefill_compress",
    "record_profile",
    "relative_cache_ratio",
    "repetition_rate",
    "run",
    "save_weights",
    "scaled_dot_attention",
    "scissorhands_step",
    "select_retained",
    "shadow_error",
    "snapkv_policy",
    "softmax",
    "streamingllm_step",
    "weights_checksum",
]
