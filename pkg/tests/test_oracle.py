import itertools
from dataclasses import replace

import numpy as np
import pytest

from morphkv import (
    EvictionPolicyConfig,
    ModelConfig,
    RunConfig,
    optimal_subset,
    run,
    shadow_error,
)
from morphkv.errors import EmptyCache, InstanceTooLarge, InvalidParam, TraceMismatch
from morphkv.numerics import scaled_dot_attention
from morphkv.oracle import ENUMERATION_BOUND, subset_output_error


def instance(seed: int, n: int = 8, d: int = 4):
    rng = np.random.default_rng(seed)
    return rng.normal(size=d), rng.normal(size=(n, d)), rng.normal(size=(n, d))


class TestSubsetError:
    def test_full_subset_has_zero_error(self):
        q, keys, vals = instance(0)
        assert subset_output_error(q, keys, vals, range(8)) == 0.0

    def test_index_order_is_irrelevant(self):
        q, keys, vals = instance(1)
        assert subset_output_error(q, keys, vals, [5, 1, 3]) == subset_output_error(
            q, keys, vals, [1, 3, 5]
        )

    def test_matches_direct_recomputation(self):
        q, keys, vals = instance(2)
        idx = [0, 2, 6, 7]
        _, full_out = scaled_dot_attention(q, keys, vals)
        _, sub_out = scaled_dot_attention(q, keys[idx], vals[idx])
        expected = float(np.sqrt(((full_out - sub_out) ** 2).sum()))
        assert subset_output_error(q, keys, vals, idx) == pytest.approx(expected, abs=1e-15)


class TestOptimalSubset:
    def test_budget_equal_to_size_is_exact(self):
        q, keys, vals = instance(3)
        idx, err = optimal_subset(q, keys, vals, budget=8, recent_window=2)
        assert idx == tuple(range(8))
        assert err == 0.0

    def test_beats_every_enumerated_competitor(self):
        q, keys, vals = instance(4, n=9)
        budget, recent = 4, 2
        _, best = optimal_subset(q, keys, vals, budget, recent)
        forced = (7, 8)
        for combo in itertools.combinations(range(7), budget - 2):
            err = subset_output_error(q, keys, vals, combo + forced)
            assert best <= err + 1e-15

    def test_forced_recent_tail_is_always_included(self):
        q, keys, vals = instance(5, n=10)
        idx, _ = optimal_subset(q, keys, vals, budget=5, recent_window=3)
        assert idx[-3:] == (7, 8, 9)

    def test_unconstrained_search_is_at_least_as_good(self):
        for seed in range(10):
            q, keys, vals = instance(seed, n=9)
            _, constrained = optimal_subset(q, keys, vals, 4, 2, force_recent=True)
            _, free = optimal_subset(q, keys, vals, 4, 2, force_recent=False)
            assert free <= constrained + 1e-15

    def test_unconstrained_can_strictly_win(self):
        # Across seeds the free search must sometimes beat the pinned
        # tail, otherwise force_recent would be vacuous.
        wins = 0
        for seed in range(20):
            q, keys, vals = instance(seed, n=9)
            _, constrained = optimal_subset(q, keys, vals, 4, 2, force_recent=True)
            _, free = optimal_subset(q, keys, vals, 4, 2, force_recent=False)
            wins += free < constrained - 1e-12
        assert wins > 0

    def test_instance_beyond_bound_rejected(self):
        n = ENUMERATION_BOUND + 1
        q, keys, vals = instance(6, n=n)
        with pytest.raises(InstanceTooLarge):
            optimal_subset(q, keys, vals, 4, 2)

    def test_bound_is_inclusive(self):
        q, keys, vals = instance(7, n=ENUMERATION_BOUND, d=2)
        idx, err = optimal_subset(q, keys, vals, ENUMERATION_BOUND - 1, 2)
        assert len(idx) == ENUMERATION_BOUND - 1
        assert err >= 0.0

    def test_rejects_empty_and_bad_budget(self):
        q, keys, vals = instance(8)
        with pytest.raises(EmptyCache):
            optimal_subset(q, keys[:0], vals[:0], 1, 1)
        with pytest.raises(InvalidParam):
            optimal_subset(q, keys, vals, 0, 1)
        with pytest.raises(InvalidParam):
            optimal_subset(q, keys, vals, 9, 1)


class TestShadowError:
    MODEL = ModelConfig(n_layers=2, n_query_heads=4, n_kv_heads=2, head_dim=4, vocab_size=32, seed=31)

    def runs(self, policy_kind="scissorhands", steps=6):
        full_cfg = RunConfig(
            model=self.MODEL,
            policy=EvictionPolicyConfig(kind="full_attention", recent_window=4),
            prompt_length=6,
            decode_steps=steps,
            attention_snapshots=True,
        )
        full = run(full_cfg)
        policy_cfg = RunConfig(
            model=self.MODEL,
            policy=EvictionPolicyConfig(kind=policy_kind, recent_window=4),
            prompt_length=6,
            decode_steps=steps,
            attention_snapshots=True,
        )
        shadow = run(policy_cfg, forced_tokens=full.trace.consumed_tokens())
        return full, shadow

    def test_self_comparison_is_exactly_zero(self):
        full, _ = self.runs()
        for rec in shadow_error(full, full):
            assert rec.l2_error == 0.0

    def test_zero_until_first_eviction(self):
        # The window policy first evicts at the step that overflows it;
        # before that both runs hold identical caches, so every per-store
        # error must be exactly zero, and after it some error must appear.
        full, shadow = self.runs()
        first_evict = min(step for step, _, _, _ in shadow.trace.eviction_log())
        records = shadow_error(full, shadow)
        for rec in records:
            if rec.step < first_evict:
                assert rec.l2_error == 0.0
        assert any(rec.l2_error > 0 for rec in records if rec.step >= first_evict)

    def test_matches_direct_snapshot_recomputation(self):
        full, shadow = self.runs()
        records = shadow_error(full, shadow)
        by_key = {(r.step, r.layer, r.kv_head): r.l2_error for r in records}
        for step in range(len(full.attn_outputs)):
            for layer in range(self.MODEL.n_layers):
                for head in range(self.MODEL.n_kv_heads):
                    diff = full.attn_outputs[step][layer][head] - shadow.attn_outputs[step][layer][head]
                    expected = float(np.sqrt((diff * diff).sum()))
                    assert by_key[(step, layer, head)] == pytest.approx(expected, abs=1e-12)

    def test_record_grid_is_complete(self):
        full, shadow = self.runs(steps=5)
        records = shadow_error(full, shadow)
        assert len(records) == 5 * self.MODEL.n_layers * self.MODEL.n_kv_heads

    def test_rejects_different_seeds(self):
        full, _ = self.runs()
        other_cfg = replace(full.config, model=replace(self.MODEL, seed=99))
        other = run(other_cfg)
        with pytest.raises(TraceMismatch):
            shadow_error(full, other)

    def test_rejects_diverged_tokens(self):
        full, _ = self.runs()
        free = run(
            RunConfig(
                model=self.MODEL,
                policy=EvictionPolicyConfig(kind="scissorhands", recent_window=2),
                prompt_length=6,
                decode_steps=6,
                attention_snapshots=True,
            )
        )
        if free.trace.consumed_tokens() == full.trace.consumed_tokens():
            pytest.skip("free run happened to follow the reference trajectory")
        with pytest.raises(TraceMismatch):
            shadow_error(full, free)

    def test_rejects_missing_snapshots(self):
        full, shadow = self.runs()
        plain = run(replace(shadow.config, attention_snapshots=False),
                    forced_tokens=full.trace.consumed_tokens())
        with pytest.raises(TraceMismatch):
            shadow_error(full, plain)
