"""Per (layer, KV head) KV stores and their attention-profile windows.

Alignment contract: every stored profile row has exactly one column per
live cache entry, in entry order. Appending an entry extends all existing
rows with a zero column (a token cannot have attended to entries created
after it); evicting entries deletes their columns from every row. Scores
are never renormalized after a deletion: they are only ever compared for
ranking, and keeping the raw weights keeps dumps auditable.

Stores evolve independently: after eviction two heads may retain different
position sets, which is why keys are cached post-rotation and positions
are absolute.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import ModelConfig
from .errors import InternalInvariantViolation, InvalidConfig, InvalidShape


@dataclass
class KvEntry:
    """One cached token: rotated key, value, and provenance."""

    key: np.ndarray
    value: np.ndarray
    abs_position: int
    token_id: int


def aggregate_group_scores(rows) -> np.ndarray:
    """Sum the attention rows of the query heads sharing one KV head.

    With one query head per KV head (plain multi-head attention) this is
    the identity on the single row.
    """
    try:
        arr = np.asarray(rows, dtype=np.float64)
    except ValueError as exc:
        raise InvalidShape("group rows must share one length") from exc
    if arr.ndim != 2 or arr.shape[0] < 1:
        raise InvalidShape("expected a non-empty stack of equal-length rows")
    return arr.sum(axis=0)


class AttentionProfileWindow:
    """The newest ``capacity`` aggregated attention rows of one store."""

    __slots__ = ("capacity", "width", "rows")

    def __init__(self, capacity: int):
        if capacity < 1:
            raise InvalidConfig("window capacity must be >= 1")
        self.capacity = capacity
        # Column count; kept in lockstep with the owning store's occupancy.
        self.width = 0
        # (producer position, scores) pairs, oldest first.
        self.rows: list[tuple[int, np.ndarray]] = []

    def pad_for_append(self) -> None:
        self.width += 1
        self.rows = [(pos, np.append(row, 0.0)) for pos, row in self.rows]

    def keep_columns(self, indices) -> None:
        idx = np.asarray(indices, dtype=np.intp)
        self.width = int(idx.size)
        self.rows = [(pos, row[idx]) for pos, row in self.rows]

    def record(self, scores, producer_position: int) -> None:
        row = np.asarray(scores, dtype=np.float64)
        if row.ndim != 1 or row.size != self.width:
            raise InvalidShape(
                f"profile row has {row.size} columns but the store holds {self.width} entries"
            )
        self.rows.append((producer_position, row.copy()))
        if len(self.rows) > self.capacity:
            del self.rows[0]


def record_profile(
    window: AttentionProfileWindow, aggregated, producer_position: int
) -> AttentionProfileWindow:
    """Append one aggregated row, dropping the oldest once past capacity."""
    window.record(aggregated, producer_position)
    return window


class KvCacheState:
    """Ordered entry lists plus profile windows, one pair per (layer, KV head).

    Mutations go through :meth:`append` and :meth:`keep` so the windows
    stay column-aligned with the stores. Evictions are journaled; the run
    loop drains the journal once per step via :meth:`pop_eviction_events`.
    """

    def __init__(self, n_layers: int, n_kv_heads: int, window_capacity: int):
        if n_layers < 1 or n_kv_heads < 1:
            raise InvalidConfig("need at least one layer and one KV head")
        self.n_layers = n_layers
        self.n_kv_heads = n_kv_heads
        self.window_capacity = window_capacity
        self.entries: list[list[list[KvEntry]]] = [
            [[] for _ in range(n_kv_heads)] for _ in range(n_layers)
        ]
        self.windows: list[list[AttentionProfileWindow]] = [
            [AttentionProfileWindow(window_capacity) for _ in range(n_kv_heads)]
            for _ in range(n_layers)
        ]
        self._journal: list[tuple[int, int, list[int]]] = []

    @classmethod
    def for_model(cls, model: ModelConfig, window_capacity: int) -> "KvCacheState":
        return cls(model.n_layers, model.n_kv_heads, window_capacity)

    def occupancy(self, layer: int, head: int) -> int:
        return len(self.entries[layer][head])

    def occupancies(self) -> list[list[int]]:
        return [[len(store) for store in layer] for layer in self.entries]

    def total_entries(self) -> int:
        return sum(len(store) for layer in self.entries for store in layer)

    def is_empty(self) -> bool:
        return self.total_entries() == 0

    def min_occupancy(self) -> int:
        return min(len(store) for layer in self.entries for store in layer)

    def next_position(self) -> int:
        store = self.entries[0][0]
        return store[-1].abs_position + 1 if store else 0

    def append(self, layer: int, head: int, entry: KvEntry) -> None:
        self.entries[layer][head].append(entry)
        self.windows[layer][head].pad_for_append()

    def keys_matrix(self, layer: int, head: int) -> np.ndarray:
        return np.stack([e.key for e in self.entries[layer][head]])

    def values_matrix(self, layer: int, head: int) -> np.ndarray:
        return np.stack([e.value for e in self.entries[layer][head]])

    def keep(self, layer: int, head: int, retained) -> list[int]:
        """Drop every entry not in ``retained`` (sorted, unique indices).

        Returns the absolute positions evicted and journals them. Profile
        rows lose the matching columns, so alignment survives.
        """
        store = self.entries[layer][head]
        idx = list(retained)
        if any(b <= a for a, b in zip(idx, idx[1:])) or (
            idx and not 0 <= idx[0] <= idx[-1] < len(store)
        ):
            raise InvalidShape("retained indices must be sorted, unique, and in range")
        keep_set = set(idx)
        evicted = [e.abs_position for i, e in enumerate(store) if i not in keep_set]
        if not evicted:
            return []
        self.entries[layer][head] = [store[i] for i in idx]
        self.windows[layer][head].keep_columns(idx)
        self._journal.append((layer, head, evicted))
        return evicted

    def record_step_profiles(self, step_output) -> list[list[np.ndarray]]:
        """Aggregate one step's group rows into every window.

        Returns the aggregated row per (layer, head) so callers that rank
        by received attention do not re-aggregate.
        """
        aggregated: list[list[np.ndarray]] = []
        for layer in range(self.n_layers):
            layer_rows = []
            for head in range(self.n_kv_heads):
                agg = aggregate_group_scores(step_output.attn_rows[layer][head])
                record_profile(self.windows[layer][head], agg, step_output.position)
                layer_rows.append(agg)
            aggregated.append(layer_rows)
        return aggregated

    def pop_eviction_events(self) -> list[tuple[int, int, list[int]]]:
        events, self._journal = self._journal, []
        return events

    def snapshot(self, fusion: str = "sum") -> dict:
        """JSON-ready dump: retained (position, token) pairs per store plus
        the current fused ranking scores over the distant entries."""
        from .morph import fuse

        layers = []
        for layer in range(self.n_layers):
            heads = []
            for head in range(self.n_kv_heads):
                window = self.windows[layer][head]
                scores = fuse(window, fusion).tolist() if window.rows else []
                heads.append(
                    {
                        "entries": [
                            [e.abs_position, e.token_id] for e in self.entries[layer][head]
                        ],
                        "fused_scores": scores,
                    }
                )
            layers.append(heads)
        return {"window_capacity": self.window_capacity, "layers": layers}

    def validate(self) -> None:
        """Debug-mode invariant sweep; raises on the first violation."""
        for layer in range(self.n_layers):
            for head in range(self.n_kv_heads):
                store = self.entries[layer][head]
                window = self.windows[layer][head]
                positions = [e.abs_position for e in store]
                if any(b <= a for a, b in zip(positions, positions[1:])):
                    raise InternalInvariantViolation(
                        f"store ({layer},{head}) positions not strictly increasing"
                    )
                if window.width != len(store):
                    raise InternalInvariantViolation(
                        f"window width {window.width} != occupancy {len(store)} at ({layer},{head})"
                    )
                if len(window.rows) > window.capacity:
                    raise InternalInvariantViolation("window row count exceeds capacity")
                for _, row in window.rows:
                    if row.size != len(store):
                        raise InternalInvariantViolation(
                            f"profile row length {row.size} != occupancy {len(store)}"
                        )
                for e in store:
                    if not (np.all(np.isfinite(e.key)) and np.all(np.isfinite(e.value))):
                        raise InternalInvariantViolation("non-finite cache entry")
