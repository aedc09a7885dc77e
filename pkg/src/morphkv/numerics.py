"""Dense float64 math shared by the decoder and the oracles.

Every operation is pure: results depend only on the numeric inputs, never
on global state, so equal seeds reproduce equal bits.
"""

from __future__ import annotations

import functools

import numpy as np

from .errors import EmptyCache, InvalidParam, InvalidShape, NonFiniteInput

ROPE_BASE = 10000.0


def softmax(logits) -> np.ndarray:
    """Numerically stable softmax over a 1-D array of finite logits.

    The max is subtracted before exponentiating, so adding a constant to
    every logit leaves the output unchanged and large logits cannot
    overflow. Entries are positive and sum to 1.
    """
    x = np.asarray(logits, dtype=np.float64)
    if x.ndim != 1 or x.size == 0:
        raise InvalidShape("softmax expects a non-empty 1-D array")
    if not np.all(np.isfinite(x)):
        raise NonFiniteInput("softmax input must be finite")
    weights = np.exp(x - x.max())
    return weights / weights.sum()


def scaled_dot_attention(q, keys, vals) -> tuple[np.ndarray, np.ndarray]:
    """Single-query attention over ``n`` cached key/value rows.

    Returns ``(weights, output)`` where ``weights`` is the softmax of
    ``keys @ q / sqrt(d)`` and ``output = weights @ vals``.
    """
    q = np.asarray(q, dtype=np.float64)
    k = np.asarray(keys, dtype=np.float64)
    v = np.asarray(vals, dtype=np.float64)
    if k.ndim != 2 or v.ndim != 2:
        raise InvalidShape("keys and vals must be 2-D (entries, head_dim)")
    if k.shape[0] == 0:
        raise EmptyCache("attention needs at least one cached entry")
    if q.ndim != 1 or k.shape[1] != q.shape[0] or v.shape != k.shape:
        raise InvalidShape("query/key/value dimensions disagree")
    weights = softmax(k @ q / np.sqrt(q.shape[0]))
    return weights, weights @ v


@functools.lru_cache(maxsize=None)
def _inv_freq(head_dim: int) -> np.ndarray:
    half = head_dim // 2
    freq = ROPE_BASE ** (-np.arange(half, dtype=np.float64) * 2.0 / head_dim)
    freq.flags.writeable = False
    return freq


def apply_rope(v, position: int) -> np.ndarray:
    """Rotary position encoding: rotate consecutive dimension pairs.

    Pair ``(2i, 2i+1)`` is rotated by ``position * ROPE_BASE**(-2i/d)``
    radians. Position 0 is the identity and the 2-norm is preserved.
    Accepts a single vector or a matrix of row vectors; the last axis is
    the head dimension.
    """
    x = np.asarray(v, dtype=np.float64)
    if x.ndim == 0 or x.shape[-1] % 2:
        raise InvalidShape("rotary encoding needs an even head dimension")
    if position < 0:
        raise InvalidParam("position must be >= 0")
    angles = position * _inv_freq(x.shape[-1])
    cos, sin = np.cos(angles), np.sin(angles)
    even, odd = x[..., 0::2], x[..., 1::2]
    out = np.empty_like(x)
    out[..., 0::2] = even * cos - odd * sin
    out[..., 1::2] = even * sin + odd * cos
    return out
