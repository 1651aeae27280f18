"""Turn per-block scores into binary masks under local or global context.

Rounding is floor (never overshoot the requested sparsity) and ties are
broken by block position (earlier blocks pruned first), so masks are
fully deterministic.
"""

from dataclasses import dataclass

import numpy as np

from .granularity import BlockPartition

CONTEXTS = ("local", "global", "per_layer_list")


@dataclass(frozen=True)
class ContextSpec:
    kind: str
    per_layer: tuple | None = None

    def __post_init__(self):
        if self.kind not in CONTEXTS:
            raise ValueError(f"unknown context {self.kind!r}; expected one of {CONTEXTS}")
        if (self.kind == "per_layer_list") != (self.per_layer is not None):
            raise ValueError("per_layer list present iff kind is 'per_layer_list'")
        if self.per_layer is not None and any(s < 0 or s > 100 for s in self.per_layer):
            raise ValueError("per-layer sparsities must lie in [0, 100]")


@dataclass(frozen=True)
class LayerScores:
    layer_id: int
    partition: BlockPartition
    block_scores: np.ndarray


def pruned_count(n_blocks: int, sparsity: float) -> int:
    if not 0 <= sparsity <= 100:
        raise ValueError(f"sparsity {sparsity} out of [0, 100]")
    return int(np.floor(n_blocks * sparsity / 100.0))


def _mask_from_pruned(partition: BlockPartition, pruned_block_idx: np.ndarray) -> np.ndarray:
    mask = np.ones(int(np.prod(partition.shape)))
    if len(pruned_block_idx):
        mask[partition.blocks[pruned_block_idx].ravel()] = 0.0
    return mask.reshape(partition.shape)


def select_local(layers: list[LayerScores], sparsity: float) -> list[np.ndarray]:
    """Per layer independently, prune the lowest-scoring blocks."""
    masks = []
    for layer in layers:
        k = pruned_count(len(layer.block_scores), sparsity)
        order = np.argsort(layer.block_scores, kind="stable")
        masks.append(_mask_from_pruned(layer.partition, order[:k]))
    return masks


def select_global(layers: list[LayerScores], sparsity: float) -> list[np.ndarray]:
    """Prune the lowest-scoring blocks over the concatenation of all layers."""
    all_scores = np.concatenate([layer.block_scores for layer in layers])
    k = pruned_count(len(all_scores), sparsity)
    order = np.argsort(all_scores, kind="stable")
    pruned = np.zeros(len(all_scores), dtype=bool)
    pruned[order[:k]] = True
    masks, offset = [], 0
    for layer in layers:
        n = len(layer.block_scores)
        masks.append(_mask_from_pruned(layer.partition, np.flatnonzero(pruned[offset:offset + n])))
        offset += n
    return masks


def select_per_layer(layers: list[LayerScores], per_layer) -> list[np.ndarray]:
    """select_local with each layer's own target sparsity."""
    if len(per_layer) != len(layers):
        raise ValueError(f"per-layer list length {len(per_layer)} != layer count {len(layers)}")
    return [select_local([layer], s)[0] for layer, s in zip(layers, per_layer)]


def select(layers: list[LayerScores], context: ContextSpec, sparsity) -> list[np.ndarray]:
    if context.kind == "local":
        return select_local(layers, sparsity)
    if context.kind == "global":
        return select_global(layers, sparsity)
    return select_per_layer(layers, context.per_layer if sparsity is None else sparsity)
