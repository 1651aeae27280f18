"""Pruning granularities: which axes a removable block spans.

A granularity is a subset of a weight tensor's axes. A block is the set
of positions obtained by fixing the remaining (indexed) axes and letting
the spanned axes run free. The empty span is unstructured (single
weights); spanning every axis makes the whole layer one block.

Conv weights follow the [I, O, Kx, Ky] axis order, dense weights [I, O].
"""

from dataclasses import dataclass
from itertools import combinations
import math

import numpy as np

ALIASES_RANK4 = {
    "weight": frozenset(),
    "row": frozenset({3}),
    "kernel": frozenset({2, 3}),
    "filter": frozenset({1, 2, 3}),
    "shared_weight": frozenset({0}),
    "channel": frozenset({1}),
    "horizontal_slice": frozenset({1, 3}),
    "shared_kernel": frozenset({0, 2, 3}),
}

ALIASES_RANK2 = {
    "weight": frozenset(),
    "column": frozenset({0}),
    "row": frozenset({1}),
}

_ALIASES = {2: ALIASES_RANK2, 4: ALIASES_RANK4}


@dataclass(frozen=True)
class GranularitySpec:
    rank: int
    spanned_axes: frozenset
    alias: str | None = None


@dataclass(frozen=True)
class BlockPartition:
    spec: GranularitySpec
    shape: tuple
    blocks: np.ndarray  # [n_blocks, block_size] flat indices, lexicographic over indexed axes

    @property
    def n_blocks(self) -> int:
        return self.blocks.shape[0]

    @property
    def block_size(self) -> int:
        return self.blocks.shape[1]


def parse_granularity(name_or_axes, rank: int) -> GranularitySpec:
    """Resolve an alias string, a comma-separated axis string, or an axis iterable."""
    if rank not in (2, 4):
        raise ValueError(f"unsupported rank {rank}: expected 2 or 4")
    if isinstance(name_or_axes, str):
        name = name_or_axes.strip()
        if name in _ALIASES[rank]:
            return GranularitySpec(rank, _ALIASES[rank][name], alias=name)
        if name in _ALIASES[6 - rank]:
            raise ValueError(f"granularity {name!r} is not defined for rank {rank}")
        try:
            axes = frozenset(int(tok) for tok in name.split(",") if tok.strip() != "")
        except ValueError:
            raise ValueError(f"unknown granularity {name!r} for rank {rank}") from None
    else:
        axes = frozenset(int(a) for a in name_or_axes)
    if any(a < 0 or a >= rank for a in axes):
        raise ValueError(f"granularity axes {sorted(axes)} out of range for rank {rank}")
    return GranularitySpec(rank, axes)


def all_specs(rank: int):
    """Every distinct granularity for the rank (16 for rank 4, 4 for rank 2)."""
    for k in range(rank + 1):
        for axes in combinations(range(rank), k):
            yield GranularitySpec(rank, frozenset(axes))


def enumerate_blocks(spec: GranularitySpec, shape) -> BlockPartition:
    """Partition all flat indices of `shape` into blocks under `spec`.

    Blocks are ordered lexicographically over the indexed (non-spanned)
    axes so downstream masks are reproducible.
    """
    shape = tuple(int(s) for s in shape)
    if spec.rank != len(shape):
        raise ValueError(f"rank mismatch: spec rank {spec.rank}, shape {shape}")
    indexed = [ax for ax in range(spec.rank) if ax not in spec.spanned_axes]
    spanned = sorted(spec.spanned_axes)
    flat = np.arange(math.prod(shape)).reshape(shape)
    n_blocks = math.prod(shape[ax] for ax in indexed) if indexed else 1
    blocks = flat.transpose(indexed + spanned).reshape(n_blocks, -1)
    return BlockPartition(spec=spec, shape=shape, blocks=blocks)


def aggregate_scores(scores: np.ndarray, partition: BlockPartition) -> np.ndarray:
    """Per-block score = mean of member scores, in partition block order."""
    if tuple(scores.shape) != partition.shape:
        raise ValueError(f"shape mismatch: scores {scores.shape}, partition {partition.shape}")
    return scores.ravel()[partition.blocks].mean(axis=1)
