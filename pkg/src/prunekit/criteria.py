"""Importance criteria: score each weight from its current value and,
for history-based criteria, its value at the previous mask update.

Higher score = more important = kept. Pruned weights sit at zero, so
under large_final they re-prune themselves at the next recomputation.
"""

from dataclasses import dataclass, field

import numpy as np

from .rng import Rng
from .tensor import check_congruent

CRITERIA = ("random", "large_final", "magnitude_increase", "movement")
_NEEDS_HISTORY = frozenset({"magnitude_increase", "movement"})


@dataclass(frozen=True)
class Criterion:
    kind: str
    needs_history: bool = field(init=False)

    def __post_init__(self):
        if self.kind not in CRITERIA:
            raise ValueError(f"unknown criterion {self.kind!r}; expected one of {CRITERIA}")
        object.__setattr__(self, "needs_history", self.kind in _NEEDS_HISTORY)


@dataclass
class WeightHistory:
    """Snapshot of layer weights taken at the previous mask-update event."""
    wi: np.ndarray
    initialized_at: int = 0


def score(criterion: Criterion, wf: np.ndarray, wi: np.ndarray | None = None,
          rng: Rng | None = None) -> np.ndarray:
    if not np.all(np.isfinite(wf)):
        raise ValueError("non-finite weight values")
    if criterion.needs_history:
        if wi is None:
            raise ValueError(f"criterion {criterion.kind!r} requires a weight history")
        check_congruent(wf, wi)
    if criterion.kind == "random":
        if rng is None:
            raise ValueError("criterion 'random' requires an rng")
        return rng.normal(wf.shape)
    if criterion.kind == "large_final":
        return np.abs(wf)
    if criterion.kind == "magnitude_increase":
        return np.abs(wf) - np.abs(wi)
    return np.abs(wf - wi)  # movement


def update_history(history: WeightHistory, wf: np.ndarray, step: int = 0) -> WeightHistory:
    """Record wf as the new reference point; call right after each mask recomputation."""
    check_congruent(history.wi, wf)
    history.wi = wf.copy()
    history.initialized_at = step
    return history
