"""Mask lifecycle orchestration.

Three entry points:

  * Sparsifier      -- static pruning of a layer or whole model
  * SparsifyCallback -- dynamic pruning during training, driven by a schedule
  * run_lth          -- lottery-ticket experiments (reset to a saved snapshot
                        after each pruning round)

Masks are recomputed from scratch at every update; pruned weights stay
zero because the callback re-applies the current masks after every
optimizer step.
"""

from dataclasses import dataclass, field

import numpy as np

from .criteria import Criterion, score
from .granularity import enumerate_blocks, aggregate_scores, parse_granularity
from .layers import Model
from .rng import Rng
from .schedule import ProgressClock, ScheduleSpec, current_target, window_steps
from .selection import ContextSpec, LayerScores, select
from .tensor import apply_mask, sparsity_of
from .train import Callback, accuracy


@dataclass
class SparsifyPlan:
    sparsity: float | list
    granularity: str = "weight"
    context: str = "local"
    criterion: str = "large_final"
    schedule: ScheduleSpec | None = None
    lth: bool = False
    rewind_epoch: int = 0
    reset_end: bool = False
    save_tickets: bool = False

    def __post_init__(self):
        Criterion(self.criterion)  # validates the name
        if self.context not in ("local", "global"):
            raise ValueError(f"unknown context {self.context!r}")
        if isinstance(self.sparsity, (list, tuple)):
            if any(not 0 <= s <= 100 for s in self.sparsity):
                raise ValueError("per-layer sparsities must lie in [0, 100]")
        elif not 0 <= self.sparsity <= 100:
            raise ValueError(f"sparsity {self.sparsity} out of [0, 100]")
        if self.rewind_epoch < 0:
            raise ValueError("rewind_epoch must be >= 0")

    @property
    def per_layer(self) -> bool:
        return isinstance(self.sparsity, (list, tuple))

    def context_spec(self) -> ContextSpec:
        if self.per_layer:
            return ContextSpec("per_layer_list", tuple(self.sparsity))
        return ContextSpec(self.context)


def layer_block_scores(layer, granularity: str, criterion: Criterion, rng: Rng | None) -> LayerScores:
    spec = parse_granularity(granularity, layer.weights.ndim)
    partition = enumerate_blocks(spec, layer.weights.shape)
    wi = layer.history
    if criterion.needs_history and wi is None:
        raise ValueError(f"criterion {criterion.kind!r} requires a weight history, none available")
    raw = score(criterion, layer.weights, wi, rng)
    return LayerScores(layer_id=0, partition=partition, block_scores=aggregate_scores(raw, partition))


def compute_masks(layers, granularity, context: ContextSpec, criterion: Criterion,
                  sparsity, rng: Rng | None = None) -> list[np.ndarray]:
    """Score -> aggregate -> select for a list of prunable layers."""
    scored = [layer_block_scores(layer, granularity, criterion, rng) for layer in layers]
    return select(scored, context, sparsity)


def model_sparsity(layers) -> float:
    masks = [l.mask for l in layers if l.mask is not None]
    if not masks:
        return 0.0
    return sparsity_of(np.concatenate([m.ravel() for m in masks]))


class Sparsifier:
    """Static pruning: compute masks for the current weights and apply them."""

    def __init__(self, model: Model, granularity: str, context: str, criterion: str,
                 rng: Rng | None = None):
        self.model = model
        self.granularity = granularity
        self.context = context
        self.criterion = Criterion(criterion)
        self.rng = rng

    def prune_layer(self, layer_index: int, sparsity: float) -> np.ndarray:
        layer = self.model.layers[layer_index]
        if not layer.prunable:
            raise ValueError(f"layer {layer_index} ({layer.kind}) is not prunable")
        mask = compute_masks([layer], self.granularity, ContextSpec("local"),
                             self.criterion, sparsity, self.rng)[0]
        layer.mask = mask
        layer.weights = apply_mask(layer.weights, mask)
        return mask

    def prune_model(self, sparsity) -> list[np.ndarray]:
        layers = self.model.prunable_layers()
        if not layers:
            raise ValueError("model has no prunable layer")
        if isinstance(sparsity, (list, tuple)):
            if len(sparsity) != len(layers):
                raise ValueError(f"per-layer list length {len(sparsity)} != prunable layer count {len(layers)}")
            context = ContextSpec("per_layer_list", tuple(sparsity))
        else:
            context = ContextSpec(self.context)
        masks = compute_masks(layers, self.granularity, context, self.criterion, sparsity, self.rng)
        for layer, mask in zip(layers, masks):
            layer.mask = mask
            layer.weights = apply_mask(layer.weights, mask)
        return masks


@dataclass
class Ticket:
    round: int
    target_sparsity: float
    mask_sparsity: float
    masks: list
    snapshot: list
    accuracy: float


class SparsifyCallback(Callback):
    """Dynamic pruning attached to the training loop.

    Per optimizer step the current masks are re-applied; at schedule
    boundaries inside the pruning window masks are recomputed from
    scratch. With lth set, weights are reset to the rewind snapshot
    (masked) after each pruning round.
    """

    def __init__(self, plan: SparsifyPlan, rng: Rng | None = None):
        if plan.schedule is None:
            raise ValueError("dynamic pruning needs a schedule")
        self.plan = plan
        self.rng = rng
        self.criterion = Criterion(plan.criterion)
        self.rewind_snapshot = None
        self.round_counter = 0
        self.tickets: list[Ticket] = []
        self.update_log: list[dict] = []
        self._pending: list[int] = []

    # -- internals ---------------------------------------------------------

    def _snapshot(self, state):
        self.rewind_snapshot = [(l.weights.copy(), l.bias.copy()) for l in state["model"].layers
                                if l.weights is not None]

    def _restore(self, state, masked: bool):
        model = state["model"]
        params = iter(self.rewind_snapshot)
        for layer in model.layers:
            if layer.weights is None:
                continue
            w, b = next(params)
            if masked and layer.prunable and layer.mask is not None:
                layer.weights = apply_mask(w.copy(), layer.mask)
            else:
                layer.weights = w.copy()
            layer.bias = b.copy()

    def _clock(self, state, step: int) -> ProgressClock:
        return ProgressClock(step, state["steps_per_epoch"], state["total_epochs"])

    def _targets(self, clock):
        spec = self.plan.schedule
        if self.plan.per_layer:
            return [current_target(clock, spec, s) for s in self.plan.sparsity]
        return current_target(clock, spec)

    def _update_masks(self, state, step: int):
        model = state["model"]
        layers = model.prunable_layers()
        target = self._targets(self._clock(state, step))
        context = self.plan.context_spec() if self.plan.per_layer else ContextSpec(self.plan.context)
        masks = compute_masks(layers, self.plan.granularity, context, self.criterion, target, self.rng)
        for layer, mask in zip(layers, masks):
            layer.mask = mask
            layer.weights = apply_mask(layer.weights, mask)
            layer.history = layer.weights.copy()
        scalar_target = float(np.mean(target)) if self.plan.per_layer else target
        self.update_log.append({"step": step, "target": scalar_target,
                                "masks": [m.copy() for m in masks]})
        if self.plan.lth:
            self._restore(state, masked=True)
            if scalar_target > self._last_round_target and scalar_target > 0:
                self.round_counter += 1
                self._last_round_target = scalar_target
                if self.plan.save_tickets:
                    self.tickets.append(Ticket(
                        round=self.round_counter,
                        target_sparsity=scalar_target,
                        mask_sparsity=model_sparsity(layers),
                        masks=[m.copy() for m in masks],
                        snapshot=[(w.copy(), b.copy()) for w, b in self.rewind_snapshot],
                        accuracy=accuracy(model, state["x_eval"], state["y_eval"]),
                    ))

    def _fire_pending(self, state, completed: int):
        while self._pending and self._pending[0] <= completed:
            self._update_masks(state, self._pending.pop(0))

    def _reapply(self, state):
        for layer in state["model"].prunable_layers():
            if layer.mask is not None:
                layer.weights = apply_mask(layer.weights, layer.mask)

    def _publish(self, state):
        clock = self._clock(state, state.get("global_step", 0))
        target = self._targets(clock)
        state["target_sparsity"] = float(np.mean(target)) if self.plan.per_layer else target
        state["model_sparsity"] = model_sparsity(state["model"].prunable_layers())

    # -- hooks -------------------------------------------------------------

    def on_train_begin(self, state):
        model, config = state["model"], state["config"]
        layers = model.prunable_layers()
        if not layers:
            raise ValueError("model has no prunable layer")
        spec = self.plan.schedule
        total = state["total_epochs"]
        end_epoch = total if spec.end_epoch is None else spec.end_epoch
        if end_epoch > total or spec.start_epoch >= end_epoch:
            raise ValueError(f"pruning window [{spec.start_epoch}, {end_epoch}] does not fit "
                             f"in {total} epochs")
        if self.plan.per_layer and len(self.plan.sparsity) != len(layers):
            raise ValueError(f"per-layer list length {len(self.plan.sparsity)} != "
                             f"prunable layer count {len(layers)}")
        if (self.plan.lth or self.plan.reset_end) and self.plan.rewind_epoch > spec.start_epoch:
            raise ValueError("rewind_epoch must not exceed the pruning window start")
        for layer in layers:
            parse_granularity(self.plan.granularity, layer.weights.ndim)
            layer.history = layer.weights.copy()
            layer.mask = None
        spe = state["steps_per_epoch"]
        clock = ProgressClock(0, spe, total)
        start_step, end_step = window_steps(spec, clock)
        steps = set()
        for epoch in range(spec.start_epoch, end_epoch):
            for j in range(spec.update_frequency):
                steps.add(epoch * spe + (j * spe) // spec.update_frequency)
        steps.add(end_step)
        self._pending = sorted(steps)
        self._last_round_target = 0.0
        if (self.plan.lth or self.plan.reset_end) and self.plan.rewind_epoch == 0:
            self._snapshot(state)
        self._fire_pending(state, 0)
        self._publish(state)

    def on_epoch_begin(self, state):
        if (self.plan.lth or self.plan.reset_end) and state["epoch"] == self.plan.rewind_epoch > 0:
            self._snapshot(state)
        self._fire_pending(state, state["epoch"] * state["steps_per_epoch"])

    def on_step_end(self, state):
        self._fire_pending(state, state["global_step"])
        self._reapply(state)
        self._publish(state)

    def on_epoch_end(self, state):
        self._fire_pending(state, (state["epoch"] + 1) * state["steps_per_epoch"])

    def on_train_end(self, state):
        if self.plan.reset_end:
            self._restore(state, masked=True)
            self._reapply(state)
        self._publish(state)


def run_lth(model: Model, config, plan: SparsifyPlan, rng: Rng | None = None):
    """Full lottery-ticket run; returns (model, metric_log, tickets)."""
    from .train import fit

    if not plan.lth:
        raise ValueError("run_lth needs a plan with lth set")
    callback = SparsifyCallback(plan, rng=rng)
    model, log = fit(model, config, callbacks=[callback])
    return model, log, callback.tickets
