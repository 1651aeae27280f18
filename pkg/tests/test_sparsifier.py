import numpy as np
import pytest

from prunekit import (Callback, Model, Rng, ScheduleSpec, Sparsifier, SparsifyCallback, SparsifyPlan,
                      TrainConfig, fit, model_sparsity, run_lth, sparsity_of)

BLOBS = {"kind": "blobs2d", "n": 200, "separation": 4.0}


def mlp(seed=None):
    rng = None if seed is None else Rng(seed).child("init")
    return Model.from_specs(
        [{"kind": "dense", "in": 2, "out": 16}, {"kind": "relu"},
         {"kind": "dense", "in": 16, "out": 2}], rng)


def test_prune_layer_weight_granularity():
    model = mlp()
    model.layers[0].weights = np.array([[1.0, 2.0], [3.0, 4.0]])
    model.layers[0].n_in = model.layers[0].n_out = 2
    model.layers[0].bias = np.zeros(2)
    sp = Sparsifier(model, "weight", "local", "large_final")
    mask = sp.prune_layer(0, 50)
    np.testing.assert_array_equal(mask, [[0.0, 0.0], [1.0, 1.0]])
    np.testing.assert_array_equal(model.layers[0].weights, [[0.0, 0.0], [3.0, 4.0]])


def test_prune_layer_zero_sparsity():
    model = mlp(1)
    before = model.layers[0].weights.copy()
    Sparsifier(model, "weight", "local", "large_final").prune_layer(0, 0)
    np.testing.assert_array_equal(model.layers[0].weights, before)


def test_prune_layer_not_prunable():
    with pytest.raises(ValueError):
        Sparsifier(mlp(1), "weight", "local", "large_final").prune_layer(1, 50)


def test_prune_conv_filter_granularity():
    model = Model.from_specs([{"kind": "conv2d", "in_ch": 2, "out_ch": 2, "kx": 2, "ky": 2}],
                             Rng(2).child("init"))
    layer = model.layers[0]
    # block scores are means over i-slices; push slice 0 low
    layer.weights = np.abs(layer.weights) + 1.0
    layer.weights[0] *= 0.01
    sp = Sparsifier(model, "filter", "local", "large_final")
    mask = sp.prune_layer(0, 50)
    assert np.all(mask[0] == 0) and np.all(mask[1] == 1)


def test_prune_model_global_lands_in_low_layer():
    model = mlp()
    for layer in model.prunable_layers():
        layer.weights = np.ones((layer.n_in, layer.n_out))
        layer.bias = np.zeros(layer.n_out)
    model.layers[0].weights *= 0.001  # 32 weights, all tiny
    masks = Sparsifier(model, "weight", "global", "large_final").prune_model(50)
    # 64 total weights: floor(32) pruned, all in the small layer
    assert sparsity_of(masks[0]) == 1.0
    assert sparsity_of(masks[1]) == 0.0


def test_prune_model_local_counts():
    model = mlp(3)
    for s in (0, 10, 33, 50, 90, 100):
        m = mlp(3)
        masks = Sparsifier(m, "weight", "local", "large_final").prune_model(s)
        for layer, mask in zip(m.prunable_layers(), masks):
            expected = int(np.floor(mask.size * s / 100.0))
            assert int((mask == 0).sum()) == expected


def test_prune_model_full_sparsity_bias_only():
    model = mlp(4)
    x = Rng(5).normal((6, 2))
    Sparsifier(model, "weight", "local", "large_final").prune_model(100)
    logits = model.forward(x)
    # all weights zero: logits equal the output bias for every input
    np.testing.assert_allclose(logits, np.broadcast_to(model.layers[-1].bias, logits.shape))


def test_prune_model_history_criterion_requires_history():
    with pytest.raises(ValueError):
        Sparsifier(mlp(6), "weight", "local", "movement").prune_model(50)


def test_prune_model_per_layer_list():
    model = mlp(7)
    masks = Sparsifier(model, "weight", "local", "large_final").prune_model([0, 100])
    assert sparsity_of(masks[0]) == 0.0 and sparsity_of(masks[1]) == 1.0


def test_callback_pruning_at_initialization():
    plan = SparsifyPlan(sparsity=50.0, schedule=ScheduleSpec("one_shot", final_sparsity=50.0))
    cb = SparsifyCallback(plan)
    seen = []

    class Probe(Callback):
        def on_step_end(self, state):
            seen.append(model_sparsity(state["model"].prunable_layers()))

    cfg = TrainConfig(epochs=2, batch_size=32, learning_rate=0.1, seed=8, dataset=BLOBS)
    fit(mlp(8), cfg, callbacks=[cb, Probe()])
    assert seen[0] == 0.5  # at target from the very first step
    assert all(v == 0.5 for v in seen)


def test_masks_frozen_after_window():
    plan = SparsifyPlan(sparsity=50.0, criterion="movement",
                        schedule=ScheduleSpec("gradual", final_sparsity=50.0, end_epoch=3))
    cb = SparsifyCallback(plan)
    cfg = TrainConfig(epochs=6, batch_size=32, learning_rate=0.1, seed=9, dataset=BLOBS)
    model, log = fit(mlp(9), cfg, callbacks=[cb])
    spe = len(log) // 6
    hold = [r["model_sparsity"] for r in log[3 * spe:]]
    assert all(v == hold[0] for v in hold)


def test_gradual_run_nondecreasing_to_target():
    plan = SparsifyPlan(sparsity=50.0, schedule=ScheduleSpec("gradual", final_sparsity=50.0))
    cb = SparsifyCallback(plan)
    cfg = TrainConfig(epochs=10, batch_size=32, learning_rate=0.1, seed=10, dataset=BLOBS)
    model, log = fit(mlp(10), cfg, callbacks=[cb])
    sp = [r["model_sparsity"] for r in log]
    assert all(a <= b + 1e-12 for a, b in zip(sp, sp[1:]))
    n_blocks = sum(l.weights.size for l in model.prunable_layers())
    assert abs(sp[-1] - 0.5) <= 1.0 / 32  # one block-quantum of the smaller layer


def test_post_step_reapplication():
    plan = SparsifyPlan(sparsity=60.0, schedule=ScheduleSpec("one_shot", final_sparsity=60.0))
    cb = SparsifyCallback(plan)
    checks = []

    class Probe(Callback):
        def on_step_end(self, state):
            for layer in state["model"].prunable_layers():
                if layer.mask is not None:
                    checks.append(bool(np.all(layer.weights[layer.mask == 0] == 0)))

    cfg = TrainConfig(epochs=3, batch_size=32, learning_rate=0.1, seed=11, dataset=BLOBS)
    fit(mlp(11), cfg, callbacks=[cb, Probe()])
    assert checks and all(checks)


def lth_plan(n_steps=4, s=80.0, start=1, **kw):
    return SparsifyPlan(
        sparsity=s, granularity="weight", context="global", criterion="large_final",
        schedule=ScheduleSpec("iterative", final_sparsity=s, n_steps=n_steps, start_epoch=start),
        lth=True, save_tickets=True, **kw)


def test_lth_resets_and_nesting():
    cfg = TrainConfig(epochs=5, batch_size=32, learning_rate=0.1, seed=12, dataset=BLOBS)
    model, log, tickets = run_lth(mlp(12), cfg, lth_plan())
    assert len(tickets) == 4
    targets = [t.target_sparsity for t in tickets]
    assert targets == [20.0, 40.0, 60.0, 80.0]
    prev_pruned = None
    for ticket in tickets:
        flat_mask = np.concatenate([m.ravel() for m in ticket.masks])
        pruned = set(np.flatnonzero(flat_mask == 0))
        if prev_pruned is not None:
            assert prev_pruned <= pruned  # nested masks
        prev_pruned = pruned
        # sparsity within one block-quantum of the round target
        assert abs(ticket.mask_sparsity - ticket.target_sparsity / 100) <= 1.0 / 64


def test_lth_weights_equal_snapshot_after_reset():
    # instrumented subclass: right after every update, weights must be
    # exactly snapshot * mask
    class Checking(SparsifyCallback):
        checks = []

        def _update_masks(self, state, step):
            super()._update_masks(state, step)
            layers = [l for l in state["model"].layers if l.weights is not None]
            for layer, (w, b) in zip(layers, self.rewind_snapshot):
                if not layer.prunable:
                    continue
                expected = w * layer.mask
                Checking.checks.append(bool(np.array_equal(layer.weights, expected)))

    cfg = TrainConfig(epochs=5, batch_size=32, learning_rate=0.1, seed=13, dataset=BLOBS)
    fit(mlp(13), cfg, callbacks=[Checking(lth_plan())])
    assert Checking.checks and all(Checking.checks)


def test_lth_rewind_epoch_snapshot_differs_from_init():
    cfg = TrainConfig(epochs=5, batch_size=32, learning_rate=0.1, seed=14, dataset=BLOBS)
    model = mlp(14)
    w0 = [l.weights.copy() for l in model.prunable_layers()]
    plan = lth_plan(start=2, rewind_epoch=1)
    cb = SparsifyCallback(plan)
    fit(model, cfg, callbacks=[cb])
    snap_w = [w for w, b in cb.rewind_snapshot]
    assert any(not np.array_equal(a, b) for a, b in zip(w0, snap_w))


def test_lth_rewind_after_window_start_rejected():
    cfg = TrainConfig(epochs=5, batch_size=32, learning_rate=0.1, seed=15, dataset=BLOBS)
    plan = lth_plan(start=1, rewind_epoch=3)
    with pytest.raises(Exception):
        fit(mlp(15), cfg, callbacks=[SparsifyCallback(plan)])


def test_reset_end_restores_snapshot():
    cfg = TrainConfig(epochs=4, batch_size=32, learning_rate=0.1, seed=16, dataset=BLOBS)
    plan = SparsifyPlan(sparsity=50.0, reset_end=True,
                        schedule=ScheduleSpec("one_shot", final_sparsity=50.0))
    cb = SparsifyCallback(plan)
    model, _ = fit(mlp(16), cfg, callbacks=[cb])
    layers = [l for l in model.layers if l.weights is not None]
    for layer, (w, b) in zip(layers, cb.rewind_snapshot):
        if layer.prunable:
            np.testing.assert_array_equal(layer.weights, w * layer.mask)


def test_static_dynamic_consistency():
    total = 4
    cfg_dense = TrainConfig(epochs=total - 1, batch_size=32, learning_rate=0.1, seed=18,
                            dataset=BLOBS)
    dense_model, _ = fit(mlp(18), cfg_dense)
    static_masks = Sparsifier(dense_model.copy(), "weight", "global",
                              "large_final").prune_model(50)

    plan = SparsifyPlan(sparsity=50.0, context="global",
                        schedule=ScheduleSpec("one_shot", final_sparsity=50.0,
                                              start_epoch=total - 1, end_epoch=total))
    cb = SparsifyCallback(plan)
    cfg_dyn = TrainConfig(epochs=total, batch_size=32, learning_rate=0.1, seed=18, dataset=BLOBS)
    fit(mlp(18), cfg_dyn, callbacks=[cb])
    first_update = cb.update_log[0]
    for dyn, static in zip(first_update["masks"], static_masks):
        np.testing.assert_array_equal(dyn, static)
