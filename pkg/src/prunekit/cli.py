"""Command-line experiment runner.

Subcommands: run, schedule, prune, lth, inspect. Exit codes: 0 success,
1 runtime failure, 2 config/usage error. PRUNEKIT_OUTPUT_ROOT overrides
the output root directory; --seed overrides the config seed.
"""

import argparse
import csv
import os
import sys
from pathlib import Path

import numpy as np

from . import checkpoint
from .config import ConfigError, load_config
from .criteria import CRITERIA
from .granularity import parse_granularity, enumerate_blocks
from .rng import Rng
from .schedule import BUILTIN_SCHEDULES, ScheduleSpec, _custom_registry, eval_schedule
from .sparsifier import Sparsifier, SparsifyCallback, model_sparsity
from .svgplot import line_chart
from .tensor import sparsity_of
from .train import fit


def _out_root() -> Path:
    return Path(os.environ.get("PRUNEKIT_OUTPUT_ROOT", "."))


def _run_dir(config) -> Path:
    sub = config.output_dir or f"{config.name}-seed{config.seed}"
    path = _out_root() / sub
    path.mkdir(parents=True, exist_ok=True)
    return path


def _fmt(v) -> str:
    return repr(float(v)) if isinstance(v, float) else str(v)


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _plan_dict(plan) -> dict:
    sched = plan.schedule
    return {
        "sparsity": list(plan.sparsity) if plan.per_layer else plan.sparsity,
        "granularity": plan.granularity, "context": plan.context,
        "criterion": plan.criterion, "lth": plan.lth,
        "rewind_epoch": plan.rewind_epoch, "reset_end": plan.reset_end,
        "save_tickets": plan.save_tickets,
        "schedule": None if sched is None else {
            "kind": sched.kind, "final_sparsity": sched.final_sparsity,
            "start_epoch": sched.start_epoch, "end_epoch": sched.end_epoch,
            "update_frequency": sched.update_frequency, "n_steps": sched.n_steps,
            "alpha": sched.alpha, "beta": sched.beta,
        },
    }


def _metrics_rows(log):
    return [(r["epoch"], r["step"], r["train_loss"], r["train_acc"],
             r["model_sparsity"], r["target_sparsity"]) for r in log]


METRICS_HEADER = ["epoch", "step", "train_loss", "train_acc", "model_sparsity", "target_sparsity"]


def cmd_run(args) -> int:
    config = load_config(args.config, seed_override=args.seed)
    out = _run_dir(config)
    rng = Rng(config.seed)
    model = config.build_model(rng.child("init"))
    callbacks = []
    plan = config.plan
    if plan is not None:
        callbacks.append(SparsifyCallback(plan, rng=rng.child("criterion")))

    def abort_handler(state):
        checkpoint.save(out / "crash_checkpoint.json", state["model"],
                        meta={"name": config.name, "seed": config.seed, "aborted": True})

    model, log = fit(model, config.train, callbacks=callbacks, abort_handler=abort_handler)
    _write_csv(out / "metrics.csv", METRICS_HEADER, _metrics_rows(log))
    snapshot = callbacks[0].rewind_snapshot if callbacks else None
    checkpoint.save(out / "checkpoint.json", model,
                    rewind_snapshot=snapshot,
                    plan=None if plan is None else _plan_dict(plan),
                    metrics_tail=_metrics_rows(log)[-5:],
                    meta={"name": config.name, "seed": config.seed})
    last = log[-1]
    with open(out / "summary.txt", "w") as fh:
        fh.write(f"experiment: {config.name}\nseed: {config.seed}\n"
                 f"epochs: {config.train.epochs}\n"
                 f"final train_loss: {last['train_loss']:.6f}\n"
                 f"final train_acc: {last['train_acc']:.4f}\n"
                 f"final model_sparsity: {last['model_sparsity']:.4f}\n")
    line_chart([("train_loss", [i for i in range(len(log))], [r["train_loss"] for r in log]),
                ("model_sparsity/100", [i for i in range(len(log))],
                 [r["model_sparsity"] for r in log])],
               out / "metrics.svg", title=config.name, xlabel="step")
    print(f"wrote {out}/metrics.csv, checkpoint.json, summary.txt")
    return 0


def cmd_schedule(args) -> int:
    if args.kind not in BUILTIN_SCHEDULES and args.kind not in _custom_registry:
        print(f"unknown schedule kind {args.kind!r}", file=sys.stderr)
        return 2
    spec = ScheduleSpec(kind=args.kind, final_sparsity=args.sparsity,
                        n_steps=args.n_steps, alpha=args.alpha, beta=args.beta)
    ts = [i / (args.samples - 1) for i in range(args.samples)]
    values = [eval_schedule(spec, t) for t in ts]
    out = _out_root()
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(out / f"schedule_{args.kind}.csv", ["t", "sparsity"], list(zip(ts, values)))
    line_chart([(args.kind, ts, values)], out / f"schedule_{args.kind}.svg",
               title=f"{args.kind} schedule", xlabel="t", ylabel="sparsity %")
    print(f"wrote schedule_{args.kind}.csv and schedule_{args.kind}.svg")
    return 0


def cmd_prune(args) -> int:
    ckpt = checkpoint.load(args.checkpoint)
    model = ckpt.model
    sp = Sparsifier(model, args.granularity, args.context, args.criterion,
                    rng=Rng(args.seed) if args.seed is not None else Rng(0))
    sp.prune_model(args.sparsity)
    out_path = args.out or str(args.checkpoint) + ".pruned.json"
    plan = {"sparsity": args.sparsity, "granularity": args.granularity,
            "context": args.context, "criterion": args.criterion, "schedule": None,
            "lth": False, "rewind_epoch": 0, "reset_end": False, "save_tickets": False}
    checkpoint.save(out_path, model, plan=plan, meta=dict(ckpt.meta, pruned=True))
    print(f"wrote {out_path}")
    for i, layer in enumerate(model.prunable_layers()):
        print(f"layer {i} ({layer.kind} {list(layer.weights.shape)}): "
              f"sparsity {sparsity_of(layer.mask):.4f}")
    print(f"model sparsity: {model_sparsity(model.prunable_layers()):.4f}")
    return 0


def cmd_lth(args) -> int:
    config = load_config(args.config, seed_override=args.seed)
    if config.plan is None or not config.plan.lth:
        raise ConfigError("prune.lth", "lth command needs a config with lth enabled")
    plan = config.plan
    if not plan.save_tickets:
        plan.save_tickets = True
    out = _run_dir(config)
    rng = Rng(config.seed)
    model = config.build_model(rng.child("init"))
    callback = SparsifyCallback(plan, rng=rng.child("criterion"))
    model, log = fit(model, config.train, callbacks=[callback])
    _write_csv(out / "metrics.csv", METRICS_HEADER, _metrics_rows(log))
    rows = []
    for ticket in callback.tickets:
        ticket_model = config.build_model()
        for layer, (w, b) in zip(ticket_model.prunable_layers(), ticket.snapshot):
            layer.weights = w.copy()
            layer.bias = b.copy()
        for layer, mask in zip(ticket_model.prunable_layers(), ticket.masks):
            layer.mask = mask.copy()
            layer.weights = layer.weights * mask
        checkpoint.save(out / f"ticket_{ticket.round}.json", ticket_model,
                        rewind_snapshot=ticket.snapshot, plan=_plan_dict(plan),
                        meta={"name": config.name, "seed": config.seed, "round": ticket.round,
                              "target_sparsity": ticket.target_sparsity})
        rows.append((ticket.round, ticket.target_sparsity, ticket.accuracy))
    _write_csv(out / "rounds.csv", ["round", "sparsity", "accuracy"], rows)
    checkpoint.save(out / "checkpoint.json", model,
                    rewind_snapshot=callback.rewind_snapshot, plan=_plan_dict(plan),
                    metrics_tail=_metrics_rows(log)[-5:],
                    meta={"name": config.name, "seed": config.seed})
    print(f"wrote {len(rows)} tickets and rounds.csv to {out}")
    return 0


def cmd_inspect(args) -> int:
    ckpt = checkpoint.load(args.checkpoint)
    failures = []
    all_masks = []
    granularity = (ckpt.plan or {}).get("granularity")
    for i, layer in enumerate(ckpt.model.layers):
        if not layer.prunable:
            continue
        shape = list(layer.weights.shape)
        if layer.mask is None:
            print(f"layer {i} ({layer.kind} {shape}): no mask, sparsity 0.0000")
            continue
        bad = (layer.mask != 0) & (layer.mask != 1)
        if np.any(bad):
            failures.append(f"layer {i}: mask contains non-binary value "
                            f"{layer.mask.ravel()[np.argmax(bad.ravel())]}")
            continue
        purity = "n/a"
        if granularity is not None:
            spec = parse_granularity(granularity, layer.weights.ndim)
            blocks = enumerate_blocks(spec, layer.weights.shape).blocks
            vals = layer.mask.ravel()[blocks]
            pure = bool(np.all((vals.min(axis=1) == vals.max(axis=1))))
            purity = "ok" if pure else "VIOLATED"
            if not pure:
                failures.append(f"layer {i}: mask is not block-pure under {granularity!r}")
        print(f"layer {i} ({layer.kind} {shape}): sparsity {sparsity_of(layer.mask):.4f}, "
              f"blocks {purity}")
        all_masks.append(layer.mask.ravel())
    if all_masks:
        print(f"global sparsity: {sparsity_of(np.concatenate(all_masks)):.4f}")
    if failures:
        for f in failures:
            print(f"integrity failure: {f}", file=sys.stderr)
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="prunekit",
                                     description="declarative sparsification experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="train with optional dynamic pruning")
    p_run.add_argument("config")
    p_run.add_argument("--seed", type=int, default=None)
    p_run.set_defaults(func=cmd_run)

    p_sched = sub.add_parser("schedule", help="sample a schedule to CSV + SVG")
    p_sched.add_argument("kind")
    p_sched.add_argument("--samples", type=int, default=101)
    p_sched.add_argument("--sparsity", type=float, default=50.0)
    p_sched.add_argument("--alpha", type=float, default=14.0)
    p_sched.add_argument("--beta", type=float, default=6.0)
    p_sched.add_argument("--n-steps", type=int, default=5)
    p_sched.set_defaults(func=cmd_schedule)

    p_prune = sub.add_parser("prune", help="statically prune a checkpoint")
    p_prune.add_argument("checkpoint")
    p_prune.add_argument("--sparsity", type=float, required=True)
    p_prune.add_argument("--granularity", default="weight")
    p_prune.add_argument("--context", default="local", choices=["local", "global"])
    p_prune.add_argument("--criterion", default="large_final", choices=list(CRITERIA))
    p_prune.add_argument("--seed", type=int, default=None)
    p_prune.add_argument("--out", default=None)
    p_prune.set_defaults(func=cmd_prune)

    p_lth = sub.add_parser("lth", help="run a lottery-ticket experiment")
    p_lth.add_argument("config")
    p_lth.add_argument("--seed", type=int, default=None)
    p_lth.set_defaults(func=cmd_lth)

    p_inspect = sub.add_parser("inspect", help="report checkpoint contents and integrity")
    p_inspect.add_argument("checkpoint")
    p_inspect.set_defaults(func=cmd_inspect)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
