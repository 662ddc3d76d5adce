"""Command-line entry point wiring the pipeline into reproducible runs.

Subcommands: gen-data, preprocess, train, eval, prune, profile,
latency-curve. Every run prints its fully resolved configuration; failures
print one machine-parsable `ERROR <ExceptionName>: message` line to stderr
and exit 1 (argparse usage errors exit 2).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import complexity, evaluation, pruning
from .models import (
    ModelSpec,
    TrainConfig,
    load_checkpoint,
    save_checkpoint,
    train,
)
from .radar_dsp import (
    preprocess_sequence,
    read_rd_sequence,
    write_rd_sequence,
)
from .scene_sim import build_dataset, read_manifest, read_recording, write_manifest

CONFIG_KEYS = ("kind", "epochs", "batch", "lr", "seed", "n_classes", "augment")


def read_config_file(path: str | Path) -> dict[str, str]:
    """Parse `key=value` lines; unknown keys are rejected."""
    out: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for ln, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if not sep or not value:
                raise ValueError(f"{path}:{ln}: expected key=value, got {line!r}")
            if key not in CONFIG_KEYS:
                raise ValueError(
                    f"{path}:{ln}: unknown config key {key!r} "
                    f"(known keys: {', '.join(CONFIG_KEYS)})"
                )
            out[key] = value
    return out


def _parse_bool(value: str) -> bool:
    low = value.lower()
    if low in ("1", "true", "on", "yes"):
        return True
    if low in ("0", "false", "off", "no"):
        return False
    raise ValueError(f"expected a boolean, got {value!r}")


def load_dataset(data: str | Path):
    """Load RD sequences from a manifest (dir or file); .spkr entries are preprocessed."""
    path = Path(data)
    manifest = path / "manifest.txt" if path.is_dir() else path
    if not manifest.exists():
        raise FileNotFoundError(f"no manifest at {manifest}")
    seqs = []
    for entry, label in read_manifest(manifest):
        if entry.suffix == ".rdsq":
            seq = read_rd_sequence(entry)
        else:
            seq = preprocess_sequence(read_recording(entry))
        if seq.label != label:
            raise ValueError(f"{entry}: file label {seq.label} != manifest label {label}")
        seqs.append(seq)
    return seqs


def _log_config(args: dict) -> None:
    for key in sorted(args):
        print(f"config {key}={args[key]}")


def cmd_gen_data(args) -> int:
    _log_config(
        {
            "classes": args.classes,
            "per_class": args.per_class,
            "seed": args.seed,
            "noise_sigma": args.noise_sigma,
            "n_chirps": args.n_chirps,
            "out": args.out,
        }
    )
    rng = np.random.default_rng(args.seed)
    manifest = build_dataset(
        args.per_class,
        args.classes,
        rng,
        args.out,
        n_chirps=args.n_chirps,
        noise_sigma=args.noise_sigma,
    )
    print(f"wrote {manifest}")
    return 0


def cmd_preprocess(args) -> int:
    _log_config({"data": args.data, "out": args.out})
    src = Path(args.data)
    manifest = src / "manifest.txt" if src.is_dir() else src
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    entries = []
    for entry, label in read_manifest(manifest):
        seq = preprocess_sequence(read_recording(entry))
        name = entry.stem + ".rdsq"
        write_rd_sequence(seq, out_dir / name)
        entries.append((name, label))
    write_manifest(entries, out_dir / "manifest.txt")
    print(f"wrote {out_dir / 'manifest.txt'}")
    return 0


def _train_config_from(args) -> tuple[ModelSpec, TrainConfig]:
    settings = {
        "kind": None,
        "epochs": "30",
        "batch": "16",
        "lr": "0.001",
        "seed": "0",
        "n_classes": "4",
        "augment": "on",
    }
    if args.config:
        settings.update(read_config_file(args.config))
    for key in CONFIG_KEYS:
        flag = getattr(args, key, None)
        if flag is not None:
            settings[key] = str(flag)
    if settings["kind"] is None:
        raise ValueError("model kind missing: pass --kind or a config file with kind=")
    spec = ModelSpec(kind=settings["kind"], n_classes=int(settings["n_classes"]))
    cfg = TrainConfig(
        epochs=int(settings["epochs"]),
        batch_size=int(settings["batch"]),
        lr=float(settings["lr"]),
        seed=int(settings["seed"]),
        augment=_parse_bool(settings["augment"]),
    )
    _log_config(settings)
    return spec, cfg


def cmd_train(args) -> int:
    spec, cfg = _train_config_from(args)
    data = load_dataset(args.data)
    model, history = train(spec, data, cfg)
    save_checkpoint(model, args.out)
    print(f"wrote {args.out}")
    if args.history:
        with open(args.history, "w", encoding="utf-8") as fh:
            for e, (loss, acc) in enumerate(zip(history.train_loss, history.val_accuracy)):
                fh.write(f"{e},{loss:.6f},{acc:.6f}\n")
        print(f"wrote {args.history}")
    print(
        f"best_epoch={history.best_epoch} "
        f"best_val_accuracy={history.best_val_accuracy:.6f}"
    )
    return 0


def cmd_eval(args) -> int:
    _log_config({"checkpoint": args.checkpoint, "data": args.data, "out": args.out})
    model = load_checkpoint(args.checkpoint)
    data = load_dataset(args.data)
    cm = evaluation.confusion(model, data)
    metrics = {
        "accuracy": evaluation.accuracy(cm),
        "macro_f1": evaluation.macro_f1(cm),
    }
    evaluation.write_metrics(metrics, args.out)
    print(f"wrote {args.out}")
    if args.confusion:
        evaluation.write_confusion(cm, args.confusion)
        print(f"wrote {args.confusion}")
    return 0


def cmd_prune(args) -> int:
    _log_config(
        {
            "checkpoint": args.checkpoint,
            "data": args.data,
            "eval_data": args.eval_data,
            "s_initial": args.s_initial,
            "s_final": args.s_final,
            "steps": args.steps,
            "finetune_iters": args.finetune_iters,
            "seed": args.seed,
            "out": args.out,
        }
    )
    model = load_checkpoint(args.checkpoint)
    train_data = load_dataset(args.data)
    eval_data = load_dataset(args.eval_data or args.data)
    schedule = pruning.PruneSchedule(
        s_initial=args.s_initial,
        s_final=args.s_final,
        n_steps=args.steps,
        finetune_iters=args.finetune_iters,
    )
    cfg = TrainConfig(seed=args.seed, lr=args.lr, batch_size=args.batch)
    levels, curve = pruning.prune_and_finetune(model, train_data, eval_data, schedule, cfg)
    pruning.write_prune_curve(curve, args.out)
    print(f"wrote {args.out}")
    if args.save_dir:
        out_dir = Path(args.save_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        for level in levels:
            dest = out_dir / f"sparse_{level.sparsity_achieved:.4f}.spkw"
            dest.write_bytes(level.checkpoint)
            print(f"wrote {dest}")
    return 0


def cmd_profile(args) -> int:
    _log_config(
        {
            "checkpoint": args.checkpoint,
            "data": args.data,
            "limit": args.limit,
            "out": args.out,
        }
    )
    model = load_checkpoint(args.checkpoint)
    data = load_dataset(args.data)
    if args.limit:
        data = data[: args.limit]
    report = complexity.profile_model(model, data)
    complexity.write_report(report, args.out)
    print(f"wrote {args.out}")
    return 0


def cmd_latency_curve(args) -> int:
    _log_config({"checkpoint": args.checkpoint, "data": args.data, "out": args.out})
    model = load_checkpoint(args.checkpoint)
    data = load_dataset(args.data)
    rows = evaluation.latency_curve(model, data)
    evaluation.write_latency_curve(rows, args.out)
    print(f"wrote {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spikeradar",
        description="Radar gesture pipeline: simulate, preprocess, train, prune, profile.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="generate a synthetic labeled recording set")
    p.add_argument("--classes", type=int, default=4)
    p.add_argument("--per-class", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--noise-sigma", type=float, default=0.02)
    p.add_argument("--n-chirps", type=int, default=1796)
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("preprocess", help="convert recordings to RD-map sequences")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("train", help="train one model kind")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--history", default=None)
    p.add_argument("--config", default=None)
    p.add_argument("--kind", choices=("cnn2d1d", "lstm", "gru", "snn"))
    p.add_argument("--epochs", type=int)
    p.add_argument("--batch", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--n-classes", dest="n_classes", type=int)
    p.add_argument("--augment", choices=("on", "off"))
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint on a dataset")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--confusion", default=None)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("prune", help="iterative magnitude pruning sweep")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--eval-data", default=None)
    p.add_argument("--s-initial", type=float, default=0.0)
    p.add_argument("--s-final", type=float, default=0.8)
    p.add_argument("--steps", type=int, default=4)
    p.add_argument("--finetune-iters", type=int, default=30)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--batch", type=int, default=16)
    p.add_argument("--out", required=True)
    p.add_argument("--save-dir", default=None)
    p.set_defaults(func=cmd_prune)

    p = sub.add_parser("profile", help="FLOP / effective-FLOP / memory report")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--limit", type=int, default=10)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("latency-curve", help="prefix-length accuracy of a spiking model")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_latency_curve)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # noqa: BLE001 - single reporting point for the CLI
        print(f"ERROR {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
