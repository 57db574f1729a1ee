"""Command-line pipeline: generate graphs, build/prune/split datasets, train, evaluate, report.

Every subcommand takes --seed and --config. The config file is plain JSON whose
keys mirror the long flag names with underscores (e.g. {"n_min": 4}); values
given on the command line win over the config file, which wins over built-in
defaults.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import bench, dataset, gnn, graphs

MODEL_CHOICES = ("gcn", "sage", "gat", "gin")


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        obj = json.loads(Path(path).read_text(encoding="ascii"))
    except json.JSONDecodeError as exc:
        raise SystemExit(f"config file {path} is not valid JSON: {exc}")
    if not isinstance(obj, dict):
        raise SystemExit(f"config file {path} must hold a JSON object")
    return obj


def _merge(args: argparse.Namespace, config: dict, defaults: dict) -> dict:
    """Explicit flag > config entry > default."""
    merged = {}
    for key, default in defaults.items():
        cli_value = getattr(args, key, None)
        if cli_value is not None:
            merged[key] = cli_value
        elif key in config:
            merged[key] = config[key]
        else:
            merged[key] = default
    return merged


def _write_histogram_csv(path: Path, header: str, counts: dict[int, int]) -> None:
    lines = [header] + [f"{k},{v}" for k, v in counts.items()]
    path.write_text("".join(line + "\n" for line in lines), encoding="ascii")


def _cmd_gen_graphs(args) -> int:
    cfg = _merge(args, _load_config(args.config), {
        "count": 9598,
        "n_min": 2,
        "n_max": 15,
        "seed": 0,
        "out": "graphs",
    })
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    corpus = graphs.generate_corpus(int(cfg["count"]), int(cfg["n_min"]), int(cfg["n_max"]), int(cfg["seed"]))
    for g in corpus:
        graphs.write_graph_file(g, out / f"{g.id}.txt")
    _write_histogram_csv(out / "degree_histogram.csv", "degree,count", graphs.degree_histogram(corpus))
    _write_histogram_csv(out / "size_histogram.csv", "n,count", graphs.size_histogram(corpus))
    print(f"wrote {len(corpus)} graphs to {out}")
    return 0


def _read_graph_dir(path: str) -> list[graphs.Graph]:
    files = sorted(Path(path).glob("*.txt"))
    if not files:
        raise SystemExit(f"no .txt graph files in {path}")
    return [graphs.read_graph_file(f) for f in files]


def _cmd_build_dataset(args) -> int:
    cfg = _merge(args, _load_config(args.config), {
        "graphs": None,
        "budget": 500,
        "p": 1,
        "seed": 0,
        "out": "dataset.jsonl",
    })
    if cfg["graphs"] is None:
        raise SystemExit("build-dataset needs --graphs")
    corpus = _read_graph_dir(cfg["graphs"])
    records = dataset.build_dataset(corpus, int(cfg["budget"]), int(cfg["p"]), int(cfg["seed"]))
    dataset.write_records(records, cfg["out"])
    print(f"built {len(records)} records -> {cfg['out']}")
    return 0


def _cmd_prune(args) -> int:
    cfg = _merge(args, _load_config(args.config), {
        "in_path": None,
        "threshold": 0.70,
        "rate": 0.70,
        "seed": 0,
        "out": "pruned.jsonl",
    })
    if cfg["in_path"] is None:
        raise SystemExit("prune needs --in")
    records = dataset.read_records(cfg["in_path"])
    kept = dataset.prune(records, float(cfg["threshold"]), float(cfg["rate"]), int(cfg["seed"]))
    dataset.write_records(kept, cfg["out"])
    print(f"kept {len(kept)} of {len(records)} records -> {cfg['out']}")
    return 0


def _cmd_split(args) -> int:
    cfg = _merge(args, _load_config(args.config), {
        "in_path": None,
        "train_frac": 0.8,
        "val_frac": 0.1,
        "test_frac": 0.1,
        "test_count": 100,
        "seed": 0,
        "out_dir": "splits",
    })
    if cfg["in_path"] is None:
        raise SystemExit("split needs --in")
    records = dataset.read_records(cfg["in_path"])
    test_count = int(cfg["test_count"])
    train, val, test = dataset.split(
        records,
        (float(cfg["train_frac"]), float(cfg["val_frac"]), float(cfg["test_frac"])),
        int(cfg["seed"]),
        test_count=None if test_count < 0 else test_count,
    )
    out = Path(cfg["out_dir"])
    out.mkdir(parents=True, exist_ok=True)
    dataset.write_records(train, out / "train.jsonl")
    dataset.write_records(val, out / "val.jsonl")
    dataset.write_records(test, out / "test.jsonl")
    print(f"split {len(records)} records into {len(train)}/{len(val)}/{len(test)} -> {out}")
    return 0


def _cmd_train(args) -> int:
    cfg = _merge(args, _load_config(args.config), {
        "dataset": None,
        "val": None,
        "model": None,
        "epochs": 100,
        "lr": 1e-3,
        "hidden_dim": 32,
        "num_layers": 2,
        "dropout": 0.5,
        "gat_aggregation": "mean",
        "batch_size": None,
        "seed": 0,
        "out": "model.json",
    })
    if cfg["dataset"] is None or cfg["model"] is None:
        raise SystemExit("train needs --dataset and --model")
    if cfg["model"] not in MODEL_CHOICES:
        raise SystemExit(f"unknown model {cfg['model']!r}, expected one of {MODEL_CHOICES}")
    train_records = dataset.read_records(cfg["dataset"])
    if not train_records:
        raise SystemExit(f"dataset {cfg['dataset']} is empty")
    val_records = dataset.read_records(cfg["val"]) if cfg["val"] else []
    depth = train_records[0].p
    model = gnn.init_model(
        cfg["model"],
        seed=int(cfg["seed"]),
        p=depth,
        hidden_dim=int(cfg["hidden_dim"]),
        num_layers=int(cfg["num_layers"]),
        dropout=float(cfg["dropout"]),
        gat_aggregation=str(cfg["gat_aggregation"]),
    )
    config = gnn.TrainConfig(
        epochs=int(cfg["epochs"]),
        lr=float(cfg["lr"]),
        seed=int(cfg["seed"]),
        batch_size=None if cfg["batch_size"] is None else int(cfg["batch_size"]),
    )
    model, history = gnn.train(model, train_records, val_records, config)
    gnn.save_model(model, cfg["out"])
    last = history[-1]
    val_text = "none" if last["val_loss"] is None else f"{last['val_loss']:.6f}"
    print(
        f"trained {cfg['model']} for {len(history)} epochs "
        f"(final train loss {last['train_loss']:.6f}, val loss {val_text}) -> {cfg['out']}"
    )
    return 0


def _parse_models_flag(text: str) -> dict[str, gnn.GnnModel | None]:
    """Comma-separated method specs: either 'name=checkpoint.json' or the bare word 'random'."""
    models: dict[str, gnn.GnnModel | None] = {}
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if part == bench.RANDOM_METHOD:
            models[bench.RANDOM_METHOD] = None
            continue
        if "=" not in part:
            raise SystemExit(f"bad --models entry {part!r}: expected name=path or 'random'")
        name, path = part.split("=", 1)
        if not name or name == bench.RANDOM_METHOD:
            raise SystemExit(f"bad --models entry {part!r}")
        models[name] = gnn.load_model(path)
    if not models:
        raise SystemExit("--models selected no methods")
    return models


def _cmd_eval(args) -> int:
    cfg = _merge(args, _load_config(args.config), {
        "models": None,
        "test": None,
        "budget": 500,
        "seed": 0,
        "out": "eval_report.json",
    })
    if cfg["models"] is None or cfg["test"] is None:
        raise SystemExit("eval needs --models and --test")
    models = _parse_models_flag(str(cfg["models"]))
    test_path = Path(cfg["test"])
    if test_path.is_dir():
        test_graphs = _read_graph_dir(str(test_path))
    else:
        test_graphs = [r.graph for r in dataset.read_records(test_path)]
    report = bench.evaluate(models, test_graphs, int(cfg["budget"]), int(cfg["seed"]))
    bench.save_report(report, cfg["out"])
    for agg in report.aggregates:
        print(
            f"{agg.method}: mean improvement {agg.mean_improvement_pp:.2f} pp "
            f"(std {agg.std_improvement_pp:.2f}), mean final ratio {agg.mean_ar_final:.4f}"
        )
    print(f"evaluated {len(test_graphs)} graphs -> {cfg['out']}")
    return 0


def _cmd_report(args) -> int:
    cfg = _merge(args, _load_config(args.config), {
        "in_path": None,
        "out_dir": "report",
    })
    if cfg["in_path"] is None:
        raise SystemExit("report needs --in")
    report = bench.load_report(cfg["in_path"])
    written = bench.write_report_files(report, cfg["out_dir"])
    print(f"wrote {len(written)} files to {cfg['out_dir']}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qaoa-warmstart",
        description="Max-Cut QAOA warm-start pipeline: data generation, training, benchmarks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser):
        p.add_argument("--seed", type=int, default=None, help="master seed (default 0)")
        p.add_argument("--config", type=str, default=None, help="JSON file with default values")

    p = sub.add_parser("gen-graphs", help="generate a regular-graph corpus as text files")
    p.add_argument("--count", type=int, default=None, help="number of graphs (default 9598)")
    p.add_argument("--n-min", dest="n_min", type=int, default=None)
    p.add_argument("--n-max", dest="n_max", type=int, default=None)
    p.add_argument("--out", type=str, default=None, help="output directory")
    common(p)
    p.set_defaults(func=_cmd_gen_graphs)

    p = sub.add_parser("build-dataset", help="optimize every graph and emit labeled records")
    p.add_argument("--graphs", type=str, default=None, help="directory of graph .txt files")
    p.add_argument("--budget", type=int, default=None, help="optimizer iterations per graph (default 500)")
    p.add_argument("--p", type=int, default=None, help="circuit depth (default 1)")
    p.add_argument("--out", type=str, default=None, help="output JSONL path")
    common(p)
    p.set_defaults(func=_cmd_build_dataset)

    p = sub.add_parser("prune", help="drop a seeded share of low-ratio records")
    p.add_argument("--in", dest="in_path", type=str, default=None, help="input JSONL path")
    p.add_argument("--threshold", type=float, default=None, help="keep-all ratio threshold (default 0.70)")
    p.add_argument("--rate", type=float, default=None, help="survival rate below threshold (default 0.70)")
    p.add_argument("--out", type=str, default=None, help="output JSONL path")
    common(p)
    p.set_defaults(func=_cmd_prune)

    p = sub.add_parser("split", help="shuffle and cut a dataset into train/val/test files")
    p.add_argument("--in", dest="in_path", type=str, default=None, help="input JSONL path")
    p.add_argument("--train-frac", dest="train_frac", type=float, default=None)
    p.add_argument("--val-frac", dest="val_frac", type=float, default=None)
    p.add_argument("--test-frac", dest="test_frac", type=float, default=None)
    p.add_argument(
        "--test-count", dest="test_count", type=int, default=None,
        help="exact test-set size (default 100; pass -1 to use --test-frac instead)",
    )
    p.add_argument("--out-dir", dest="out_dir", type=str, default=None)
    common(p)
    p.set_defaults(func=_cmd_split)

    p = sub.add_parser("train", help="train an angle-prediction network")
    p.add_argument("--dataset", type=str, default=None, help="training JSONL path")
    p.add_argument("--val", type=str, default=None, help="validation JSONL path (optional)")
    p.add_argument("--model", type=str, default=None, choices=MODEL_CHOICES)
    p.add_argument("--epochs", type=int, default=None, help="default 100")
    p.add_argument("--out", type=str, default=None, help="checkpoint output path")
    common(p)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("eval", help="benchmark warm starts against the random baseline")
    p.add_argument(
        "--models", type=str, default=None,
        help="comma-separated name=checkpoint pairs; the bare word 'random' adds the baseline",
    )
    p.add_argument("--test", type=str, default=None, help="test JSONL path or graph directory")
    p.add_argument("--budget", type=int, default=None, help="optimizer iterations (default 500)")
    p.add_argument("--out", type=str, default=None, help="evaluation report JSON path")
    common(p)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("report", help="render CSV tables and SVG charts from an evaluation report")
    p.add_argument("--in", dest="in_path", type=str, default=None, help="evaluation report JSON path")
    p.add_argument("--out-dir", dest="out_dir", type=str, default=None)
    common(p)
    p.set_defaults(func=_cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
