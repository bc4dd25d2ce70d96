"""Command-line interface: ``vnoip <command> [--config FILE] [--key value ...]``.

Every config field can be set in a ``key = value`` file given by ``--config``
or as a ``--key value`` flag; flags win. Metric summaries go to stdout as one
JSON record per line, logs go to stderr.
"""
import argparse
import asyncio
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Set, Type

from pydantic import BaseModel
from rich.console import Console
from rich.logging import RichHandler

from .data import GenConfig, ProtocolConfig
from .graphs import EmbeddingConfig
from .model import VARIANTS, ModelConfig
from .queue import RunQueue
from .training import (
    RunConfig, TrainConfig, Trainer, checkpoint_splits, evaluate_checkpoint, generate_corpus, load_checkpoint,
    load_corpus, load_model, load_splits, run_experiment, run_gradcheck_suite, write_predictions,
)
from .training.pipeline import CHECKPOINT_FILE, PREDICTIONS_FILE, embed_corpus
from .utils.config import build_config, data_dir, merge_settings, read_config_file
from .utils.errors import ConfigError, DataError, NumericError, VnoipError
from .visualization import RunPlotManager, TrainingProgressTracker

logger = logging.getLogger(__name__)

CONFIG_MODELS: Sequence[Type[BaseModel]] = (GenConfig, EmbeddingConfig, ModelConfig, TrainConfig, ProtocolConfig)
RUN_KEYS = {"name", "workers", "run_dir", "data_dir"}
ALL_KEYS: Set[str] = RUN_KEYS.union(*(model.model_fields for model in CONFIG_MODELS))
TRAIN_MODELS = (ModelConfig, TrainConfig, ProtocolConfig, EmbeddingConfig)


def setup_logging(level: str) -> None:
    logging.basicConfig(
        level=level.upper(),
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=Console(stderr=True), show_path=False)],
        force=True,
    )


def emit_record(record: Dict[str, Any]) -> None:
    """Write one metrics record as a JSON line on stdout."""
    sys.stdout.write(json.dumps(record, sort_keys=True) + "\n")
    sys.stdout.flush()


def add_config_arguments(parser: argparse.ArgumentParser, models: Iterable[Type[BaseModel]]) -> None:
    """Add a ``--field`` option for every field of ``models``."""
    group = parser.add_argument_group("settings (also accepted in the --config file)")
    seen: Set[str] = set()
    for model in models:
        for name, field in model.model_fields.items():
            if name in seen:
                continue
            seen.add(name)
            flags = [f"--{name}"]
            if "_" in name:
                flags.append(f"--{name.replace('_', '-')}")
            group.add_argument(*flags, dest=name, default=None, metavar="VALUE",
                               help=f"{field.description} ({model.__name__})")


def add_run_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--name", default=None, help="Run name (default 'run')")
    parser.add_argument("--run-dir", dest="run_dir", default=None,
                        help="Run directory (default <data-dir>/runs/<name>)")
    parser.add_argument("--workers", type=int, default=None, help="Featurization processes")


def collect_settings(args: argparse.Namespace) -> Dict[str, Any]:
    """Merge the config file with the flags given on the command line.

    Raises:
        ConfigError: If a key belongs to no configuration object
    """
    file_values = read_config_file(Path(args.config)) if args.config else {}
    flag_values = {key: getattr(args, key) for key in ALL_KEYS if hasattr(args, key)}
    values = merge_settings(file_values, flag_values)
    unknown = sorted(set(values) - ALL_KEYS)
    if unknown:
        raise ConfigError(f"unknown settings: {', '.join(unknown)}")
    return values


def corpus_dir(values: Dict[str, Any]) -> Path:
    return Path(values["data_dir"]) if values.get("data_dir") else data_dir()


def run_dir_for(values: Dict[str, Any]) -> Path:
    if values.get("run_dir"):
        return Path(values["run_dir"])
    return corpus_dir(values) / "runs" / values.get("name", "run")


def build_run(values: Dict[str, Any], variant: Optional[str] = None, run_dir: Optional[Path] = None) -> RunConfig:
    """Assemble a :class:`RunConfig` from merged settings.

    Setting only one of ``dim`` and ``embed_dim`` sets both.
    """
    values = dict(values)
    if "dim" in values and "embed_dim" not in values:
        values["embed_dim"] = values["dim"]
    elif "embed_dim" in values and "dim" not in values:
        values["dim"] = values["embed_dim"]
    if variant is not None:
        values["variant"] = variant
    name = values.get("name", "run") if variant is None else variant
    return build_config(RunConfig, {
        "name": name,
        "data_dir": str(corpus_dir(values)),
        "run_dir": str(run_dir or run_dir_for(values)),
        "model": build_config(ModelConfig, values, ALL_KEYS),
        "train": build_config(TrainConfig, values, ALL_KEYS),
        "protocol": build_config(ProtocolConfig, values, ALL_KEYS),
        "embedding": build_config(EmbeddingConfig, values, ALL_KEYS),
        "workers": values.get("workers", 1),
    })


def cmd_gen(args: argparse.Namespace) -> int:
    values = collect_settings(args)
    cfg = build_config(GenConfig, values, ALL_KEYS)
    target = corpus_dir(values)
    graph, cascades = generate_corpus(cfg, target)
    logger.info(f"Wrote {len(cascades)} cascades over {graph.n_nodes} users to {target}")
    emit_record({"command": "gen", "data_dir": str(target), "n_users": graph.n_nodes,
                 "n_edges": graph.n_edges, "n_cascades": len(cascades)})
    return 0


def cmd_embed(args: argparse.Namespace) -> int:
    values = collect_settings(args)
    cfg = build_config(EmbeddingConfig, values, ALL_KEYS)
    target = corpus_dir(values)
    graph, _ = load_corpus(target)
    table = embed_corpus(graph, target, cfg)
    emit_record({"command": "embed", "data_dir": str(target), "n_nodes": table.n_nodes, "dim": table.dim})
    return 0


async def train_with_progress(run: RunConfig, show_progress: bool):
    if not show_progress:
        return await run_experiment(run)
    tracker = TrainingProgressTracker(title=f"VNOIP {run.model.variant} ({run.name})",
                                      max_epochs=run.train.max_epochs, console=Console(stderr=True))

    def attach(trainer: Trainer) -> None:
        trainer.add_subscriber(tracker.handle_event)

    with tracker.live_display():
        return await run_experiment(run, on_trainer=attach)


def cmd_train(args: argparse.Namespace) -> int:
    run = build_run(collect_settings(args))
    outcome = asyncio.run(train_with_progress(run, show_progress=not args.no_progress))
    emit_record({"command": "train", "run": run.name, "variant": run.model.variant,
                 "checkpoint": str(outcome.checkpoint_path), **outcome.training.summary(), **outcome.metrics()})
    return 0


def checkpoint_path_for(args: argparse.Namespace, values: Dict[str, Any]) -> Path:
    path = Path(args.checkpoint) if args.checkpoint else run_dir_for(values) / CHECKPOINT_FILE
    if not path.exists():
        raise DataError(f"no checkpoint at {path}; run 'train' first")
    return path


def cmd_eval(args: argparse.Namespace) -> int:
    values = collect_settings(args)
    path = checkpoint_path_for(args, values)
    corpus = Path(values["data_dir"]) if values.get("data_dir") else None
    model, splits, result = evaluate_checkpoint(path, corpus)
    write_predictions(result.records, path.parent / PREDICTIONS_FILE)
    recorded = load_checkpoint(path).metadata.get("test_msle")
    if recorded is not None and recorded != result.msle:
        logger.warning(f"Test MSLE {result.msle!r} differs from the {recorded!r} recorded at training time")
    emit_record({"command": "eval", "checkpoint": str(path), "variant": model.variant,
                 "n_test": len(splits.test), "test_msle": result.msle, "test_mape": result.mape})
    return 0


def cmd_gradcheck(args: argparse.Namespace) -> int:
    records = run_gradcheck_suite(h=args.step, seed=args.seed)
    for record in records:
        emit_record({"command": "gradcheck", **record.to_dict()})
    failed = [f"{r.group}/{r.name}" for r in records if not r.passed]
    if failed:
        raise NumericError(f"gradient check failed for {', '.join(failed)}")
    return 0


def cmd_plot(args: argparse.Namespace) -> int:
    values = collect_settings(args)
    path = checkpoint_path_for(args, values)
    plots = RunPlotManager(path.parent)
    outputs = {"loss_curve": str(plots.write_loss_curve(plots.load_history()))}
    model = load_model(path)
    if model.variant == "no_trend":
        logger.warning("The no_trend variant has no trend to plot; writing the loss curve only")
    else:
        corpus = Path(values["data_dir"]) if values.get("data_dir") else None
        splits = checkpoint_splits(load_checkpoint(path).metadata, corpus)
        outputs["trends"] = str(plots.write_trends(model, splits.test, max_cascades=args.max_cascades))
    emit_record({"command": "plot", "run_dir": str(path.parent), **outputs})
    return 0


async def run_ablation(runs: List[RunConfig], splits) -> List[Dict[str, Any]]:
    """Train ``runs`` one after another through a run queue on shared splits."""
    queue = RunQueue()
    for run in runs:
        await queue.add_task(run, task_id=run.name, splits=splits)
    await queue.start_processing()
    try:
        await queue.join()
    finally:
        await queue.stop_processing()
    return await queue.list_tasks()


def cmd_ablate(args: argparse.Namespace) -> int:
    values = collect_settings(args)
    variants = [v.strip() for v in args.variants.split(",") if v.strip()]
    bad = [v for v in variants if v not in VARIANTS]
    if bad or not variants:
        raise ConfigError(f"variants must be drawn from {', '.join(VARIANTS)}, got {args.variants!r}")
    base = run_dir_for(values)
    runs = [build_run(values, variant=v, run_dir=base / v) for v in variants]
    splits = load_splits(runs[0])
    tasks = asyncio.run(run_ablation(runs, splits))
    failed = 0
    for task in tasks:
        record = {"command": "ablate", "variant": task["variant"], "status": task["status"]}
        if task["result"]:
            record.update(task["result"])
        if task["error"]:
            record["error"] = task["error"]
            failed += 1
        emit_record(record)
    return 1 if failed else 0


def cmd_serve(args: argparse.Namespace) -> int:
    from .web import serve

    serve(host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=None, help="key = value settings file")
    common.add_argument("--data-dir", dest="data_dir", default=None,
                        help="Corpus directory (default $VNOIP_DATA_DIR or ./data)")
    common.add_argument("--log-level", default="INFO", choices=["DEBUG", "INFO", "WARNING", "ERROR"])

    parser = argparse.ArgumentParser(prog="vnoip", description="Cascade popularity prediction with VNOIP")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", parents=[common], help="Generate a synthetic corpus")
    add_config_arguments(gen, [GenConfig])
    gen.set_defaults(handler=cmd_gen)

    embed = sub.add_parser("embed", parents=[common], help="Compute and cache global user embeddings")
    add_config_arguments(embed, [EmbeddingConfig])
    embed.set_defaults(handler=cmd_embed)

    train = sub.add_parser("train", parents=[common], help="Train a model and score it on the test split")
    add_run_arguments(train)
    train.add_argument("--no-progress", action="store_true", help="Do not draw the live progress table")
    add_config_arguments(train, TRAIN_MODELS)
    train.set_defaults(handler=cmd_train)

    for name, handler, text in (("eval", cmd_eval, "Re-score a checkpoint on its test split"),
                                ("plot", cmd_plot, "Write loss-curve and trend CSVs and figures")):
        command = sub.add_parser(name, parents=[common], help=text)
        command.add_argument("--name", default=None, help="Run name (default 'run')")
        command.add_argument("--run-dir", dest="run_dir", default=None, help="Run directory")
        command.add_argument("--checkpoint", default=None, help="Checkpoint file (default <run-dir>/checkpoint.bin)")
        if name == "plot":
            command.add_argument("--max-cascades", type=int, default=6, help="Test cascades to plot")
        command.set_defaults(handler=handler)

    gradcheck = sub.add_parser("gradcheck", parents=[common], help="Run the finite-difference gradient suite")
    gradcheck.add_argument("--step", type=float, default=1e-5, help="Central-difference step h")
    gradcheck.add_argument("--seed", type=int, default=0, help="Seed of the primitive check inputs")
    gradcheck.set_defaults(handler=cmd_gradcheck)

    ablate = sub.add_parser("ablate", parents=[common], help="Train several model variants on one corpus")
    add_run_arguments(ablate)
    ablate.add_argument("--variants", default=",".join(VARIANTS), help="Comma-separated variants")
    add_config_arguments(ablate, TRAIN_MODELS)
    ablate.set_defaults(handler=cmd_ablate)

    serve = sub.add_parser("serve", parents=[common], help="Serve the run queue over HTTP and websockets")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    serve.set_defaults(handler=cmd_serve)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(args.log_level)
    try:
        return args.handler(args)
    except VnoipError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return e.exit_code
    except KeyboardInterrupt:
        logger.warning("Interrupted")
        return 130
    except Exception as e:
        logger.error(f"Unexpected error: {e}", exc_info=True)
        return 1


if __name__ == "__main__":
    sys.exit(main())
