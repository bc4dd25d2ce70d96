"""Corpus files on disk and the end-to-end train/evaluate run built on them.

A corpus directory holds ``graph.tsv``, ``cascades.txt``, ``gen_config.json``
and, once embedded, ``global_embeddings.bin``. A run directory receives
``checkpoint.bin``, ``history.json``, ``metrics.json`` and ``predictions.csv``.
"""
import csv
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple

from ..data import Cascade, CascadeSample, GenConfig, ProtocolConfig, featurize_all, filter_and_split
from ..data import generate_synthetic, parse_dataset, write_dataset
from ..graphs import EmbeddingConfig, EmbeddingTable, GlobalGraph, embed_global
from ..graphs import load_embeddings, read_edge_list, save_embeddings, write_edge_list
from ..model import VNOIP, ModelConfig
from ..utils.errors import CheckpointError, DataError, EmbeddingCacheError
from .baselines import ConstantPredictor, LastRatePredictor
from .checkpoint import load_checkpoint, save_checkpoint
from .metrics import EvaluationResult, PredictionRecord, evaluate
from .trainer import Trainer, TrainingResult
from .training_schemas import RunConfig, TrainConfig

logger = logging.getLogger(__name__)

GRAPH_FILE = "graph.tsv"
CASCADES_FILE = "cascades.txt"
GEN_CONFIG_FILE = "gen_config.json"
EMBEDDINGS_FILE = "global_embeddings.bin"
CHECKPOINT_FILE = "checkpoint.bin"
HISTORY_FILE = "history.json"
METRICS_FILE = "metrics.json"
PREDICTIONS_FILE = "predictions.csv"


@dataclass(frozen=True)
class Splits:
    train: List[CascadeSample]
    val: List[CascadeSample]
    test: List[CascadeSample]


@dataclass
class RunOutcome:
    """What a finished run produced."""
    training: TrainingResult
    test: EvaluationResult
    baselines: Dict[str, EvaluationResult]
    checkpoint_path: Path

    def metrics(self) -> Dict[str, Any]:
        return {
            "best_epoch": self.training.best_epoch,
            "best_val_msle": self.training.best_val_msle,
            "test_msle": self.test.msle,
            "test_mape": self.test.mape,
            **{f"{name}_msle": result.msle for name, result in self.baselines.items()},
        }


def generate_corpus(cfg: GenConfig, data_dir: Path) -> Tuple[GlobalGraph, List[Cascade]]:
    """Generate a synthetic corpus and write it to ``data_dir``."""
    data_dir = Path(data_dir)
    data_dir.mkdir(parents=True, exist_ok=True)
    graph, cascades = generate_synthetic(cfg)
    write_edge_list(graph, data_dir / GRAPH_FILE)
    write_dataset(cascades, data_dir / CASCADES_FILE)
    (data_dir / GEN_CONFIG_FILE).write_text(json.dumps(cfg.model_dump(mode="json"), indent=2, sort_keys=True))
    return graph, cascades


def load_corpus(data_dir: Path) -> Tuple[GlobalGraph, List[Cascade]]:
    """Read the user graph and the cascades of a corpus directory.

    Users that appear in cascades but not in the graph get zero global
    embeddings at featurization.
    """
    data_dir = Path(data_dir)
    for name in (GRAPH_FILE, CASCADES_FILE):
        if not (data_dir / name).exists():
            raise DataError(f"corpus file {data_dir / name} is missing; run 'gen' first")
    graph = read_edge_list(data_dir / GRAPH_FILE)
    cascades = parse_dataset(data_dir / CASCADES_FILE)
    return graph, cascades


def embed_corpus(graph: GlobalGraph, data_dir: Path, cfg: EmbeddingConfig) -> EmbeddingTable:
    """Compute the global embeddings and store them in the corpus cache."""
    table = embed_global(graph, d=cfg.dim, window=cfg.window, negative=cfg.negative)
    save_embeddings(table, Path(data_dir) / EMBEDDINGS_FILE)
    return table


def load_or_embed(graph: GlobalGraph, data_dir: Path, cfg: EmbeddingConfig) -> EmbeddingTable:
    """Cached global embeddings when they fit ``graph`` and ``cfg``, fresh ones otherwise."""
    cache = Path(data_dir) / EMBEDDINGS_FILE
    if cache.exists():
        try:
            table = load_embeddings(cache)
            if table.n_nodes == graph.n_nodes and table.dim == cfg.dim:
                return table
            logger.warning(f"Embedding cache {cache} is {table.n_nodes}x{table.dim}, "
                           f"expected {graph.n_nodes}x{cfg.dim}; recomputing")
        except EmbeddingCacheError as e:
            logger.warning(f"Ignoring unreadable embedding cache: {e}")
    return embed_corpus(graph, data_dir, cfg)


def prepare_splits(cascades: List[Cascade], table: EmbeddingTable, protocol: ProtocolConfig,
                   embedding: EmbeddingConfig, workers: int = 1) -> Splits:
    """Filter, split and featurize a corpus under ``protocol``."""
    train, val, test = filter_and_split(cascades, protocol.observation_time, protocol.min_participants,
                                        protocol.split_ratios, protocol.split_seed)

    def featurize(part: List[Cascade]) -> List[CascadeSample]:
        return featurize_all(part, table, protocol, embedding, workers=workers)

    return Splits(train=featurize(train), val=featurize(val), test=featurize(test))


def load_splits(run: RunConfig) -> Splits:
    graph, cascades = load_corpus(Path(run.data_dir))
    table = load_or_embed(graph, Path(run.data_dir), run.embedding)
    return prepare_splits(cascades, table, run.protocol, run.embedding, workers=run.workers)


def build_model(model_config: ModelConfig, protocol: ProtocolConfig, train_config: TrainConfig) -> VNOIP:
    return VNOIP(model_config, n_grid=protocol.n_grid, seed=train_config.seed)


def load_model(path: Path) -> VNOIP:
    """Rebuild a model from a checkpoint's metadata and load its parameters."""
    checkpoint = load_checkpoint(path)
    meta = checkpoint.metadata
    model = VNOIP(ModelConfig(**meta["model_config"]), n_grid=int(meta["n_grid"]),
                  seed=int(meta["train_config"]["seed"]))
    model.params.load_state(checkpoint.params)
    return model


def run_metadata(run: RunConfig) -> Dict[str, Any]:
    """Checkpoint metadata that lets ``eval`` and ``plot`` rebuild the run's splits."""
    return {
        "name": run.name,
        "data_dir": run.data_dir,
        "protocol": run.protocol.model_dump(mode="json"),
        "embedding": run.embedding.model_dump(mode="json"),
        "workers": run.workers,
    }


def checkpoint_splits(metadata: Dict[str, Any], data_dir: Optional[Path] = None) -> Splits:
    """Splits of the corpus a checkpoint was trained on.

    Args:
        metadata: Checkpoint metadata written by :func:`run_experiment`
        data_dir: Corpus directory overriding the recorded one

    Raises:
        CheckpointError: If the metadata lacks the protocol or embedding settings
    """
    missing = [key for key in ("protocol", "embedding", "data_dir") if key not in metadata]
    if missing:
        raise CheckpointError(f"checkpoint metadata lacks {', '.join(missing)}")
    corpus = Path(data_dir) if data_dir is not None else Path(metadata["data_dir"])
    protocol = ProtocolConfig(**metadata["protocol"])
    embedding = EmbeddingConfig(**metadata["embedding"])
    graph, cascades = load_corpus(corpus)
    table = load_or_embed(graph, corpus, embedding)
    return prepare_splits(cascades, table, protocol, embedding, workers=int(metadata.get("workers", 1)))


def evaluate_checkpoint(path: Path, data_dir: Optional[Path] = None) -> Tuple[VNOIP, Splits, EvaluationResult]:
    """Reload a checkpoint, rebuild its splits and score the test split."""
    model = load_model(path)
    splits = checkpoint_splits(load_checkpoint(path).metadata, data_dir)
    return model, splits, evaluate(model, splits.test)


def write_predictions(records: List[PredictionRecord], path: Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.DictWriter(f, fieldnames=["cascade_id", "label", "prediction"])
        writer.writeheader()
        for record in records:
            writer.writerow(record.to_dict())


def score_baselines(splits: Splits) -> Dict[str, EvaluationResult]:
    constant = ConstantPredictor().fit([s.label for s in splits.train])
    return {
        "constant": evaluate(constant, splits.test),
        "last_rate": evaluate(LastRatePredictor(), splits.test),
    }


async def run_experiment(run: RunConfig, splits: Optional[Splits] = None,
                         on_trainer: Optional[Callable[[Trainer], None]] = None) -> RunOutcome:
    """Train on a corpus, evaluate the selected model on the test split and write the run directory.

    Args:
        run: Run settings
        splits: Featurized splits; loaded from ``run.data_dir`` when omitted
        on_trainer: Called with the trainer before training starts, to subscribe to its events
    """
    splits = splits or load_splits(run)
    if not splits.test:
        raise DataError("test split is empty")
    run_dir = Path(run.run_dir)
    run_dir.mkdir(parents=True, exist_ok=True)

    model = build_model(run.model, run.protocol, run.train)
    trainer = Trainer(model, run.train, task_id=run.name)
    if on_trainer is not None:
        on_trainer(trainer)
    training = await trainer.train(splits.train, splits.val)

    test = evaluate(model, splits.test)
    checkpoint_path = run_dir / CHECKPOINT_FILE
    save_checkpoint(checkpoint_path, trainer.checkpoint(training, test_msle=test.msle, **run_metadata(run)))
    (run_dir / HISTORY_FILE).write_text(json.dumps(training.history, indent=2))
    write_predictions(test.records, run_dir / PREDICTIONS_FILE)

    outcome = RunOutcome(training=training, test=test, baselines=score_baselines(splits),
                         checkpoint_path=checkpoint_path)
    (run_dir / METRICS_FILE).write_text(json.dumps(outcome.metrics(), indent=2, sort_keys=True))
    logger.info(f"Run {run.name}: test MSLE {test.msle:.4f}, MAPE {test.mape:.4f}")
    return outcome
