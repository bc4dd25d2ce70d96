"""Shared fixtures: a tiny synthetic corpus and run settings small enough for unit tests."""
from pathlib import Path

import pytest

from vnoip.data import GenConfig, ProtocolConfig
from vnoip.graphs import EmbeddingConfig
from vnoip.model import ModelConfig
from vnoip.training import RunConfig, TrainConfig, generate_corpus, load_splits

TINY_GEN = GenConfig(n_users=80, n_cascades=40, branching=0.5, root_influence=20.0, seed=3)
TINY_PROTOCOL = ProtocolConfig(min_participants=3, n_grid=2, max_sequence=20)
TINY_EMBEDDING = EmbeddingConfig(dim=4, scales=(1.0,))
TINY_MODEL = ModelConfig(hidden_dim=3, latent_dim=2, embed_dim=4)
TINY_TRAIN = TrainConfig(batch_size=8, max_epochs=2, patience=2, learning_rate=0.01)


def tiny_run(data_dir: Path, run_dir: Path, name: str = "tiny", **overrides) -> RunConfig:
    settings = dict(name=name, data_dir=str(data_dir), run_dir=str(run_dir), model=TINY_MODEL,
                    train=TINY_TRAIN, protocol=TINY_PROTOCOL, embedding=TINY_EMBEDDING)
    settings.update(overrides)
    return RunConfig(**settings)


@pytest.fixture(scope="session")
def tiny_corpus(tmp_path_factory) -> Path:
    """Corpus directory with graph, cascades and cached embeddings."""
    data_dir = tmp_path_factory.mktemp("corpus")
    generate_corpus(TINY_GEN, data_dir)
    return data_dir


@pytest.fixture(scope="session")
def tiny_splits(tiny_corpus, tmp_path_factory):
    return load_splits(tiny_run(tiny_corpus, tmp_path_factory.mktemp("unused")))


@pytest.fixture
def run_config(tiny_corpus, tmp_path) -> RunConfig:
    return tiny_run(tiny_corpus, tmp_path / "run")


@pytest.fixture
def make_run(tiny_corpus, tmp_path):
    """Factory for tiny runs writing to ``tmp_path/<name>``; ``variant`` selects an ablation."""

    def factory(name: str = "tiny", data_dir: Path = None, variant: str = "full", **overrides) -> RunConfig:
        model = TINY_MODEL.model_copy(update={"variant": variant})
        return tiny_run(data_dir or tiny_corpus, tmp_path / name, name=name, model=model, **overrides)

    return factory
