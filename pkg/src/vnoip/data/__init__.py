"""Cascade ingestion, synthetic generation, protocol splits and featurization."""
from .data_schemas import Cascade, GenConfig, ProtocolConfig, RepostEvent
from .featurize import build_sample, cascade_graph, featurize_all, grid_times
from .parser import format_cascade, parse_dataset, parse_line, write_dataset
from .protocol import filter_and_split
from .sample import CascadeSample
from .synthetic import generate_synthetic, preferential_attachment_graph

__all__ = [
    "Cascade", "RepostEvent", "GenConfig", "ProtocolConfig", "CascadeSample",
    "parse_dataset", "parse_line", "format_cascade", "write_dataset",
    "generate_synthetic", "preferential_attachment_graph",
    "filter_and_split", "build_sample", "featurize_all", "cascade_graph", "grid_times",
]
