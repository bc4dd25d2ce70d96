"""Global-graph and cascade-graph node embeddings."""
from .cascade_embedding import embed_cascade
from .global_embedding import embed_global, ppmi_matrix
from .graph_schemas import EmbeddingConfig, EmbeddingTable, GlobalGraph
from .io import load_embeddings, read_edge_list, save_embeddings, write_edge_list

__all__ = [
    "GlobalGraph", "EmbeddingTable", "EmbeddingConfig",
    "embed_global", "ppmi_matrix", "embed_cascade",
    "read_edge_list", "write_edge_list", "save_embeddings", "load_embeddings",
]
