# ============================================
# 🕸️ GRAPHS — ricette (S, B) per estendere PCA / LPP / LDA / SPP
# ============================================
# Permette di usare:
#     from kmsa.graphs import build_graph, laplacian, constraint_matrix, ...
# anche se ogni ricetta vive nel proprio modulo.

from .base_utils import GraphPair, constraint_matrix, laplacian
from .graph_builder import build_graph
from .lda import lda_graph
from .lpp import lpp_graph
from .pca import pca_graph
from .spp import lasso_column, spp_graph

__all__ = [
    # Base utils
    "GraphPair",
    "laplacian",
    "constraint_matrix",

    # Ricette
    "pca_graph",
    "lpp_graph",
    "lda_graph",
    "spp_graph",
    "lasso_column",

    # Dispatch
    "build_graph",
]
