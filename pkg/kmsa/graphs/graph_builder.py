import logging

import numpy as np

from kmsa.core import GraphError, GraphRecipe

from .lda import lda_graph
from .lpp import lpp_graph
from .pca import pca_graph
from .spp import spp_graph

logger = logging.getLogger(__name__)


def build_graph(recipe: GraphRecipe, X: np.ndarray, labels=None):
    """
    🔄 Costruisce la coppia (S, B) della ricetta richiesta per una vista.
    """
    N = np.asarray(X).shape[1]
    if recipe.kind == "pca":
        pair = pca_graph(N)
    elif recipe.kind == "lpp":
        pair = lpp_graph(X, recipe.k, recipe.t)
    elif recipe.kind == "lda":
        pair = lda_graph(labels)
        if pair.S.shape[0] != N:
            raise GraphError(f"lda labels cover {pair.S.shape[0]} samples, view has {N}")
    elif recipe.kind == "spp":
        pair = spp_graph(X, recipe.lam, recipe.max_iters)
    else:
        raise GraphError(f"graph recipe '{recipe.kind}' not supported")
    logger.debug("[GRAPH] ricetta %s costruita su N=%d", recipe.kind, N)
    return pair
