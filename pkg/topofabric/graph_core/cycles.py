import logging

import networkx as nx
import numpy as np
from networkx.utils import UnionFind

from topofabric.exceptions import DisconnectedGraphError
from topofabric.models.graph import CycleBasis, WeightedGraph

logger = logging.getLogger(__name__)


def spanning_tree_edges(g: WeightedGraph) -> list[int]:
    """Kruskal minimum spanning forest; ties broken by canonical edge index."""
    forest = UnionFind(g.vertices)
    chosen = []
    for k in sorted(range(g.m), key=lambda k: (g.edges[k].w, k)):
        edge = g.edges[k]
        if forest[edge.u] != forest[edge.v]:
            forest.union(edge.u, edge.v)
            chosen.append(k)
    return sorted(chosen)


def fundamental_cycle_basis(g: WeightedGraph) -> CycleBasis:
    """
    One signed cycle row per non-tree edge.

    Each row walks its chord tail -> head and returns along the unique tree path; an edge gets +1
    when the walk follows its orientation and -1 otherwise, so every row is annihilated by B1^T.

    Raises:
        DisconnectedGraphError: If the graph has more than one component.
    """
    components = g.components()
    if len(components) > 1:
        raise DisconnectedGraphError(components)

    tree = spanning_tree_edges(g)
    tree_set = set(tree)
    chords = [k for k in range(g.m) if k not in tree_set]

    tree_graph = nx.Graph()
    tree_graph.add_nodes_from(g.vertices)
    tree_graph.add_edges_from(g.edges[k].key for k in tree)
    edge_index = g.edge_index()

    rows = np.zeros((len(chords), g.m))
    for r, chord in enumerate(chords):
        tail, head = g.edges[chord].key
        rows[r, chord] = 1.0
        path = nx.shortest_path(tree_graph, head, tail)
        for a, b in zip(path[:-1], path[1:], strict=True):
            k = edge_index[(min(a, b), max(a, b))]
            rows[r, k] += 1.0 if a < b else -1.0

    logger.debug(f"cycle basis: n={g.n} m={g.m} q={len(chords)}")
    return CycleBasis(tree_edges=tree, chords=chords, signature_matrix=rows)


def cycle_rank(g: WeightedGraph) -> int:
    """Number of independent cycles, m - n + (number of components)."""
    return g.m - g.n + len(g.components())
