import math

from networkx.utils import UnionFind

from topofabric.exceptions import InputError
from topofabric.models.graph import WeightedGraph
from topofabric.models.topology import Filtration, PersistenceDiagram


def persistence_diagram(g: WeightedGraph, f: Filtration, dim: int) -> PersistenceDiagram:
    """
    H0 or H1 persistence of the sublevel filtration of a graph.

    Edges are processed by entry value (ties by canonical index). H0 merges follow the elder
    rule: the component born earlier survives, the one whose oldest vertex has the larger id
    dies on a tie. Every cycle-closing edge gives an essential H1 point.
    """
    if dim not in (0, 1):
        raise InputError(f"graphs only carry H0 and H1, got dim={dim}")
    if f.edge_values.shape != (g.m,):
        raise InputError(f"filtration has {f.edge_values.size} values for {g.m} edges")

    entry = f.entry_values()
    forest = UnionFind(g.vertices)
    # root -> (birth, oldest vertex) of the component it represents
    oldest = {v: (f.vertex_value, v) for v in g.vertices}
    points: list[tuple[float, float]] = []

    for k in sorted(range(g.m), key=lambda k: (entry[k], k)):
        edge = g.edges[k]
        root_u, root_v = forest[edge.u], forest[edge.v]
        value = float(entry[k])
        if root_u == root_v:
            if dim == 1:
                points.append((value, math.inf))
            continue
        survivor, victim = sorted((oldest[root_u], oldest[root_v]))
        if dim == 0:
            points.append((victim[0], value))
        forest.union(edge.u, edge.v)
        oldest[forest[edge.u]] = survivor

    if dim == 0:
        roots = {forest[v] for v in g.vertices}
        points.extend((oldest[root][0], math.inf) for root in roots)
    return PersistenceDiagram(dim=dim, points=sorted(points))


def diagrams(g: WeightedGraph, f: Filtration) -> dict[int, PersistenceDiagram]:
    """Both diagrams of a graph filtration, keyed by dimension."""
    return {dim: persistence_diagram(g, f, dim) for dim in (0, 1)}


def diagram_to_json(diagram: PersistenceDiagram) -> dict:
    """Export form ``{"dim", "points", "essential"}``; infinite deaths only appear as essentials."""
    return diagram.to_payload()
