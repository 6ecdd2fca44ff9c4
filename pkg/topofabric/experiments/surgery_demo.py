import logging
from pathlib import Path

import orjson
from pydantic import ValidationError

from topofabric.exceptions import SchemaError
from topofabric.experiments.reports import output_dir, write_json, write_plot_json
from topofabric.models.experiment import ExperimentConfig, validation_problems, write_rows
from topofabric.models.graph import WeightedGraph
from topofabric.models.topology import Filtration, SurgeryLog
from topofabric.topology.curvature import forman_ricci
from topofabric.topology.surgery import neck_surgery

logger = logging.getLogger(__name__)

NECK_WEIGHT = 2.0
CLIQUE_VALUES = (1.0, 2.0, 3.0, 4.0, 5.0, 6.0)


def dumbbell() -> tuple[WeightedGraph, Filtration]:
    """Two unit-weight 4-cliques joined by a two-edge neck of weight 2."""
    left, right = (1, 2, 3, 4), (5, 6, 7, 8)
    edges, values = [], {}
    for clique in (left, right):
        pairs = [(a, b) for i, a in enumerate(clique) for b in clique[i + 1 :]]
        for pair, value in zip(pairs, CLIQUE_VALUES, strict=True):
            edges.append((*pair, 1.0))
            values[pair] = value
    edges += [(3, 6, NECK_WEIGHT), (4, 5, NECK_WEIGHT)]
    values[(3, 6)], values[(4, 5)] = 9.9, 10.0
    graph = WeightedGraph(vertices=list(range(1, 9)), edges=edges)
    return graph, Filtration(edge_values=[values[e.key] for e in graph.edges])


def load_surgery_input(path: str | Path) -> tuple[WeightedGraph, Filtration]:
    """
    Read ``{"graph": {...}, "values": [...]}`` with one filtration value per canonical edge.

    Raises:
        SchemaError: On malformed JSON or invalid fields.
    """
    source = str(path)
    try:
        document = orjson.loads(Path(path).read_bytes())
        graph = WeightedGraph.model_validate(document["graph"])
        values = Filtration(edge_values=document["values"])
    except orjson.JSONDecodeError as e:
        raise SchemaError([("/", f"invalid JSON: {e}")], source=source) from e
    except KeyError as e:
        raise SchemaError([("/", f"missing key {e}")], source=source) from e
    except ValidationError as e:
        raise SchemaError(validation_problems(e), source=source) from e
    if values.edge_values.size != graph.m:
        raise SchemaError(
            [("/values", f"{values.edge_values.size} values for {graph.m} edges")], source=source
        )
    return graph, values


def run_surgery_demo(config: ExperimentConfig) -> tuple[WeightedGraph, WeightedGraph, SurgeryLog]:
    """Neck surgery on the configured input, or on the built-in dumbbell."""
    graph, values = load_surgery_input(config.input) if config.input else dumbbell()
    section = config.surgery
    result, log = neck_surgery(graph, values, section.eps_neck, section.z_threshold)
    logger.info(
        f"surgery removed {log.removed_edges}; curvature variance "
        f"{log.variance_before:.4f} -> {log.variance_after:.4f}"
    )
    return graph, result, log


def write_surgery(graph: WeightedGraph, result: WeightedGraph, log: SurgeryLog, out: str):
    directory = output_dir(out)
    before = forman_ricci(graph)
    after = dict(zip((e.key for e in result.edges), forman_ricci(result), strict=True))
    removed = set(log.removed_edges)
    rows = [
        [e.u, e.v, e.w, float(c), after.get(e.key), e.key in removed]
        for e, c in zip(graph.edges, before, strict=True)
    ]
    data = write_rows(
        directory / "surgery_edges.csv",
        ["u", "v", "w", "curvature_before", "curvature_after", "removed"],
        rows,
    )
    summary = write_json(directory / "surgery_log.json", log.model_dump())
    plot = write_plot_json(
        directory / "surgery_edges.plot.json",
        data,
        x="u",
        series=["curvature_before", "curvature_after"],
        title="Forman-Ricci curvature per edge before and after surgery",
        y_label="Ric_F",
    )
    return [data, summary, plot]
