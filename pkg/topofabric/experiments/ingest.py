import logging
from pathlib import Path
from typing import Any

import orjson
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from topofabric.exceptions import InputError, SchemaError
from topofabric.models.connection import ConnectionGraph
from topofabric.models.constraints import AffineConstraint
from topofabric.models.experiment import validation_problems
from topofabric.models.graph import WeightedGraph
from topofabric.models.scene import SceneState

logger = logging.getLogger(__name__)


class EdgeDocument(BaseModel):
    model_config = ConfigDict(extra="forbid")

    u: int
    v: int
    w: float = Field(default=1.0, gt=0, allow_inf_nan=False)


class GraphDocument(BaseModel):
    vertices: list[int] | None = None
    edges: list[EdgeDocument]
    vertex_weights: dict[int, float] = Field(default_factory=dict)


class ConstraintDocument(BaseModel):
    C: list[list[float]]
    tau: list[float]


class FrameDocument(BaseModel):
    t: float = Field(allow_inf_nan=False)
    graph: GraphDocument
    states: list[list[float]]
    labels: list[str] = Field(default_factory=list)
    constraint: ConstraintDocument | None = None
    relations: dict[str, list[tuple[Any, Any]]] = Field(default_factory=dict)
    transforms: list[list[list[float]]] | None = Field(
        default=None, description="One d x d matrix per listed edge, mapping v's frame to u's"
    )


class SequenceDocument(BaseModel):
    frames: list[FrameDocument]


def _build_scene(frame: FrameDocument) -> SceneState:
    edges = [(e.u, e.v, e.w) for e in frame.graph.edges]
    vertices = frame.graph.vertices or sorted({v for edge in edges for v in edge[:2]})
    graph = WeightedGraph(vertices=vertices, edges=edges, vertex_weights=frame.graph.vertex_weights)
    transforms = None
    if frame.transforms is not None:
        d = len(frame.states[0]) if frame.states else 0
        connection = ConnectionGraph.from_edges(
            vertices, [(*edge, t) for edge, t in zip(edges, frame.transforms, strict=True)], d
        )
        transforms = connection.transforms
    if frame.constraint is None:
        logger.warning(f"frame t={frame.t} has no constraint block; using an empty constraint")
        constraint = AffineConstraint.empty(graph.m)
    else:
        constraint = AffineConstraint(matrix=frame.constraint.C, target=frame.constraint.tau)
    return SceneState(
        graph=graph,
        states=frame.states,
        constraint=constraint,
        labels=frame.labels,
        timestamp=frame.t,
        relations=frame.relations,
        transforms=transforms,
    )


def parse_scene_sequence(data: bytes | str, source: str | None = None) -> list[SceneState]:
    """
    Validate a scene sequence document and build its scenes.

    A bare JSON array is read as the ``frames`` list.

    Raises:
        SchemaError: With every problem found, each located by a JSON pointer.
    """
    try:
        document = orjson.loads(data)
    except orjson.JSONDecodeError as e:
        raise SchemaError([("/", f"invalid JSON: {e}")], source=source) from e
    if isinstance(document, list):
        document = {"frames": document}
    try:
        sequence = SequenceDocument.model_validate(document)
    except ValidationError as e:
        raise SchemaError(validation_problems(e), source=source) from e

    scenes, problems = [], []
    for i, frame in enumerate(sequence.frames):
        try:
            scenes.append(_build_scene(frame))
        except ValidationError as e:
            problems.extend(validation_problems(e, prefix=f"/frames/{i}"))
        except (ValueError, InputError) as e:
            problems.append((f"/frames/{i}", str(e)))
    if problems:
        raise SchemaError(problems, source=source)

    times = [scene.timestamp for scene in scenes]
    if any(b <= a for a, b in zip(times, times[1:], strict=False)):
        raise SchemaError([("/frames", "timestamps must be strictly increasing")], source=source)
    logger.debug(f"parsed {len(scenes)} frames from {source or 'input'}")
    return scenes


def ingest_scene_sequence(path: str | Path) -> list[SceneState]:
    path = Path(path)
    if not path.is_file():
        raise InputError(f"scene sequence {path} does not exist")
    return parse_scene_sequence(path.read_bytes(), source=str(path))
