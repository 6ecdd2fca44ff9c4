from typing import Annotated, Any

import networkx as nx
import numpy as np
import numpy.typing as npt
import orjson
from pydantic import BaseModel, ConfigDict, Field, model_validator

# A 1-cochain is a float vector ordered by the graph's canonical edge order.
Cochain = npt.NDArray[np.float64]


class Edge(BaseModel):
    """Oriented edge; after validation the tail is always the smaller vertex id."""

    model_config = ConfigDict(frozen=True)

    u: int = Field(description="Tail vertex id")
    v: int = Field(description="Head vertex id")
    w: float = Field(default=1.0, gt=0, allow_inf_nan=False, description="Edge weight")

    @property
    def key(self) -> tuple[int, int]:
        return (self.u, self.v)


def _coerce_edge(raw: Any) -> Any:
    if isinstance(raw, Edge):
        return raw if raw.u <= raw.v else Edge(u=raw.v, v=raw.u, w=raw.w)
    if isinstance(raw, list | tuple):
        raw = dict(zip(("u", "v", "w"), raw, strict=False))
    if isinstance(raw, dict) and "u" in raw and "v" in raw:
        try:
            if int(raw["u"]) > int(raw["v"]):
                raw = {**raw, "u": raw["v"], "v": raw["u"]}
        except (TypeError, ValueError):
            pass
    return raw


class WeightedGraph(BaseModel):
    """
    Undirected graph with canonically oriented, positively weighted edges.

    Edges are stored sorted by ``(min endpoint, max endpoint)`` with the tail at the smaller id.
    Every operator in the package indexes edges and vertices in this order.
    """

    vertices: list[int] = Field(description="Vertex ids")
    edges: list[Edge] = Field(default_factory=list, description="Edges")
    vertex_weights: dict[int, Annotated[float, Field(gt=0, allow_inf_nan=False)]] = Field(
        default_factory=dict, description="Positive weight per vertex (default 1)"
    )
    allow_disconnected: bool = Field(default=False, description="Permit several components")

    @model_validator(mode="before")
    @classmethod
    def _orient_edges(cls, data: Any) -> Any:
        if isinstance(data, dict) and isinstance(data.get("edges"), list):
            data = {**data, "edges": [_coerce_edge(e) for e in data["edges"]]}
        return data

    @model_validator(mode="after")
    def _check_structure(self) -> "WeightedGraph":
        if len(set(self.vertices)) != len(self.vertices):
            raise ValueError("duplicate vertex ids")
        self.vertices = sorted(self.vertices)
        known = set(self.vertices)

        seen: set[tuple[int, int]] = set()
        for edge in self.edges:
            if edge.u == edge.v:
                raise ValueError(f"self-loop at vertex {edge.u}")
            if edge.u not in known or edge.v not in known:
                raise ValueError(f"edge ({edge.u}, {edge.v}) references an unknown vertex")
            if edge.key in seen:
                raise ValueError(f"more than one edge between {edge.u} and {edge.v}")
            seen.add(edge.key)
        self.edges = sorted(self.edges, key=lambda e: e.key)

        unknown = set(self.vertex_weights) - known
        if unknown:
            raise ValueError(f"vertex weights given for unknown vertices {sorted(unknown)}")

        if not self.allow_disconnected and self.vertices:
            components = self.components()
            if len(components) > 1:
                raise ValueError(f"graph is disconnected; components: {components}")
        return self

    @property
    def n(self) -> int:
        return len(self.vertices)

    @property
    def m(self) -> int:
        return len(self.edges)

    def vertex_index(self) -> dict[int, int]:
        return {v: i for i, v in enumerate(self.vertices)}

    def edge_index(self) -> dict[tuple[int, int], int]:
        return {e.key: k for k, e in enumerate(self.edges)}

    def find_edge(self, u: int, v: int) -> int:
        """Canonical index of the edge joining ``u`` and ``v`` (either orientation)."""
        key = (min(u, v), max(u, v))
        try:
            return self.edge_index()[key]
        except KeyError as e:
            raise ValueError(f"no edge between {u} and {v}") from e

    def edge_weights(self) -> npt.NDArray[np.float64]:
        return np.array([e.w for e in self.edges], dtype=float)

    def vertex_weight_array(self) -> npt.NDArray[np.float64]:
        return np.array([self.vertex_weights.get(v, 1.0) for v in self.vertices], dtype=float)

    def degrees(self) -> dict[int, int]:
        deg = dict.fromkeys(self.vertices, 0)
        for e in self.edges:
            deg[e.u] += 1
            deg[e.v] += 1
        return deg

    def to_networkx(self) -> nx.Graph:
        """Vertices inserted sorted, edges in canonical order, ``weight`` attribute set."""
        graph = nx.Graph()
        graph.add_nodes_from(self.vertices)
        graph.add_weighted_edges_from((e.u, e.v, e.w) for e in self.edges)
        return graph

    def components(self) -> list[list[int]]:
        parts = [sorted(c) for c in nx.connected_components(self.to_networkx())]
        return sorted(parts, key=lambda c: c[0])

    def is_connected(self) -> bool:
        return len(self.components()) <= 1

    def without_edges(self, keys: set[tuple[int, int]]) -> "WeightedGraph":
        return WeightedGraph(
            vertices=self.vertices,
            edges=[e for e in self.edges if e.key not in keys],
            vertex_weights=self.vertex_weights,
            allow_disconnected=True,
        )

    def to_json(self) -> bytes:
        payload = {
            "vertices": self.vertices,
            "edges": [{"u": e.u, "v": e.v, "w": e.w} for e in self.edges],
            "vertex_weights": {str(k): w for k, w in sorted(self.vertex_weights.items())},
        }
        return orjson.dumps(payload, option=orjson.OPT_SORT_KEYS)

    @classmethod
    def from_json(cls, data: bytes | str) -> "WeightedGraph":
        return cls.model_validate(orjson.loads(data))

    @classmethod
    def from_pairs(
        cls,
        pairs: list[tuple[int, int]] | list[tuple[int, int, float]],
        allow_disconnected: bool = False,
    ) -> "WeightedGraph":
        """Build a graph from ``(u, v)`` or ``(u, v, w)`` tuples; vertices are inferred."""
        vertices = sorted({p[0] for p in pairs} | {p[1] for p in pairs})
        return cls(vertices=vertices, edges=list(pairs), allow_disconnected=allow_disconnected)


class CycleBasis(BaseModel):
    """Fundamental cycles of a spanning tree, one signed row per chord."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    tree_edges: list[int] = Field(description="Canonical indices of the spanning-tree edges")
    chords: list[int] = Field(description="Canonical index of the chord closing each cycle")
    signature_matrix: np.ndarray = Field(description="q x m matrix in {-1, 0, 1}")

    @property
    def q(self) -> int:
        return int(self.signature_matrix.shape[0])

    def cycle_edges(self, row: int) -> list[int]:
        return [int(k) for k in np.flatnonzero(self.signature_matrix[row])]
