from typing import Any

import numpy as np
import orjson
from pydantic import BaseModel, ConfigDict, Field, model_validator

from topofabric.models.graph import WeightedGraph


class ConnectionGraph(BaseModel):
    """
    Graph whose edges carry d x d transforms.

    ``transforms[k]`` belongs to canonical edge ``k`` (tail i, head j) and maps the head's frame
    into the tail's: a section is consistent on that edge when ``T_ij f_j = f_i``.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True)

    base: WeightedGraph
    d: int = Field(gt=0, description="Block dimension")
    transforms: list[np.ndarray] = Field(description="One d x d transform per canonical edge")

    @model_validator(mode="after")
    def _check_transforms(self) -> "ConnectionGraph":
        if len(self.transforms) != self.base.m:
            raise ValueError(
                f"{len(self.transforms)} transforms given for {self.base.m} edges"
            )
        self.transforms = [
            np.asarray(t, dtype=float).reshape(self.d, self.d) for t in self.transforms
        ]
        for k, transform in enumerate(self.transforms):
            if not np.all(np.isfinite(transform)):
                raise ValueError(f"transform of edge {k} has non-finite entries")
        return self

    @property
    def size(self) -> int:
        return self.d * self.base.n

    @classmethod
    def from_edges(
        cls,
        vertices: list[int],
        edges: list[tuple[int, int, float, Any]],
        d: int,
        allow_disconnected: bool = False,
    ) -> "ConnectionGraph":
        """
        Build from ``(u, v, w, T_uv)`` tuples in any orientation.

        An edge given head-first is re-oriented and its transform inverted.
        """
        base = WeightedGraph(
            vertices=vertices,
            edges=[(u, v, w) for u, v, w, _ in edges],
            allow_disconnected=allow_disconnected,
        )
        by_key = {}
        for u, v, _, transform in edges:
            transform = np.asarray(transform, dtype=float).reshape(d, d)
            if u > v:
                by_key[(v, u)] = np.linalg.inv(transform)
            else:
                by_key[(u, v)] = transform
        return cls(base=base, d=d, transforms=[by_key[e.key] for e in base.edges])

    @classmethod
    def identity(cls, base: WeightedGraph, d: int) -> "ConnectionGraph":
        return cls(base=base, d=d, transforms=[np.eye(d) for _ in base.edges])

    @classmethod
    def from_json(cls, data: bytes | str) -> "ConnectionGraph":
        payload = orjson.loads(data)
        d = int(payload["d"])
        edges = [
            (e["u"], e["v"], e.get("w", 1.0), t)
            for e, t in zip(payload["edges"], payload["transforms"], strict=True)
        ]
        return cls.from_edges(payload["vertices"], edges, d)

    def to_json(self) -> bytes:
        payload = {
            "vertices": self.base.vertices,
            "edges": [{"u": e.u, "v": e.v, "w": e.w} for e in self.base.edges],
            "vertex_weights": {str(k): w for k, w in sorted(self.base.vertex_weights.items())},
            "d": self.d,
            "transforms": [t.reshape(-1).tolist() for t in self.transforms],
        }
        return orjson.dumps(payload, option=orjson.OPT_SORT_KEYS)


class GaugeAnchor(BaseModel):
    """Linear conditions ``A f = a`` that remove the gauge freedom of a connection solve."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    matrix: np.ndarray = Field(description="r x (d n) anchor matrix")
    value: np.ndarray = Field(description="r-vector")

    @model_validator(mode="after")
    def _check(self) -> "GaugeAnchor":
        self.matrix = np.atleast_2d(np.asarray(self.matrix, dtype=float))
        self.value = np.asarray(self.value, dtype=float).reshape(-1)
        if self.matrix.shape[0] != self.value.shape[0]:
            raise ValueError("anchor matrix and value disagree on the row count")
        if np.linalg.matrix_rank(self.matrix) < self.matrix.shape[0]:
            raise ValueError("anchor matrix must have full row rank")
        return self

    @property
    def r(self) -> int:
        return int(self.matrix.shape[0])

    @classmethod
    def clamp(cls, cg: ConnectionGraph, vertex: int, value) -> "GaugeAnchor":
        """Pin the block of ``vertex`` to ``value``."""
        index = cg.base.vertex_index()[vertex]
        matrix = np.zeros((cg.d, cg.size))
        matrix[:, index * cg.d : (index + 1) * cg.d] = np.eye(cg.d)
        return cls(matrix=matrix, value=np.asarray(value, dtype=float).reshape(cg.d))

    @classmethod
    def clamp_first(cls, cg: ConnectionGraph, value) -> "GaugeAnchor":
        """Default anchor: pin the vertex with the smallest id."""
        return cls.clamp(cg, cg.base.vertices[0], value)
