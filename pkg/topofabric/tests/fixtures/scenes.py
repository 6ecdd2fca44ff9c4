"""
Scene sequence documents for ingest, pipeline and CLI tests.

Documents are plain dicts in the on-disk layout, so tests can break one field at a time and
check where the problem is reported.
"""

import copy
from pathlib import Path

import orjson

REPO_ROOT = Path(__file__).resolve().parents[3]
DEMO_DIR = REPO_ROOT / "demo"
DEMO_SEQUENCE = DEMO_DIR / "scene_sequence.json"

TRIANGLE_EDGES = [{"u": 1, "v": 2, "w": 1.0}, {"u": 2, "v": 3, "w": 1.0}, {"u": 1, "v": 3}]
STATIC_STATES = [[0.1, 0.2], [0.3, 0.1], [0.2, 0.4]]
PINNED_VALUE = 0.05


def frame(t: float, states=None, edges=None, constraint: bool = True) -> dict:
    document = {
        "t": t,
        "graph": {"edges": copy.deepcopy(edges or TRIANGLE_EDGES)},
        "states": copy.deepcopy(states or STATIC_STATES),
    }
    if constraint:
        m = len(document["graph"]["edges"])
        # pins the first canonical edge at its observed value
        document["constraint"] = {"C": [[1.0] + [0.0] * (m - 1)], "tau": [PINNED_VALUE]}
    return document


def static_sequence(steps: int = 3, spacing: float = 0.1) -> dict:
    """The same triangle scene repeated at evenly spaced timestamps."""
    return {"frames": [frame(round(spacing * k, 6)) for k in range(steps)]}


def demo_document() -> dict:
    return orjson.loads(DEMO_SEQUENCE.read_bytes())


def dump(document) -> bytes:
    return orjson.dumps(document)


def write_document(directory: str | Path, name: str, document) -> str:
    path = Path(directory) / name
    path.write_bytes(dump(document))
    return str(path)
