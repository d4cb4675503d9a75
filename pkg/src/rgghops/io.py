"""File formats: point CSV (``id,x,y``) with a JSON sidecar, edge-list CSV, and reports."""

from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path

import numpy as np

from .sampler import RggInstance, SeedSpec

POINT_HEADER = ["id", "x", "y"]
EDGE_HEADER = ["src", "dst"]


def sidecar_path(path) -> Path:
    return Path(path).with_suffix(".json")


def write_points(instance: RggInstance, path) -> Path:
    """Write the point CSV and its metadata sidecar; returns the sidecar path."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(POINT_HEADER)
        for i, (x, y) in enumerate(instance.points.tolist()):
            w.writerow([i, repr(x), repr(y)])
    side = sidecar_path(path)
    if side == path:
        raise ValueError("point file must not have a .json suffix")
    side.write_text(json.dumps(instance.metadata(), indent=2, sort_keys=True) + "\n")
    return side


def read_points(path, sidecar=None) -> RggInstance:
    path = Path(path)
    meta = json.loads(Path(sidecar or sidecar_path(path)).read_text())
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != POINT_HEADER:
        raise ValueError(f"{path}: expected header {','.join(POINT_HEADER)}")
    body = rows[1:]
    ids = [int(row[0]) for row in body]
    if ids != list(range(len(body))):
        raise ValueError(f"{path}: ids must be 0..m-1 in order")
    pts = np.array([[float(row[1]), float(row[2])] for row in body], dtype=float).reshape(-1, 2)
    seed = meta.get("seed")
    if meta.get("realized_count") not in (None, len(pts)):
        raise ValueError(f"{path}: sidecar realized_count does not match the CSV")
    return RggInstance(
        n=meta["n"],
        r=meta["r"],
        model=meta["model"],
        points=pts,
        seed=SeedSpec(seed["master_seed"], seed["trial_index"]) if seed else None,
        labelled_u=meta.get("labelled_u"),
        labelled_v=meta.get("labelled_v"),
        poisson_count=meta.get("poisson_count"),
    )


def write_edges(graph, path) -> int:
    edges = graph.edge_array()
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(EDGE_HEADER)
        w.writerows(edges.tolist())
    return len(edges)


def read_edges(path) -> np.ndarray:
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != EDGE_HEADER:
        raise ValueError(f"{path}: expected header {','.join(EDGE_HEADER)}")
    return np.array([[int(a), int(b)] for a, b in rows[1:]], dtype=np.int64).reshape(-1, 2)


# -- reports -------------------------------------------------------------

VOLATILE_FIELDS = ("wall_ms",)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def canonical_hash(config: dict, rows: list, summary: dict) -> str:
    """SHA-256 over the report with wall-clock fields removed."""
    stable = [{k: v for k, v in row.items() if k not in VOLATILE_FIELDS} for row in rows]
    blob = json.dumps(
        _jsonable({"config": config, "rows": stable, "summary": summary}),
        sort_keys=True, separators=(",", ":"),
    )
    return hashlib.sha256(blob.encode()).hexdigest()


def flatten(row: dict, prefix: str = "") -> dict:
    out = {}
    for k, v in row.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(flatten(v, key + "."))
        else:
            out[key] = v
    return out


def _csv_cell(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, tuple)):
        return " ".join(str(x) for x in v)
    return v


def write_report(report: dict, path, fmt: str = "json", header=None) -> None:
    path = Path(path)
    if fmt == "json":
        path.write_text(json.dumps(_jsonable(report), indent=2, sort_keys=True) + "\n")
        return
    if fmt != "csv":
        raise ValueError(f"unknown report format {fmt!r}")
    rows = [flatten(r) for r in _jsonable(report["rows"])]
    if header is None:
        header = list(rows[0]) if rows else []
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([_csv_cell(row.get(h)) for h in header])
