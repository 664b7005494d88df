"""Artifact writers: CSV with commented metadata headers, JSON reports,
and graph exports."""

from __future__ import annotations

import csv
import json
from pathlib import Path

from .dfs import ConnectivityGraph
from .spinops import state_to_string

__all__ = [
    "write_csv",
    "write_json",
    "write_graph_json",
    "write_graph_edgelist",
]


def _meta_lines(meta: dict) -> list[str]:
    return [f"# {k} = {meta[k]}" for k in sorted(meta)]


def write_csv(path, columns: list[str], rows, meta: dict | None = None) -> Path:
    """UTF-8 CSV with '#'-prefixed metadata lines before the header row."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as fh:
        for line in _meta_lines(meta or {}):
            fh.write(line + "\n")
        writer = csv.writer(fh)
        writer.writerow(columns)
        writer.writerows(rows)
    return path


def write_json(path, payload: dict, meta: dict | None = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    body = dict(payload)
    if meta:
        body["_meta"] = {k: meta[k] for k in sorted(meta)}
    with path.open("w", encoding="utf-8") as fh:
        json.dump(body, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")
    return path


def write_graph_json(path, graph: ConnectivityGraph, n_sites: int, meta: dict | None = None) -> Path:
    """Adjacency-list JSON: vertices as bitstrings, edges as index pairs."""
    payload = {
        "vertices": [state_to_string(v, n_sites) for v in graph.vertices],
        "edges": [list(e) for e in graph.edges],
        "frozen_bonds": list(graph.frozen),
        "n_frozen": graph.n_frozen,
    }
    return write_json(path, payload, meta)


def write_graph_edgelist(path, graph: ConnectivityGraph) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for a, b in graph.edges:
            fh.write(f"{a} {b}\n")
    return path
