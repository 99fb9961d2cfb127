"""File ingestion and emission.

Numeric output is CSV/JSON only.  Floats are written with 17 significant
digits (%.17g), which round-trips IEEE doubles exactly.  Every emitted file
carries a schema marker: CSV matrices/vectors start with a ``# lsnet ...``
comment line, tabular CSVs carry a ``schema_version`` column and JSON
documents a ``schema_version`` key.
"""

from __future__ import annotations

import warnings
from pathlib import Path

import numpy as np

from .model import AdjacencyMatrix, CovariateMatrix
from .simulate import indicator_covariate

__all__ = [
    "SCHEMA_VERSION",
    "format_float",
    "ingest_edge_list",
    "ingest_covariate",
    "read_matrix_csv",
    "write_matrix_csv",
    "write_vector_csv",
    "read_adjacency_csv",
]

SCHEMA_VERSION = "1"


def format_float(x):
    """17 significant digits; exact round-trip for float64."""
    return f"{float(x):.17g}"


def _data_lines(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ValueError(f"cannot read {path}: {exc}") from exc
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        yield line


def ingest_edge_list(path):
    """Undirected adjacency from a text edge list.

    Each data line holds two node ids (arbitrary strings) separated by
    whitespace or commas; lines starting with ``#`` are comments.  Nodes are
    indexed in first-appearance order, edges are symmetrized, duplicates
    collapse, and self-loops are dropped with a warning that counts them.
    """
    index = {}
    edges = set()
    self_loops = 0
    for line in _data_lines(path):
        parts = line.replace(",", " ").split()
        if len(parts) != 2:
            raise ValueError(f"{path}: expected two node ids per line, got {line!r}")
        u, v = parts
        for node in (u, v):
            if node not in index:
                index[node] = len(index)
        if u == v:
            self_loops += 1
            continue
        i, j = index[u], index[v]
        edges.add((min(i, j), max(i, j)))
    n = len(index)
    if n < 2:
        raise ValueError(f"{path}: fewer than 2 nodes")
    if self_loops:
        warnings.warn(f"{path}: dropped {self_loops} self-loop(s)", UserWarning)
    entries = np.zeros((n, n))
    for i, j in edges:
        entries[i, j] = 1.0
        entries[j, i] = 1.0
    return AdjacencyMatrix(entries)


def read_matrix_csv(path):
    """Dense numeric grid from CSV (``#`` comment lines allowed)."""
    rows = [[float(tok) for tok in line.split(",")] for line in _data_lines(path)]
    if not rows:
        raise ValueError(f"{path}: no data rows")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise ValueError(f"{path}: ragged rows")
    return np.asarray(rows, dtype=float)


def write_matrix_csv(path, matrix, label="matrix"):
    matrix = np.asarray(matrix, dtype=float)
    with open(path, "w", newline="") as fh:
        fh.write(f"# lsnet {label} schema_version={SCHEMA_VERSION} shape={matrix.shape[0]}x{matrix.shape[1]}\n")
        for row in matrix:
            fh.write(",".join(format_float(x) for x in row))
            fh.write("\n")


def write_vector_csv(path, vector, label="vector"):
    vector = np.asarray(vector, dtype=float)
    with open(path, "w", newline="") as fh:
        fh.write(f"# lsnet {label} schema_version={SCHEMA_VERSION} length={vector.shape[0]}\n")
        for x in vector:
            fh.write(format_float(x))
            fh.write("\n")


def read_vector_csv(path):
    values = [float(line) for line in _data_lines(path)]
    return np.asarray(values, dtype=float)


def ingest_covariate(path, kind="dense_matrix", expected_n=None):
    """Covariate from a dense n x n CSV or a node-attribute file.

    dense_matrix: numeric grid, symmetric within 1e-9, zero diagonal.
    node_attribute_indicator: one label per line (node order), producing
    X_ij = 1 iff the labels match.  ``expected_n`` (usually the adjacency's
    node count) makes size mismatches an error at ingestion time.
    """
    if kind == "node_attribute_indicator":
        labels = [line for line in _data_lines(path)]
        if len(labels) < 2:
            raise ValueError(f"{path}: fewer than 2 attribute lines")
        if expected_n is not None and len(labels) != expected_n:
            raise ValueError(
                f"{path}: {len(labels)} attribute lines but the network has {expected_n} nodes"
            )
        return indicator_covariate(np.asarray(labels))
    if kind != "dense_matrix":
        raise ValueError(f"unknown covariate kind {kind!r}")
    entries = read_matrix_csv(path)
    if entries.shape[0] != entries.shape[1]:
        raise ValueError(f"{path}: covariate must be square, got {entries.shape}")
    if expected_n is not None and entries.shape[0] != expected_n:
        raise ValueError(
            f"{path}: covariate is {entries.shape[0]}x{entries.shape[0]} "
            f"but the network has {expected_n} nodes"
        )
    gap = float(np.abs(entries - entries.T).max())
    if gap > 1e-9:
        raise ValueError(f"{path}: covariate asymmetric; max |X_ij - X_ji| = {gap:.3e}")
    entries = (entries + entries.T) / 2.0
    return CovariateMatrix(entries)


def read_adjacency_csv(path):
    """Dense 0/1 adjacency grid (the format `lsnet simulate` emits)."""
    return AdjacencyMatrix(read_matrix_csv(path))
