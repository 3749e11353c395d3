"""Graphs given by symmetric 0-1 adjacency matrices, possibly with self-loops."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.io
import scipy.sparse as sp

from . import linalg
from .errors import EmptyGraph, MissingSelfLoop, NonBinaryEntry, NotSymmetric, InputError

LABEL_SCHEME_VERSION = "gategraph-labels/1"


class Graph:
    """Immutable graph on ``K`` vertices.

    The adjacency is kept as a canonical CSR matrix of ``int8`` entries.
    ``vertex_labels`` is an optional tuple of hashable labels, one per vertex;
    this class never interprets them.
    """

    __slots__ = ("_adj", "_labels")

    def __init__(self, adjacency, vertex_labels=None):
        if sp.issparse(adjacency):
            mat = sp.csr_matrix(adjacency, copy=True)
        else:
            arr = np.asarray(adjacency)
            if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
                raise InputError(f"adjacency must be square, got shape {arr.shape}")
            mat = sp.csr_matrix(arr)
        if mat.shape[0] != mat.shape[1]:
            raise InputError(f"adjacency must be square, got shape {mat.shape}")
        if mat.shape[0] == 0:
            raise EmptyGraph("graphs must have at least one vertex")
        mat.sum_duplicates()
        mat.eliminate_zeros()
        data = mat.data
        if data.size and not np.all(data == 1):
            bad = np.flatnonzero(data != 1)[0]
            raise NonBinaryEntry(f"entry with value {data[bad]!r} is not 0 or 1")
        mat = sp.csr_matrix((np.ones(mat.nnz, dtype=np.int8), mat.indices, mat.indptr), shape=mat.shape)
        mat.sort_indices()
        if (mat != mat.T).nnz:
            raise NotSymmetric("adjacency matrix is not symmetric")
        if vertex_labels is not None:
            vertex_labels = tuple(tuple(l) if isinstance(l, list) else l for l in vertex_labels)
            if len(vertex_labels) != mat.shape[0]:
                raise InputError("need exactly one label per vertex")
        mat.data.flags.writeable = False
        self._adj = mat
        self._labels = vertex_labels

    @property
    def adjacency(self) -> sp.csr_matrix:
        return self._adj

    @property
    def num_vertices(self) -> int:
        return self._adj.shape[0]

    @property
    def vertex_labels(self):
        return self._labels

    def toarray(self) -> np.ndarray:
        return self._adj.toarray()

    def diagonal(self) -> np.ndarray:
        return self._adj.diagonal()

    def degrees(self) -> np.ndarray:
        """Number of neighbours other than the vertex itself."""
        return np.asarray(self._adj.sum(axis=1)).ravel() - self.diagonal()

    def edges(self):
        """Off-diagonal edges ``(i, j)`` with ``i < j``."""
        coo = sp.triu(self._adj, k=1).tocoo()
        return list(zip(coo.row.tolist(), coo.col.tolist()))

    def index_of(self, label) -> int:
        if self._labels is None:
            raise InputError("graph has no vertex labels")
        try:
            return self._labels.index(label)
        except ValueError:
            raise InputError(f"unknown vertex label {label!r}") from None

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return self._adj.shape == other._adj.shape and (self._adj != other._adj).nnz == 0

    def __hash__(self):
        return hash((self.num_vertices, self._adj.nnz))

    def __repr__(self):
        loops = int(self.diagonal().sum())
        return f"Graph(K={self.num_vertices}, edges={len(self.edges())}, self_loops={loops})"


def new_graph(adjacency, vertex_labels=None) -> Graph:
    return Graph(adjacency, vertex_labels)


def is_simple(g: Graph) -> bool:
    return not g.diagonal().any()


def has_all_self_loops(g: Graph) -> bool:
    return bool(np.all(g.diagonal() == 1))


def add_self_loops(g: Graph) -> Graph:
    """Put a self-loop on every vertex (``A + I`` for a simple graph)."""
    if not is_simple(g):
        raise NonBinaryEntry("graph already has self-loops; A + I would leave the 0-1 range")
    return Graph(g.adjacency + sp.identity(g.num_vertices, dtype=np.int8, format="csr"), g.vertex_labels)


def strip_all_self_loops(g: Graph) -> Graph:
    """Return the graph with adjacency ``A - I``; every vertex must carry a self-loop."""
    diag = g.diagonal()
    missing = np.flatnonzero(diag != 1)
    if missing.size:
        raise MissingSelfLoop(int(missing[0]))
    stripped = g.adjacency - sp.identity(g.num_vertices, dtype=np.int8, format="csr")
    return Graph(stripped, g.vertex_labels)


@dataclass(frozen=True)
class SpectralSummary:
    mu: float
    norm_bound: float
    tolerance_used: float


def default_tol(g: Graph) -> float:
    one_norm = float(np.asarray(g.adjacency.sum(axis=0)).max())
    return 1e-10 * max(1.0, one_norm)


def mu(g: Graph, tol: float | None = None) -> float:
    """Smallest eigenvalue of the adjacency matrix."""
    if tol is None:
        tol = default_tol(g)
    return linalg.smallest_eigenvalue(g.adjacency.astype(float), tol)


def spectral_summary(g: Graph, tol: float | None = None) -> SpectralSummary:
    if tol is None:
        tol = default_tol(g)
    return SpectralSummary(mu=mu(g, tol), norm_bound=linalg.norm_estimate(g.adjacency.astype(float)),
                           tolerance_used=tol)


# Matrix Market I/O -----------------------------------------------------------


def _labels_path(path: Path) -> Path:
    return path.with_name(path.name + ".labels.json") if path.suffix != ".mtx" else path.with_suffix(".labels.json")


def write_graph(g: Graph, path, *, labels_path=None) -> list[Path]:
    """Write ``g`` as a symmetric pattern Matrix Market file.

    When the graph carries vertex labels they go to a JSON sidecar
    (``<stem>.labels.json`` unless ``labels_path`` is given). Returns the
    list of files written.
    """
    path = Path(path)
    lower = sp.tril(g.adjacency).tocoo()
    lines = [
        "%%MatrixMarket matrix coordinate pattern symmetric",
        f"% {LABEL_SCHEME_VERSION}",
        f"{g.num_vertices} {g.num_vertices} {lower.nnz}",
    ]
    order = np.lexsort((lower.row, lower.col))
    lines.extend(f"{r + 1} {c + 1}" for r, c in zip(lower.row[order], lower.col[order]))
    path.write_text("\n".join(lines) + "\n")
    written = [path]
    if g.vertex_labels is not None:
        lp = Path(labels_path) if labels_path else _labels_path(path)
        lp.write_text(json.dumps({"scheme": LABEL_SCHEME_VERSION, "labels": [list(l) if isinstance(l, tuple) else l
                                                                          for l in g.vertex_labels]}))
        written.append(lp)
    return written


def read_graph(path, *, labels_path=None, require_labels: bool = False) -> Graph:
    """Read a Matrix Market graph, attaching labels from the sidecar if present."""
    path = Path(path)
    try:
        mat = scipy.io.mmread(str(path))
    except (ValueError, OSError, IndexError) as exc:
        raise InputError(f"cannot parse Matrix Market file {path}: {exc}") from exc
    mat = sp.csr_matrix(mat)
    lp = Path(labels_path) if labels_path else _labels_path(path)
    labels = None
    if lp.exists():
        try:
            payload = json.loads(lp.read_text())
        except json.JSONDecodeError as exc:
            raise InputError(f"cannot parse label sidecar {lp}: {exc}") from exc
        labels = [tuple(l) if isinstance(l, list) else l for l in payload["labels"]]
    elif require_labels:
        raise InputError(f"label sidecar {lp} not found")
    return Graph(mat, labels)


def write_operator(matrix, path) -> Path:
    """Write a real symmetric sparse matrix in Matrix Market format."""
    path = Path(path)
    scipy.io.mmwrite(str(path), sp.coo_matrix(matrix), symmetry="symmetric", field="real",
                     comment=LABEL_SCHEME_VERSION)
    return path
