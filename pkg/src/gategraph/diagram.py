"""Gate diagrams and their compilation into gate graphs.

A node is a triple ``(q, z, t)`` with ``q`` the 1-based element index. The
compiled graph has vertices ``(q, z, t, j)`` in lexicographic order and
adjacency ``1_q (x) A(element) + h_S + h_E``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from . import graph as graph_mod
from .element import G0_NODE_TIMES, ElementGraph, Geometry
from .errors import (
    DanglingElementIndex,
    ElementGeometryMismatch,
    IllegalNodeForLabel,
    InputError,
    InternalInvariant,
    NodeConflict,
)
from .graph import Graph

LABELS = ("1", "H", "HT")


def _node(n):
    try:
        q, z, t = (int(x) for x in n)
    except (TypeError, ValueError):
        raise InputError(f"node {n!r} is not a (q, z, t) triple") from None
    return q, z, t


@dataclass(frozen=True)
class GateDiagram:
    R: int
    labels: tuple
    self_loops: frozenset
    edges: frozenset  # frozensets of two nodes

    def nodes_used(self):
        used = set(self.self_loops)
        for e in self.edges:
            used |= e
        return used

    def to_json(self) -> dict:
        return {
            "R": self.R,
            "labels": list(self.labels),
            "self_loops": [list(n) for n in sorted(self.self_loops)],
            "edges": [[list(a), list(b)] for a, b in sorted(tuple(sorted(e)) for e in self.edges)],
        }


def new_diagram(R: int, labels, S=(), E=(), *, element: ElementGraph | None = None) -> GateDiagram:
    """Validate and build a gate diagram.

    Without ``element`` the node rule of the 128-vertex element applies
    (label 1 exposes t in {1,3,5,7}, H exposes {1,3,2,8}, HT exposes {1,3,4,6}).
    With a substitute element its own exposed times are used.
    """
    R = int(R)
    if R < 1:
        raise InputError("a gate diagram needs at least one element")
    labels = tuple(str(l) for l in labels)
    if len(labels) != R:
        raise InputError(f"expected {R} unitary labels, got {len(labels)}")
    for l in labels:
        if l not in LABELS:
            raise InputError(f"unknown unitary label {l!r}")

    def check(node):
        q, z, t = node
        if not 1 <= q <= R:
            raise DanglingElementIndex(f"node {node} refers to element {q} outside 1..{R}")
        if z not in (0, 1):
            raise InputError(f"node {node}: z must be 0 or 1")
        allowed = element.allowed_times(labels[q - 1]) if element is not None else G0_NODE_TIMES[labels[q - 1]]
        if t not in allowed:
            raise IllegalNodeForLabel(f"node {node} is not exposed by a {labels[q - 1]!r} element")

    loops = []
    for n in S:
        n = _node(n)
        check(n)
        loops.append(n)
    if len(set(loops)) != len(loops):
        raise NodeConflict("a node carries more than one self-loop")
    loop_set = frozenset(loops)

    touched = set()
    edge_set = set()
    for pair in E:
        if len(pair) != 2:
            raise InputError(f"edge {pair!r} must join two nodes")
        a, b = _node(pair[0]), _node(pair[1])
        if a == b:
            raise NodeConflict(f"edge {pair!r} joins a node to itself; use a self-loop")
        for n in (a, b):
            check(n)
            if n in loop_set:
                raise NodeConflict(f"node {n} has both a self-loop and an edge")
            if n in touched:
                raise NodeConflict(f"node {n} has more than one edge")
            touched.add(n)
        edge_set.add(frozenset((a, b)))
    return GateDiagram(R, labels, loop_set, frozenset(edge_set))


def _check_geometry(d: GateDiagram, elem: ElementGraph):
    for n in d.nodes_used():
        _, _, t = n
        if not 1 <= t <= elem.geometry.t_max:
            raise ElementGeometryMismatch(f"node {n} does not exist for element geometry {elem.geometry}")


def vertex_index(geometry: Geometry, q: int, z: int, t: int, j: int) -> int:
    return (q - 1) * geometry.num_vertices + geometry.index(z, t, j)


def node_vertices(geometry: Geometry, node) -> np.ndarray:
    q, z, t = node
    base = vertex_index(geometry, q, z, t, 0)
    return base + np.arange(geometry.j_max)


def compiled_labels(R: int, geometry: Geometry):
    return [(q,) + lab for q in range(1, R + 1) for lab in geometry.labels()]


def compile_diagram(d: GateDiagram, elem: ElementGraph) -> Graph:
    """Gate graph of ``d`` built from copies of ``elem``."""
    _check_geometry(d, elem)
    geo = elem.geometry
    A = sp.kron(sp.identity(d.R, dtype=np.int16), elem.graph.adjacency.astype(np.int16), format="lil")
    for node in d.self_loops:
        for v in node_vertices(geo, node):
            A[v, v] += 1
    for e in d.edges:
        a, b = sorted(e)
        va, vb = node_vertices(geo, a), node_vertices(geo, b)
        for x, y in zip(va, vb):
            A[x, x] += 1
            A[y, y] += 1
            A[x, y] += 1
            A[y, x] += 1
    A = A.tocsr()
    if A.nnz and A.data.max() > 1:
        raise InternalInvariant("compiled adjacency has an entry above 1; element substitute overlaps h_S/h_E")
    return Graph(A, compiled_labels(d.R, geo))


def is_e1_gate_graph(d: GateDiagram, elem: ElementGraph, tol: float = 1e-9) -> bool:
    g = compile_diagram(d, elem)
    return abs(graph_mod.mu(g) - elem.ground_energy) <= tol


def y_space_basis(d: GateDiagram, elem: ElementGraph) -> list:
    """The 4R states ``|q>|psi_{z,a}>`` ordered by q, then z, then a."""
    out = []
    n = elem.num_vertices
    for q in range(d.R):
        for psi in elem.ground_basis:
            v = np.zeros(d.R * n, dtype=complex)
            v[q * n:(q + 1) * n] = psi
            out.append(v)
    return out


def h_terms(d: GateDiagram, elem: ElementGraph):
    """Sparse matrices ``(h_S, h_E)`` on the compiled vertex space."""
    geo = elem.geometry
    K = d.R * geo.num_vertices
    hs = sp.lil_matrix((K, K))
    for node in d.self_loops:
        for v in node_vertices(geo, node):
            hs[v, v] = 1.0
    he = sp.lil_matrix((K, K))
    for e in d.edges:
        a, b = sorted(e)
        for x, y in zip(node_vertices(geo, a), node_vertices(geo, b)):
            he[x, x] += 1.0
            he[y, y] += 1.0
            he[x, y] += 1.0
            he[y, x] += 1.0
    return hs.tocsr(), he.tocsr()


def read_diagram(path, *, element: ElementGraph | None = None) -> GateDiagram:
    try:
        payload = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InputError(f"cannot parse diagram JSON {path}: {exc}") from exc
    return diagram_from_json(payload, element=element)


def diagram_from_json(payload: dict, *, element: ElementGraph | None = None) -> GateDiagram:
    try:
        return new_diagram(
            payload["R"],
            payload["labels"],
            payload.get("self_loops", []),
            payload.get("edges", []),
            element=element,
        )
    except KeyError as exc:
        raise InputError(f"diagram JSON missing field {exc}") from None


def write_diagram(d: GateDiagram, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(d.to_json(), indent=2))
    return path
