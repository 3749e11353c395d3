"""Element graphs: the 128-vertex building block and a small stand-in.

An element graph has vertices labelled ``(z, t, j)`` with ``z`` in {0, 1},
``t`` in ``1..t_max`` and ``j`` in ``0..j_max-1``, ordered lexicographically
so that the vertex space factorises as ``|z> (x) |t> (x) |j>``. It declares a
ground energy and four orthonormal ground states indexed by ``(z, a)``.
"""

from __future__ import annotations

import enum
import math
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.linalg

from . import linalg
from .errors import BadLabeling, GeometryMismatch, InputError, WrongVertexCount
from .graph import Graph, read_graph

E1 = -1.0 - 3.0 * math.sqrt(2.0)
ASSET_ENV = "GATEGRAPH_ASSET_DIR"
ASSET_NAME = "g0.mtx"

_H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
_T = np.diag([1, np.exp(1j * math.pi / 4)])

# t values each unitary label exposes as nodes
G0_NODE_TIMES = {
    "1": (1, 3, 5, 7),
    "H": (1, 3, 2, 8),
    "HT": (1, 3, 4, 6),
}


class Source(enum.Enum):
    ASSET = "Asset"
    MINI_DOUBLE = "MiniDouble"


@dataclass(frozen=True)
class Geometry:
    t_max: int
    j_max: int

    @property
    def num_vertices(self) -> int:
        return 2 * self.t_max * self.j_max

    def index(self, z: int, t: int, j: int) -> int:
        return (z * self.t_max + (t - 1)) * self.j_max + j

    def labels(self):
        return [(z, t, j) for z in (0, 1) for t in range(1, self.t_max + 1) for j in range(self.j_max)]


G0_GEOMETRY = Geometry(t_max=8, j_max=8)
MINI_GEOMETRY = Geometry(t_max=2, j_max=2)


@dataclass(frozen=True)
class ElementGraph:
    graph: Graph
    geometry: Geometry
    ground_energy: float
    ground_basis: tuple  # four vectors ordered (z, a) = (0,0), (0,1), (1,0), (1,1)
    source: Source
    # value of <psi_{z,a}| 1 (x) |t><t| (x) 1 |psi_{z,a}> for every t
    block_constant: float

    def __post_init__(self):
        if self.graph.num_vertices != self.geometry.num_vertices:
            raise GeometryMismatch("graph size does not match geometry")
        if len(self.ground_basis) != 4:
            raise InputError("an element declares exactly four ground states")
        G = np.column_stack(self.ground_basis)
        if np.abs(G.conj().T @ G - np.eye(4)).max() > 1e-12:
            raise InputError("declared ground states are not orthonormal")

    @property
    def num_vertices(self) -> int:
        return self.geometry.num_vertices

    def allowed_times(self, label: str):
        """t values a diagram element with this unitary label exposes as nodes."""
        if self.source is Source.ASSET:
            try:
                return G0_NODE_TIMES[label]
            except KeyError:
                raise InputError(f"unknown unitary label {label!r}") from None
        if label not in G0_NODE_TIMES:
            raise InputError(f"unknown unitary label {label!r}")
        # substitutes expose every (z, t) pair regardless of label
        return tuple(range(1, self.geometry.t_max + 1))

    def basis_matrix(self) -> np.ndarray:
        return np.column_stack(self.ground_basis)


def psi_state(z: int, a: int, geometry: Geometry = G0_GEOMETRY) -> np.ndarray:
    """Declared ground state of the 128-vertex element.

    Amplitudes carry ``|z>`` on t = 1, 3, 5, 7, ``H|z>`` on t = 2, 8 and
    ``HT|z>`` on t = 4, 6, times the phase state on the last register; the
    ``a = 1`` state is the entrywise conjugate of the ``a = 0`` state.
    """
    if geometry != G0_GEOMETRY:
        raise GeometryMismatch(f"psi states are defined for {G0_GEOMETRY}, got {geometry}")
    if z not in (0, 1) or a not in (0, 1):
        raise InputError("z and a must be bits")
    ket = np.zeros(2, dtype=complex)
    ket[z] = 1.0
    first_two = np.zeros((2, 8), dtype=complex)
    for t in (1, 3, 5, 7):
        first_two[:, t - 1] = ket
    for t in (2, 8):
        first_two[:, t - 1] = _H @ ket
    for t in (4, 6):
        first_two[:, t - 1] = _H @ _T @ ket
    omega = np.exp(-1j * math.pi * np.arange(8) / 4) / math.sqrt(8)
    state = np.kron(first_two.ravel(), omega) / math.sqrt(8)
    return state.conj() if a == 1 else state


def _g0_basis():
    return tuple(psi_state(z, a) for z in (0, 1) for a in (0, 1))


def mini_double_element() -> ElementGraph:
    """Eight-vertex element with adjacency ``1_z (x) X_t (x) X_j``.

    Its ground energy is -1 with ground states ``|z>|+>|->`` (a = 0) and
    ``|z>|->|+>`` (a = 1).
    """
    X = np.array([[0, 1], [1, 0]])
    adj = np.kron(np.eye(2, dtype=int), np.kron(X, X))
    graph = Graph(adj, MINI_GEOMETRY.labels())
    plus = np.array([1, 1]) / math.sqrt(2)
    minus = np.array([1, -1]) / math.sqrt(2)
    basis = []
    for z in (0, 1):
        ez = np.eye(2)[z]
        basis.append(np.kron(ez, np.kron(plus, minus)).astype(complex))
        basis.append(np.kron(ez, np.kron(minus, plus)).astype(complex))
    return ElementGraph(graph, MINI_GEOMETRY, -1.0, tuple(basis), Source.MINI_DOUBLE, block_constant=0.5)


def load_element(path, *, labels_path=None) -> ElementGraph:
    """Load the 128-vertex element from a Matrix Market file with a label sidecar.

    Rows are permuted into canonical ``(z, t, j)`` order using the sidecar.
    """
    g = read_graph(path, labels_path=labels_path, require_labels=True)
    geometry = G0_GEOMETRY
    if g.num_vertices != geometry.num_vertices:
        raise WrongVertexCount(f"expected {geometry.num_vertices} vertices, found {g.num_vertices}")
    labels = g.vertex_labels
    perm = np.empty(g.num_vertices, dtype=int)
    seen = set()
    for row, label in enumerate(labels):
        try:
            z, t, j = (int(x) for x in label)
        except (TypeError, ValueError):
            raise BadLabeling(f"row {row}: label {label!r} is not a (z, t, j) triple") from None
        if z not in (0, 1) or not 1 <= t <= geometry.t_max or not 0 <= j < geometry.j_max:
            raise BadLabeling(f"row {row}: label {label!r} out of range")
        if (z, t, j) in seen:
            raise BadLabeling(f"duplicate label {(z, t, j)}")
        seen.add((z, t, j))
        perm[geometry.index(z, t, j)] = row
    adj = g.adjacency[perm][:, perm]
    graph = Graph(adj, geometry.labels())
    return ElementGraph(graph, geometry, E1, _g0_basis(), Source.ASSET, block_constant=1.0 / 8.0)


def find_asset(directory=None):
    """Locate ``g0.mtx`` in ``directory`` or the directory named by ``$GATEGRAPH_ASSET_DIR``."""
    directory = directory or os.environ.get(ASSET_ENV)
    if not directory:
        return None
    candidate = Path(directory) / ASSET_NAME
    return candidate if candidate.exists() else None


@dataclass(frozen=True)
class ConformanceReport:
    lambda_min: float
    lambda_min_matches_e1: bool
    ground_dim: int
    basis_residual: float
    span_match: bool
    max_principal_angle: float
    tolerance: float

    def to_dict(self):
        return dict(self.__dict__)


def validate_element(e: ElementGraph, tol: float = 1e-9) -> ConformanceReport:
    """Check the declared ground energy and ground states against a numerical diagonalization."""
    A = e.graph.adjacency.astype(float)
    w, v = np.linalg.eigh(linalg.to_dense(A))
    lam = float(w[0])
    ground = v[:, w <= lam + tol]
    B = e.basis_matrix()
    basis_residual = float(max(np.linalg.norm(A @ b - e.ground_energy * b) for b in e.ground_basis))
    if ground.shape[1] == B.shape[1]:
        angle = float(np.max(scipy.linalg.subspace_angles(ground.astype(complex), B)))
    else:
        angle = math.pi / 2
    return ConformanceReport(
        lambda_min=lam,
        lambda_min_matches_e1=abs(lam - E1) <= tol,
        ground_dim=int(ground.shape[1]),
        basis_residual=basis_residual,
        span_match=bool(angle <= 1e-8 and abs(lam - e.ground_energy) <= tol),
        max_principal_angle=angle,
        tolerance=tol,
    )


def time_projector_overlaps(e: ElementGraph, t: int) -> np.ndarray:
    """4x4 matrix of ``<psi_{x,b}| 1 (x) |t><t| (x) 1 |psi_{z,a}>``."""
    geo = e.geometry
    mask = np.zeros(geo.num_vertices, dtype=bool)
    for z in (0, 1):
        for j in range(geo.j_max):
            mask[geo.index(z, t, j)] = True
    B = e.basis_matrix()
    return B.conj().T @ (mask[:, None] * B)
