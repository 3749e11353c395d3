"""Fixed-sector XY and Bose-Hubbard operators on a graph.

Both bases are enumerated in lexicographic order of the sorted tuple of
particle positions: for hard-core states the positions are a combination of
``range(K)``, for bosons a multiset. Ranking uses the combinatorial number
system, so a basis state is located in O(N) without a lookup table.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator

from . import linalg
from .errors import BadWeight, BudgetExceeded, InternalInvariant
from .graph import Graph, mu, write_operator

MAX_BASIS = 2_000_000
ORDERING = "lex-positions"


def _binomial_table(M: int, N: int) -> np.ndarray:
    table = np.zeros((M + 1, N + 2), dtype=np.int64)
    for m in range(M + 1):
        for k in range(min(m, N + 1) + 1):
            table[m, k] = math.comb(m, k)
    return table


def _check_budget(dim: int, max_dim: int):
    if dim > max_dim:
        raise BudgetExceeded(f"sector dimension {dim} exceeds budget {max_dim}")


class _CombinadicBasis:
    """Sorted-position basis with lexicographic combinadic rank/unrank."""

    multiset = False

    def __init__(self, K: int, N: int, max_dim: int = MAX_BASIS):
        if K < 1:
            raise BadWeight("need at least one vertex")
        if N < 0:
            raise BadWeight("particle number must be non-negative")
        self.K = int(K)
        self.N = int(N)
        self._M = self.K + self.N - 1 if self.multiset else self.K
        self.dim = math.comb(self._M, self.N)
        _check_budget(self.dim, max_dim)
        self._binom = _binomial_table(max(self._M, 0), self.N)
        gen = (itertools.combinations_with_replacement(range(self.K), self.N) if self.multiset
               else itertools.combinations(range(self.K), self.N))
        flat = np.fromiter(itertools.chain.from_iterable(gen), dtype=np.int64, count=self.dim * self.N)
        self.positions = flat.reshape(self.dim, self.N)
        self.positions.flags.writeable = False

    def __len__(self):
        return self.dim

    def _combination(self, positions):
        positions = np.asarray(positions, dtype=np.int64)
        if self.multiset:
            return positions + np.arange(self.N)
        return positions

    def rank(self, positions) -> np.ndarray | int:
        """Index of sorted position tuple(s); accepts shape ``(N,)`` or ``(m, N)``."""
        c = self._combination(positions)
        single = c.ndim == 1
        c = np.atleast_2d(c)
        if self.N == 0:
            r = np.zeros(c.shape[0], dtype=np.int64)
        else:
            k = self.N - np.arange(self.N)
            r = self.dim - 1 - self._binom[self._M - 1 - c, k].sum(axis=1)
        return int(r[0]) if single else r

    def unrank(self, i: int) -> tuple:
        return tuple(int(x) for x in self.positions[i])

    def occupations(self) -> np.ndarray:
        occ = np.zeros((self.dim, self.K), dtype=np.int64)
        rows = np.repeat(np.arange(self.dim), self.N)
        np.add.at(occ, (rows, self.positions.ravel()), 1)
        return occ

    def occupation_to_positions(self, occ) -> tuple:
        return tuple(v for v, n in enumerate(occ) for _ in range(int(n)))

    def index_of_occupation(self, occ) -> int:
        occ = np.asarray(occ)
        if occ.sum() != self.N or len(occ) != self.K:
            raise BadWeight(f"occupation {occ.tolist()} is not in this sector")
        return self.rank(np.array(self.occupation_to_positions(occ), dtype=np.int64))

    def manifest(self) -> dict:
        return {"kind": type(self).__name__, "K": self.K, "N": self.N, "ordering": ORDERING, "count": self.dim}


class HammingBasis(_CombinadicBasis):
    """K-bit strings of Hamming weight N, listed by the positions of their ones."""

    multiset = False

    def __init__(self, K: int, N: int, max_dim: int = MAX_BASIS):
        if not 0 <= N <= K:
            raise BadWeight(f"weight {N} outside 0..{K}")
        super().__init__(K, N, max_dim)

    def bitstrings(self) -> list[str]:
        return ["".join(str(int(b)) for b in row) for row in self.occupations()]


class BosonBasis(_CombinadicBasis):
    """Occupation vectors of N bosons on K vertices."""

    multiset = True


@dataclass
class SectorOperator:
    basis: _CombinadicBasis
    matrix: sp.csr_matrix
    shift: float = 0.0
    meta: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.basis.dim

    def apply(self, x):
        y = self.matrix @ x
        if self.shift:
            y = y - self.shift * x
        return y

    def as_linear_operator(self) -> LinearOperator:
        return LinearOperator((self.dim, self.dim), matvec=self.apply, rmatvec=self.apply, dtype=float)

    def to_sparse(self) -> sp.csr_matrix:
        if self.shift:
            return (self.matrix - self.shift * sp.identity(self.dim, format="csr")).tocsr()
        return self.matrix

    def toarray(self) -> np.ndarray:
        return self.to_sparse().toarray()

    def shifted(self, value: float) -> "SectorOperator":
        return SectorOperator(self.basis, self.matrix, self.shift + value, dict(self.meta))

    def lowest(self, tol: float | None = None) -> float:
        return linalg.smallest_eigenvalue(self.to_sparse(), tol)

    def export(self, path) -> list[Path]:
        """Write the operator as Matrix Market plus a basis manifest JSON."""
        path = Path(path)
        write_operator(self.to_sparse(), path)
        manifest = path.with_suffix(".basis.json")
        manifest.write_text(json.dumps({**self.basis.manifest(), "shift": self.shift, **self.meta}, indent=2))
        return [path, manifest]


def xy_sector(g: Graph, N: int, *, max_dim: int = MAX_BASIS) -> SectorOperator:
    """XY operator with self-loop fields restricted to Hamming weight ``N``."""
    K = g.num_vertices
    basis = HammingBasis(K, N, max_dim)
    if K > 62:
        mat = _hopping_matrix(g, basis, hardcore=True)
        return SectorOperator(basis, mat, meta={"model": "xy"})
    masks = (np.int64(1) << basis.positions).sum(axis=1) if N else np.zeros(1, dtype=np.int64)
    order = np.argsort(masks)
    sorted_masks = masks[order]
    rows, cols = [], []
    for i, j in g.edges():
        bi, bj = np.int64(1) << i, np.int64(1) << j
        hi, hj = (masks & bi) != 0, (masks & bj) != 0
        src = np.flatnonzero(hi ^ hj)
        dst_masks = masks[src] ^ (bi | bj)
        dst = order[np.searchsorted(sorted_masks, dst_masks)]
        rows.append(src)
        cols.append(dst)
    loop_mask = np.int64(sum(1 << int(v) for v in np.flatnonzero(g.diagonal())))
    diag = np.array([bin(int(m)).count("1") for m in (masks & loop_mask)], dtype=float)
    rows = np.concatenate(rows + [np.arange(basis.dim)]) if rows else np.arange(basis.dim)
    cols = np.concatenate(cols + [np.arange(basis.dim)]) if cols else np.arange(basis.dim)
    data = np.concatenate([np.ones(len(rows) - basis.dim), diag])
    mat = sp.csr_matrix((data, (rows, cols)), shape=(basis.dim, basis.dim))
    mat.eliminate_zeros()
    return SectorOperator(basis, mat, meta={"model": "xy"})


def _slot_multiplicity(P: np.ndarray) -> np.ndarray:
    return (P[:, :, None] == P[:, None, :]).sum(axis=2)


def _hopping_matrix(g: Graph, basis: _CombinadicBasis, hardcore: bool) -> sp.csr_matrix:
    """Hopping plus on-site terms on a sorted-position basis.

    A particle at ``i`` hops to neighbour ``j`` with amplitude
    ``sqrt(n_i (n_j + 1))``; the diagonal holds ``sum_k n_k (n_k - 1)`` plus
    the number of particles on self-looped vertices.
    """
    P = np.asarray(basis.positions)
    dim, N = P.shape
    diag_loop = g.diagonal().astype(float)
    if N == 0:
        return sp.csr_matrix(np.zeros((1, 1)))
    mult = _slot_multiplicity(P)
    diag = (mult - 1).sum(axis=1).astype(float) + diag_loop[P].sum(axis=1)
    adj = g.adjacency.tocsr().copy()
    adj.setdiag(0)
    adj.eliminate_zeros()
    indptr, indices = adj.indptr, adj.indices
    rows, cols, vals = [np.arange(dim)], [np.arange(dim)], [diag]
    for s in range(N):
        first = np.ones(dim, dtype=bool) if s == 0 else P[:, s] != P[:, s - 1]
        states = np.flatnonzero(first)
        src = P[states, s]
        deg = indptr[src + 1] - indptr[src]
        st = np.repeat(states, deg)
        n_i = np.repeat(mult[states, s], deg)
        starts = np.repeat(indptr[src], deg)
        offsets = np.arange(deg.sum()) - np.repeat(np.cumsum(deg) - deg, deg)
        dst_vertex = indices[starts + offsets]
        newP = P[st].copy()
        n_j = (newP == dst_vertex[:, None]).sum(axis=1)
        if hardcore:
            keep = n_j == 0
            st, n_i, newP, n_j, dst_vertex = st[keep], n_i[keep], newP[keep], n_j[keep], dst_vertex[keep]
        newP[:, s] = dst_vertex
        newP.sort(axis=1)
        rows.append(st)
        cols.append(basis.rank(newP))
        vals.append(np.sqrt(n_i * (n_j + 1.0)))
    mat = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(dim, dim))
    mat.eliminate_zeros()
    return mat


def bose_hubbard(g: Graph, N: int, *, max_dim: int = MAX_BASIS) -> SectorOperator:
    """N-boson Hamiltonian with unit hopping along edges and on-site repulsion ``n(n-1)``."""
    basis = BosonBasis(g.num_vertices, N, max_dim)
    return SectorOperator(basis, _hopping_matrix(g, basis, hardcore=False), meta={"model": "bose-hubbard"})


def interaction_diagonal(basis: _CombinadicBasis) -> np.ndarray:
    """Diagonal of ``sum_k n_k (n_k - 1)`` in the given basis."""
    if basis.N == 0:
        return np.zeros(1)
    return (_slot_multiplicity(np.asarray(basis.positions)) - 1).sum(axis=1).astype(float)


def roundoff_floor(matrix) -> float:
    """Smallest eigenvalue accuracy worth asking for: ``64 eps ||H||``."""
    return 64 * np.finfo(float).eps * max(1.0, linalg.norm_estimate(matrix))


def theta(g: Graph, N: int, tol: float | None = None) -> float:
    """Smallest eigenvalue of the XY operator in the weight-N sector."""
    return xy_sector(g, N).lowest(tol)


def lambda1(g: Graph, N: int, tol: float | None = None, *, mu_value: float | None = None) -> float:
    """Smallest eigenvalue of the Bose-Hubbard operator minus ``N * mu(g)``."""
    op = bose_hubbard(g, N)
    if tol is None:
        tol = linalg.default_tol(op.to_sparse())
    m = mu(g) if mu_value is None else mu_value
    floor = roundoff_floor(op.to_sparse())
    value = op.lowest(max(tol, floor)) - N * m
    if value < -2 * max(tol, floor):
        raise InternalInvariant(f"lambda1 = {value:.3e} is below -2 tol; eigensolver inaccurate")
    return value


def hardcore_restriction(g: Graph, N: int) -> SectorOperator:
    """Bose-Hubbard operator restricted to occupations ``n_k <= 1``, indexed like ``xy_sector``."""
    K = g.num_vertices
    if not 0 <= N <= K:
        raise BadWeight(f"weight {N} outside 0..{K}")
    bh = bose_hubbard(g, N)
    hb = HammingBasis(K, N)
    if N == 0:
        return SectorOperator(hb, bh.matrix.copy(), meta={"model": "hardcore"})
    P = np.asarray(bh.basis.positions)
    keep = np.flatnonzero(np.all(np.diff(P, axis=1) > 0, axis=1)) if N > 1 else np.arange(bh.dim)
    new_index = hb.rank(P[keep])
    sub = bh.matrix[keep][:, keep].tocoo()
    mat = sp.csr_matrix((sub.data, (new_index[sub.row], new_index[sub.col])), shape=(hb.dim, hb.dim))
    return SectorOperator(hb, mat, meta={"model": "hardcore"})


def is_frustration_free(g: Graph, N: int, threshold: float = 1e-9) -> bool:
    return lambda1(g, N) <= threshold
