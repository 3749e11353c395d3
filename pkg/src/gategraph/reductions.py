"""Promise-problem instances, classification, and the two instance reductions.

``T`` is an ordinary (arbitrary-precision) integer with ``epsilon = 1 / T``.
Classification returns ``undetermined`` rather than raising when a measured
value violates the promise.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from . import graph as graph_mod
from . import sectors
from .diagram import GateDiagram, compile_diagram
from .element import ElementGraph
from .errors import AlphaMismatch, InputError, NotE1GateGraph
from .graph import Graph
from .transforms import pipeline

YES, NO, UNDETERMINED = "yes", "no", "undetermined"


def epsilon(T: int) -> float:
    """``1 / T`` correctly rounded to a float (int true division is exact-then-round)."""
    return 1 / int(T)


@dataclass
class FFBHInstance:
    graph: Graph
    N: int
    T: int
    alpha: int
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        K = self.graph.num_vertices
        self.T = int(self.T)
        if not 1 <= self.N <= K:
            raise InputError(f"need 1 <= N <= K = {K}, got N = {self.N}")
        if self.T < 4 * K:
            raise InputError(f"need T >= 4K = {4 * K}, got T = {self.T}")
        if self.alpha < 1:
            raise InputError("alpha must be a positive integer")

    @property
    def epsilon(self) -> float:
        return epsilon(self.T)

    def thresholds(self):
        eps = self.epsilon
        return eps ** self.alpha, eps + eps ** self.alpha


@dataclass
class XYInstance:
    graph: Graph
    N: int
    c: float
    T: int
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        K = self.graph.num_vertices
        self.T = int(self.T)
        if not 0 <= self.N <= K:
            raise InputError(f"need 0 <= N <= K = {K}, got N = {self.N}")
        if self.T < 1:
            raise InputError("T must be positive")

    @property
    def epsilon(self) -> float:
        return epsilon(self.T)

    def thresholds(self):
        return self.c, self.c + self.epsilon


@dataclass(frozen=True)
class Verdict:
    classification: str
    measured: float
    thresholds: tuple
    solver_tol: float

    def to_dict(self):
        return {"classification": self.classification, "measured": self.measured,
                "thresholds": list(self.thresholds), "solver_tol": self.solver_tol}


def _decide(measured: float, low: float, high: float, tol: float) -> str:
    yes = measured <= low + tol
    no = measured >= high - tol
    if yes and not no:
        return YES
    if no and not yes:
        return NO
    return UNDETERMINED


def resolve_tol(low: float, high: float, tol: float | None = None) -> float:
    """Default decision tolerance: a quarter of the promise gap, capped at ``1e-9``."""
    if tol is not None:
        return tol
    return min(1e-9, (high - low) / 4)


def classify_ffbh(inst: FFBHInstance, tol: float | None = None) -> Verdict:
    """Compare lambda_N^1 with the promise thresholds.

    The decision tolerance never drops below floating-point round-off of the
    operator; when round-off exceeds half the promise gap the verdict is
    ``undetermined``.
    """
    low, high = inst.thresholds()
    op = sectors.bose_hubbard(inst.graph, inst.N)
    tol = max(resolve_tol(low, high, tol), sectors.roundoff_floor(op.to_sparse()))
    lam = sectors.lambda1(inst.graph, inst.N, min(tol, 1e-10))
    return Verdict(_decide(lam, low, high, tol), lam, (low, high), tol)


def classify_xy(inst: XYInstance, tol: float | None = None) -> Verdict:
    low, high = inst.thresholds()
    op = sectors.xy_sector(inst.graph, inst.N)
    tol = max(resolve_tol(low, high, tol), sectors.roundoff_floor(op.to_sparse()))
    th = op.lowest(max(min(tol, 1e-10), sectors.roundoff_floor(op.to_sparse())))
    return Verdict(_decide(th, low, high, tol), th, (low, high), tol)


def reduce_bh_to_xy(inst: FFBHInstance, mu_tol: float = 1e-10) -> XYInstance:
    """Same graph and particle number, ``T' = 4T`` and ``c = N mu(G) + 1/(4T)``."""
    if inst.alpha != 3:
        raise AlphaMismatch(f"the XY reduction is stated for alpha = 3, got {inst.alpha}")
    m = graph_mod.mu(inst.graph, mu_tol)
    c = inst.N * m + 1.0 / (4 * inst.T)
    prov = {"reduction": "bh_to_xy", "mu": m, "mu_tol": mu_tol, "source_T": str(inst.T),
            "epsilon_prime": epsilon(4 * inst.T)}
    return XYInstance(inst.graph, inst.N, c, 4 * inst.T, prov)


def reduce_to_simple(d: GateDiagram, elem: ElementGraph, N: int, T: int, alpha: int = 1,
                     tol: float = 1e-9) -> FFBHInstance:
    """Map a gate-graph instance with precision ``1/T`` to the loop-free graph with precision ``1/T^7``."""
    G, loopless, sl, nsl = pipeline(d, elem)
    m = graph_mod.mu(G)
    if abs(m - elem.ground_energy) > tol:
        raise NotE1GateGraph(f"smallest adjacency eigenvalue {m:.12g} differs from {elem.ground_energy:.12g}")
    K = G.num_vertices
    T = int(T)
    if T < 4 * K:
        raise InputError(f"need T >= 4K = {4 * K}, got T = {T}")
    T_prime = T ** 7
    K_prime = nsl.num_vertices
    prov = {
        "reduction": "to_simple",
        "K": K,
        "K_prime": K_prime,
        "R": d.R,
        "source_T": str(T),
        "source_alpha": 8 * alpha,
        "T_prime_ge_4K_prime": T_prime >= 4 * K_prime,
        "epsilon_prime": epsilon(T_prime),
        "epsilon_ceiling": "not enforced",
        "mu_G": m,
    }
    return FFBHInstance(nsl, N, T_prime, alpha, prov)


def source_instance(d: GateDiagram, elem: ElementGraph, N: int, T: int, alpha: int = 1) -> FFBHInstance:
    """The gate-graph side of ``reduce_to_simple``, with exponent ``8 alpha``."""
    return FFBHInstance(compile_diagram(d, elem), N, T, 8 * alpha, {"role": "source"})


# JSON --------------------------------------------------------------------------


def instance_to_json(inst, graph_path: str) -> dict:
    if isinstance(inst, FFBHInstance):
        out = {"kind": "ffbh", "graph": graph_path, "N": inst.N, "T": str(inst.T), "alpha": inst.alpha}
    else:
        out = {"kind": "xy", "graph": graph_path, "N": inst.N, "T": str(inst.T), "c": inst.c}
    if inst.provenance:
        out["provenance"] = inst.provenance
    return out


def instance_from_json(payload: dict, base_dir=".") -> FFBHInstance | XYInstance:
    try:
        kind = payload["kind"]
        gpath = Path(payload["graph"])
        if not gpath.is_absolute():
            gpath = Path(base_dir) / gpath
        g = graph_mod.read_graph(gpath)
        N = int(payload["N"])
        T = int(payload["T"])
        if kind == "ffbh":
            return FFBHInstance(g, N, T, int(payload.get("alpha", 3)), payload.get("provenance", {}))
        if kind == "xy":
            return XYInstance(g, N, float(payload["c"]), T, payload.get("provenance", {}))
    except (KeyError, ValueError, TypeError) as exc:
        raise InputError(f"malformed instance: {exc}") from exc
    raise InputError(f"unknown instance kind {kind!r}")


def read_instance(path):
    path = Path(path)
    try:
        payload = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise InputError(f"cannot parse instance JSON {path}: {exc}") from exc
    return instance_from_json(payload, path.parent)
