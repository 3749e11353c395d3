"""Spectral gaps of positive semidefinite operators and bounds on them.

``gamma`` denotes the smallest eigenvalue above a nullspace threshold. The
variational (upper) bound and the nullspace projection (lower) bound are
combined into certificates; a chain of certificates feeds each lower bound
into the next step as its ``d``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.sparse as sp

from . import linalg
from .errors import EmptyNullspace, NonPositiveInput, NotOrthonormal, NotPSD


@dataclass(frozen=True)
class GapResult:
    lambda_min: float
    gamma: float
    null_dim: int
    threshold: float
    converged: bool = True
    dimension: int = 0


def _materialize(op):
    if hasattr(op, "to_sparse"):
        return op.to_sparse()
    if sp.issparse(op):
        return op.tocsr()
    return np.asarray(op)


def default_threshold(op) -> float:
    return 1e-8 * max(1.0, linalg.norm_estimate(_materialize(op)))


def _spectrum(op, threshold):
    op = _materialize(op)
    n = op.shape[0]
    if np.iscomplexobj(op):
        # Hermitian restrictions are small and dense
        w, v = np.linalg.eigh(np.asarray(op))
        k = int(np.searchsorted(w, threshold))
        nxt = float(w[k]) if k < n else math.inf
        return w[:k], v[:, :k], nxt, (float(w[0]) if n else math.inf)
    low_vals, low_vecs, nxt = linalg.low_spectrum(op, threshold)
    lam = float(low_vals[0]) if len(low_vals) else nxt
    return low_vals, low_vecs, nxt, lam


def gamma_of(op, threshold: float | None = None) -> GapResult:
    """Smallest eigenvalue above ``threshold`` and the dimension of the near-nullspace."""
    if threshold is None:
        threshold = default_threshold(op)
    vals, _, nxt, lam = _spectrum(op, threshold)
    if lam < -threshold:
        raise NotPSD(f"minimum eigenvalue {lam:.3e} is below -{threshold:.3e}")
    n = _materialize(op).shape[0]
    return GapResult(lambda_min=lam, gamma=nxt, null_dim=len(vals), threshold=threshold, dimension=n)


def nullspace_basis(op, threshold: float | None = None) -> list:
    """Orthonormal eigenvectors with eigenvalue below ``threshold`` (may be empty)."""
    if threshold is None:
        threshold = default_threshold(op)
    vals, vecs, _, lam = _spectrum(op, threshold)
    if lam < -threshold:
        raise NotPSD(f"minimum eigenvalue {lam:.3e} is below -{threshold:.3e}")
    return [vecs[:, i] for i in range(vecs.shape[1])]


def restrict(op, basis) -> np.ndarray:
    """Matrix ``<b_i| op |b_j>`` of an operator compressed to an orthonormal basis."""
    B = np.column_stack(basis) if len(basis) else np.zeros((_materialize(op).shape[0], 0))
    gram = B.conj().T @ B
    if gram.size and np.abs(gram - np.eye(B.shape[1])).max() > 1e-10:
        raise NotOrthonormal("restriction basis is not orthonormal within 1e-10")
    M = _materialize(op)
    AB = M @ B
    out = B.conj().T @ AB
    out = (out + out.conj().T) / 2
    if np.iscomplexobj(out) and np.abs(out.imag).max(initial=0.0) < 1e-14:
        out = out.real
    return out


def exact_norm(op) -> float:
    M = _materialize(op)
    if M.shape[0] <= linalg.DENSE_LIMIT:
        w = np.linalg.eigvalsh(linalg.to_dense(M))
        return float(max(abs(w[0]), abs(w[-1])))
    return linalg.norm_estimate(M)


def variational_upper(H_A, H_B, threshold: float | None = None) -> float:
    """gamma of ``H_B`` compressed to the nullspace of ``H_A``; bounds gamma(H_A + H_B) from above.

    Returns ``inf`` when ``H_B`` vanishes on that nullspace (the bound is vacuous).
    """
    S = nullspace_basis(H_A, threshold)
    if not S:
        raise EmptyNullspace("H_A has no nullspace below the threshold")
    gamma_of(H_B, threshold)  # PSD check
    restricted = restrict(H_B, S)
    return gamma_of(restricted, threshold if threshold is not None else default_threshold(restricted)).gamma


def npl_lower(c: float, d: float, norm_B: float) -> float:
    """Nullspace projection lower bound ``c d / (d + ||H_B||)``."""
    if not (c > 0 and d > 0):
        raise NonPositiveInput(f"need c > 0 and d > 0, got c={c}, d={d}")
    if norm_B < 0:
        raise NonPositiveInput(f"norm bound must be non-negative, got {norm_B}")
    if math.isinf(d):
        return c
    return c * (d / (d + norm_B))


@dataclass
class GapCertificate:
    name: str
    c: float
    d: float
    norm_B: float
    lower_bound: float
    upper_bound: float | None = None
    measured_gamma: float | None = None
    threshold: float = 0.0
    d_source: str = "measured"
    norm_source: str = "measured"

    def holds(self, slack: float = 1e-9) -> bool:
        ok = True
        if self.measured_gamma is not None:
            ok &= self.lower_bound <= self.measured_gamma + slack
            if self.upper_bound is not None:
                ok &= self.measured_gamma <= self.upper_bound + slack
        return bool(ok)

    def to_dict(self) -> dict:
        return {k: (None if isinstance(v, float) and math.isinf(v) else v) for k, v in asdict(self).items()}


def _add(H_A, H_B):
    A, B = _materialize(H_A), _materialize(H_B)
    if sp.issparse(A) and sp.issparse(B):
        return (A + B).tocsr()
    return linalg.to_dense(A) + linalg.to_dense(B)


def certify(H_A, H_B, *, name: str = "step", d: float | None = None, norm_B: float | None = None,
            threshold: float | None = None, measure: bool = True) -> GapCertificate:
    """Bracket gamma(H_A + H_B) using the variational and nullspace projection bounds.

    ``d`` defaults to the measured gamma(H_A); pass a previously certified lower
    bound instead to chain certificates. ``norm_B`` may be any upper bound on
    the norm of ``H_B``.
    """
    if threshold is None:
        threshold = max(default_threshold(H_A), default_threshold(H_B))
    d_source = "given"
    if d is None:
        d = gamma_of(H_A, threshold).gamma
        d_source = "measured"
    norm_source = "given"
    if norm_B is None:
        norm_B = exact_norm(H_B)
        norm_source = "measured"
    c = variational_upper(H_A, H_B, threshold)
    if math.isinf(c):
        # H_B annihilates the nullspace of H_A, so it leaves the gap of H_A untouched
        lower = d
    else:
        lower = npl_lower(c, d, norm_B)
    measured = gamma_of(_add(H_A, H_B), threshold).gamma if measure else None
    return GapCertificate(name=name, c=c, d=d, norm_B=norm_B, lower_bound=lower, upper_bound=c,
                          measured_gamma=measured, threshold=threshold, d_source=d_source,
                          norm_source=norm_source)


@dataclass
class CertificateStep:
    """One decomposition ``H_A + H_B``; ``d="chain"`` takes the previous lower bound."""

    H_A: object
    H_B: object
    name: str = "step"
    d: float | str | None = None
    norm_B: float | None = None


@dataclass
class CertificateChain:
    certificates: list = field(default_factory=list)

    @property
    def final_lower_bound(self) -> float:
        return self.certificates[-1].lower_bound

    def to_dict(self) -> dict:
        return {"certificates": [c.to_dict() for c in self.certificates],
                "final_lower_bound": self.final_lower_bound}


def certify_chain(steps, *, threshold: float | None = None, measure: bool = True) -> CertificateChain:
    """Certify each step in order, passing lower bounds forward where requested."""
    chain = CertificateChain()
    previous = None
    for i, step in enumerate(steps):
        if isinstance(step, dict):
            step = CertificateStep(**step)
        d = step.d
        if d == "chain":
            if previous is None:
                raise NonPositiveInput("first step cannot chain a previous bound")
            d = previous.lower_bound
        cert = certify(step.H_A, step.H_B, name=step.name or f"step{i}", d=d, norm_B=step.norm_B,
                       threshold=threshold, measure=measure)
        if step.d == "chain":
            cert.d_source = "chain"
        chain.certificates.append(cert)
        previous = cert
    return chain


# randomized audit --------------------------------------------------------------


def random_psd_pair(rng: np.random.Generator, max_dim: int = 40):
    """``(H_A, H_B)`` with ``H_A`` having a nontrivial nullspace and ``H_B`` of random rank."""
    n = int(rng.integers(2, max_dim + 1))
    k = int(rng.integers(1, n))
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    spectrum = np.concatenate([np.zeros(k), rng.uniform(0.2, 4.0, n - k)])
    H_A = (Q * spectrum) @ Q.T
    H_A = (H_A + H_A.T) / 2
    r = int(rng.integers(1, n + 1))
    W = rng.standard_normal((n, r))
    H_B = W @ W.T / r
    return H_A, H_B


def certificate_suite(trials: int = 200, seed: int = 0, max_dim: int = 40, slack: float = 1e-9) -> dict:
    """Check ``lower <= gamma(H_A + H_B) <= upper`` on seeded random PSD pairs.

    ``gamma`` is measured by dense diagonalization of the sum, independently of
    the bounds, which only see ``H_A`` and ``H_B`` separately.
    """
    rng = np.random.default_rng(seed)
    rows = []
    worst_lower = worst_upper = math.inf
    for i in range(trials):
        H_A, H_B = random_psd_pair(rng, max_dim)
        c = certify(H_A, H_B, name=f"trial{i}")
        lower_slack = c.measured_gamma - c.lower_bound
        upper_slack = c.upper_bound - c.measured_gamma
        worst_lower = min(worst_lower, lower_slack)
        worst_upper = min(worst_upper, upper_slack)
        rows.append({"dim": int(H_A.shape[0]), "gamma": c.measured_gamma, "lower": c.lower_bound,
                     "upper": None if math.isinf(c.upper_bound) else c.upper_bound})
    return {
        "suite": "certificates",
        "trials": trials,
        "seed": seed,
        "max_dim": max_dim,
        "slack": slack,
        "min_lower_slack": worst_lower,
        "min_upper_slack": None if math.isinf(worst_upper) else worst_upper,
        "pass": bool(worst_lower >= -slack and worst_upper >= -slack),
        "results": rows,
    }
