"""Linear GCN estimators, local averaging, and their risk.

All risks are normalized by ``n`` and expressed for noise with standard
deviation ``sigma`` (analytic reports assume ``sigma = 1`` unless scaled).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
import scipy.sparse as sp

from . import operators as ops
from .errors import ConfigError, DegenerateFitError
from .graph import Graph, reach_matrix
from .operators import PropagationOperator

DEGENERATE_TOL = 1e-300


@dataclass(frozen=True)
class GcnFit:
    W_hat: float
    fitted: np.ndarray
    L: int
    kind: str


@dataclass(frozen=True)
class RiskReport:
    bias_sq: float
    variance: float
    mse: float
    mc_stderr: float = 0.0
    variance_stderr: float = 0.0
    replicates: int = 0
    skipped: int = 0


@dataclass(frozen=True)
class SmoothnessDelta:
    delta: float
    kind: str


def fit_gcn(Y, P: PropagationOperator, L: int) -> GcnFit:
    """Least-squares fit of ``W`` in ``Y ~ W P^L Y``."""
    Y = np.asarray(Y, dtype=float)
    PY = ops.apply_power(P, L, Y)
    denom = float(PY @ PY)
    if denom < DEGENERATE_TOL:
        raise DegenerateFitError(f"||P^L Y||^2 = {denom:g} is degenerate")
    W = float(Y @ PY) / denom
    return GcnFit(W_hat=W, fitted=W * PY, L=L, kind=P.kind)


def local_average_operator(g: Graph, L: int) -> PropagationOperator:
    """Row-stochastic matrix whose row ``i`` is uniform on ``N^L(i)``."""
    R = reach_matrix(g, L)
    sizes = np.diff(R.indptr).astype(float)
    M = sp.diags(1.0 / sizes) @ R
    return ops.from_matrix(M, kind="local_avg", aug_degrees=g.degrees + 1)


def local_average(Y, g: Graph, L: int) -> np.ndarray:
    """Mean of ``Y`` over each node's ``L``-hop neighborhood."""
    Y = np.asarray(Y, dtype=float)
    if Y.shape[0] != g.n:
        raise ValueError(f"signal length {Y.shape[0]} does not match n={g.n}")
    return local_average_operator(g, L).matrix @ Y


def smoothness_delta(f, g: Graph, kind: str = "S") -> SmoothnessDelta:
    """Largest edge discrepancy of ``f`` (rescaled by ``sqrt(d+1)`` for ``T``)."""
    f = np.asarray(f, dtype=float)
    if kind not in ("S", "T"):
        raise ValueError(f"kind must be 'S' or 'T', got {kind!r}")
    if not g.edges:
        return SmoothnessDelta(0.0, kind)
    e = np.asarray(g.edges)
    h = f if kind == "S" else np.sqrt(g.degrees + 1.0) * f
    return SmoothnessDelta(float(np.max(np.abs(h[e[:, 0]] - h[e[:, 1]]))), kind)


def theorem1_bound(L: int, W: float, delta: SmoothnessDelta, f_star, P: PropagationOperator) -> float:
    """Upper bound on the normalized MSE of ``W P^L Y`` for ``P`` in {S, T}."""
    if delta.kind != P.kind:
        raise ConfigError(f"smoothness kind {delta.kind!r} does not match operator {P.kind!r}")
    f_star = np.asarray(f_star, dtype=float)
    n = P.n
    shrink = abs(1.0 - W) * float(np.linalg.norm(f_star)) / np.sqrt(n)
    drift = abs(W) * L * delta.delta
    if P.kind == "T":
        # sum_i (d_i + 1) = 2|E| + n
        drift *= np.sqrt(float(np.sum(P.aug_degrees)) / n)
    bias = drift + shrink
    return bias * bias + W * W * ops.frobenius_sq(P, L) / n


def theorem2_bound(L: int, delta_S: SmoothnessDelta, g: Graph) -> float:
    """Upper bound on the normalized MSE of the ``L``-hop local average."""
    if delta_S.kind != "S":
        raise ConfigError("local averaging bound needs the S-form smoothness constant")
    sizes = local_average_variance_terms(g, L)
    return L * L * delta_S.delta ** 2 + float(np.mean(sizes))


def local_average_variance_terms(g: Graph, L: int) -> np.ndarray:
    """``1 / |N^L(i)|``, the exact variance of each local average."""
    R = reach_matrix(g, L)
    return 1.0 / np.diff(R.indptr).astype(float)


def analytic_risk(W: float, P: PropagationOperator, L: int, f_star, sigma: float = 1.0) -> RiskReport:
    """Exact bias/variance of ``W P^L Y`` under white noise of sd ``sigma``."""
    f_star = np.asarray(f_star, dtype=float)
    n = P.n
    resid = W * ops.apply_power(P, L, f_star) - f_star
    bias_sq = float(resid @ resid) / n
    variance = W * W * sigma * sigma * ops.frobenius_sq(P, L) / n if W != 0 else 0.0
    return RiskReport(bias_sq=bias_sq, variance=variance, mse=bias_sq + variance)


# --- Monte-Carlo ---------------------------------------------------------


@dataclass(frozen=True)
class GcnSmoother:
    """``W P^L Y`` with fixed ``W``, or the refit ``W_hat`` when ``W`` is None."""

    P: PropagationOperator
    L: int
    W: Optional[float] = None

    @property
    def name(self) -> str:
        mode = "refit" if self.W is None else f"W={self.W:g}"
        return f"gcn_{self.P.kind}[{mode}]"

    def __call__(self, Y: np.ndarray) -> np.ndarray:
        if self.W is None:
            return fit_gcn(Y, self.P, self.L).fitted
        return self.W * ops.apply_power(self.P, self.L, Y)


@dataclass(frozen=True)
class LocalAverageSmoother:
    g: Graph
    L: int
    operator: PropagationOperator = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        # built once; replicates only pay for a sparse product
        object.__setattr__(self, "operator", local_average_operator(self.g, self.L))

    @property
    def name(self) -> str:
        return "local_avg"

    def __call__(self, Y: np.ndarray) -> np.ndarray:
        return self.operator.matrix @ np.asarray(Y, dtype=float)


Smoother = Union[GcnSmoother, LocalAverageSmoother]


def replicate_rng(seed: int, index: int) -> np.random.Generator:
    """Independent stream for replicate ``index`` of a run seeded by ``seed``."""
    return np.random.default_rng([int(seed), int(index)])


def monte_carlo_risk(smoother: Smoother, f_star, sigma: float, R: int, seed: int) -> RiskReport:
    """Empirical bias^2 / variance / MSE of ``smoother`` over ``R`` noise draws.

    Replicates whose refit is degenerate are skipped and counted.
    """
    if R < 2:
        raise ConfigError(f"need at least 2 replicates, got {R}")
    f_star = np.asarray(f_star, dtype=float)
    n = f_star.shape[0]
    fits = []
    skipped = 0
    for r in range(R):
        eps = replicate_rng(seed, r).standard_normal(n)
        try:
            fits.append(smoother(f_star + sigma * eps))
        except DegenerateFitError:
            skipped += 1
    if len(fits) < 2:
        raise ConfigError(f"only {len(fits)} usable replicates out of {R}")
    F = np.vstack(fits)
    k = F.shape[0]
    mean_fit = F.mean(axis=0)
    bias_sq = float(np.sum((mean_fit - f_star) ** 2)) / n
    per_var = np.sum((F - mean_fit) ** 2, axis=1) / n
    per_mse = np.sum((F - f_star) ** 2, axis=1) / n
    return RiskReport(
        bias_sq=bias_sq,
        variance=float(per_var.mean()),
        mse=float(per_mse.mean()),
        mc_stderr=float(per_mse.std(ddof=1) / np.sqrt(k)),
        variance_stderr=float(per_var.std(ddof=1) / np.sqrt(k)),
        replicates=k,
        skipped=skipped,
    )


def masked_mse(estimate, target, mask) -> float:
    """Mean squared error restricted to ``mask`` (subset risk, not full-vector)."""
    mask = np.asarray(mask)
    d = np.asarray(estimate, float)[mask] - np.asarray(target, float)[mask]
    return float(np.mean(d * d))
