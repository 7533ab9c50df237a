"""Propagation operators on the self-loop augmented graph.

``S = D~^{-1} A~`` (GraphSAGE, row-stochastic) and
``T = D~^{-1/2} A~ D~^{-1/2}`` (GCN, symmetric), where ``A~ = A + I`` and
``D~ = diag(d_i + 1)``. Hollow variants drop the diagonal and renormalize
rows; they are used to predict a node from its neighbors only.

Powers are applied by repeated sparse products and never cached.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .graph import Graph

KINDS = ("S", "T", "S_hollow", "T_hollow")

# Tolerances for construction-level and iterated identities.
CONSTRUCTION_TOL = 1e-12
ITERATED_TOL = 1e-10

_BLOCK = 256


@dataclass(frozen=True, eq=False)
class PropagationOperator:
    """Sparse ``n x n`` linear operator applied once per layer."""

    kind: str
    matrix: sp.csr_matrix
    aug_degrees: np.ndarray
    _transpose: sp.csr_matrix = field(repr=False, default=None)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def transpose(self) -> sp.csr_matrix:
        if self._transpose is None:
            object.__setattr__(self, "_transpose", self.matrix.T.tocsr())
        return self._transpose

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()


@dataclass(frozen=True)
class VarianceProfile:
    """Per-node ``E[(P^L eps)_i^2]`` for unit-variance white noise."""

    per_node: np.ndarray
    total: float


def build(g: Graph, kind: str = "S") -> PropagationOperator:
    """Construct ``S``, ``T`` or one of their hollow variants for ``g``."""
    if kind not in KINDS:
        raise ValueError(f"unknown operator kind {kind!r}; expected one of {KINDS}")
    aug = (g.degrees + 1).astype(float)
    if kind in ("S", "T"):
        M = g.augmented()
        if kind == "S":
            M = sp.diags(1.0 / aug) @ M
        else:
            r = 1.0 / np.sqrt(aug)
            M = sp.diags(r) @ M @ sp.diags(r)
    else:
        M = g.adjacency.astype(float)
        if kind == "T_hollow":
            r = 1.0 / np.sqrt(aug)
            M = M @ sp.diags(r)
        rows = np.asarray(M.sum(axis=1)).ravel()
        # isolated nodes keep an empty row: nothing to predict from
        inv = np.divide(1.0, rows, out=np.zeros_like(rows), where=rows > 0)
        M = sp.diags(inv) @ M
    M = sp.csr_matrix(M)
    M.sort_indices()
    return PropagationOperator(kind=kind, matrix=M, aug_degrees=aug)


def from_matrix(M, kind: str, aug_degrees=None) -> PropagationOperator:
    """Wrap an arbitrary square sparse matrix as an operator (e.g. local averaging)."""
    M = sp.csr_matrix(M, dtype=float)
    if M.shape[0] != M.shape[1]:
        raise ValueError(f"operator must be square, got {M.shape}")
    M.sort_indices()
    if aug_degrees is None:
        aug_degrees = np.full(M.shape[0], np.nan)
    return PropagationOperator(kind=kind, matrix=M, aug_degrees=np.asarray(aug_degrees, float))


def _power_apply(M: sp.csr_matrix, L: int, v: np.ndarray) -> np.ndarray:
    out = np.array(v, dtype=float, copy=True)
    for _ in range(L):
        out = M @ out
    return out


def apply_power(P: PropagationOperator, L: int, v) -> np.ndarray:
    """Return ``P^L v`` (``v`` may be a vector or an ``n x k`` block)."""
    v = np.asarray(v, dtype=float)
    if v.shape[0] != P.n:
        raise ValueError(f"dimension mismatch: operator is {P.n}x{P.n}, vector has {v.shape[0]}")
    if L < 0:
        raise ValueError(f"depth must be >= 0, got {L}")
    return _power_apply(P.matrix, L, v)


def row_of_power(P: PropagationOperator, L: int, i: int) -> np.ndarray:
    """Row ``i`` of ``P^L``, computed as ``(P^T)^L e_i``."""
    e = np.zeros(P.n)
    e[i] = 1.0
    return _power_apply(P.transpose, L, e)


def node_variance(P: PropagationOperator, L: int, i: int) -> float:
    """``E[(P^L eps)_i^2] = sum_j (P^L)_{ij}^2``."""
    row = row_of_power(P, L, i)
    return float(row @ row)


def variance_profile(P: PropagationOperator, L: int) -> VarianceProfile:
    """Squared row norms of ``P^L``; their sum is ``||P^L||_F^2``.

    Rows are materialized in blocks of unit vectors pushed through the
    transpose, so memory stays at ``O(n * block)``.
    """
    if L < 1:
        raise ValueError(f"depth must be >= 1, got {L}")
    n = P.n
    per_node = np.empty(n)
    Pt = P.transpose
    for start in range(0, n, _BLOCK):
        stop = min(start + _BLOCK, n)
        E = np.zeros((n, stop - start))
        E[np.arange(start, stop), np.arange(stop - start)] = 1.0
        R = _power_apply(Pt, L, E)
        per_node[start:stop] = np.einsum("ij,ij->j", R, R)
    return VarianceProfile(per_node=per_node, total=float(per_node.sum()))


def frobenius_sq(P: PropagationOperator, L: int) -> float:
    return variance_profile(P, L).total
