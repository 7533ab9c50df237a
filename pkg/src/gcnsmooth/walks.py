"""Weighted walks on the self-loop augmented graph.

A length-``L`` walk ``(i, l_1, ..., l_{L-1}, j)`` carries the S-weight
``prod 1/(d_u + 1)`` over its first ``L`` nodes; the T-weight rescales it by
``sqrt((d_i + 1) / (d_j + 1))``. Summing weights over walks ending at ``j``
recovers entry ``(i, j)`` of ``S^L`` / ``T^L``. Enumeration is exponential and
serves as an oracle for the sparse matrix path in :mod:`operators`.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field

from . import operators as ops
from . import synth
from .errors import ConfigError, WalkExplosionError
from .graph import Graph, induced_subgraph, is_tree, neighborhood

DEFAULT_CAP = 10**7
BOUND_TOL = 1e-12


Walk = tuple  # (i, l_1, ..., j); consecutive nodes equal or adjacent


@dataclass(frozen=True)
class WalkEnsemble:
    source: int
    length: int
    by_endpoint: dict
    weight_S: dict = field(default_factory=dict)
    weight_T: dict = field(default_factory=dict)

    @property
    def num_walks(self) -> int:
        return sum(len(w) for w in self.by_endpoint.values())

    def endpoints(self) -> list[int]:
        return sorted(self.by_endpoint)


@dataclass(frozen=True)
class BoundReport:
    observed: float
    bound: float
    side: str
    satisfied: bool
    name: str = ""
    topology: str = ""


def _report(observed: float, bound: float, side: str, name: str = "", topology: str = "") -> BoundReport:
    if side == "upper":
        ok = observed <= bound + BOUND_TOL
    elif side == "lower":
        ok = observed >= bound - BOUND_TOL
    else:
        raise ValueError(f"side must be 'upper' or 'lower', got {side!r}")
    return BoundReport(float(observed), float(bound), side, bool(ok), name, topology)


def weight_S(w: Walk, g: Graph) -> float:
    """Product of ``1/(d_u + 1)`` over every node of the walk but the last."""
    out = 1.0
    for u in w[:-1]:
        out /= g.degrees[u] + 1
    return out


def weight_T(w: Walk, g: Graph) -> float:
    i, j = w[0], w[-1]
    return math.sqrt((g.degrees[i] + 1) / (g.degrees[j] + 1)) * weight_S(w, g)


def estimated_walk_count(g: Graph, L: int) -> int:
    return int(g.degrees.max() + 1) ** L if g.n else 0


def enumerate_walks(g: Graph, i: int, L: int, cap: int = DEFAULT_CAP) -> WalkEnsemble:
    """All length-``L`` walks from ``i`` in ``A + I``, grouped by endpoint."""
    if not 0 <= i < g.n:
        raise ValueError(f"node {i} out of range for n={g.n}")
    if L < 1:
        raise ValueError(f"walk length must be >= 1, got {L}")
    est = estimated_walk_count(g, L)
    if est > cap:
        raise WalkExplosionError(f"~{est} walks of length {L} exceed cap {cap}")
    steps = [(u,) + tuple(int(v) for v in g.neighbors(u)) for u in range(g.n)]
    by_end = defaultdict(list)
    stack = [(i,)]
    while stack:
        w = stack.pop()
        if len(w) == L + 1:
            by_end[w[-1]].append(w)
            continue
        for v in reversed(steps[w[-1]]):
            stack.append(w + (v,))
    by_end = {j: sorted(ws) for j, ws in sorted(by_end.items())}
    ws = {j: math.fsum(weight_S(w, g) for w in walks) for j, walks in by_end.items()}
    wt = {j: math.fsum(weight_T(w, g) for w in walks) for j, walks in by_end.items()}
    return WalkEnsemble(source=i, length=L, by_endpoint=by_end, weight_S=ws, weight_T=wt)


def node_variance(e: WalkEnsemble, g: Graph, kind: str = "S") -> float:
    """``sum_j (sum of walk weights into j)^2``."""
    sums = e.weight_S if kind == "S" else e.weight_T if kind == "T" else None
    if sums is None:
        raise ValueError(f"kind must be 'S' or 'T', got {kind!r}")
    return math.fsum(v * v for v in sums.values())


def entry_via_walks(g: Graph, i: int, j: int, L: int, kind: str = "S", cap: int = DEFAULT_CAP) -> float:
    e = enumerate_walks(g, i, L, cap)
    sums = e.weight_S if kind == "S" else e.weight_T
    return sums.get(j, 0.0)


def check_lower_bound(g: Graph, i: int, L: int) -> BoundReport:
    """Per-node variance of ``S^L`` against ``1/|N^L(i)|``."""
    observed = ops.node_variance(ops.build(g, "S"), L, i)
    bound = 1.0 / neighborhood(g, i, L).size
    return _report(observed, bound, "lower", "lower_bound", f"node={i};L={L}")


# --- proposition checks ------------------------------------------------------------------

PROPOSITIONS = ("P1", "P2", "P3", "P1T", "P2T", "P3T")


def bound_value(which: str, L: int, d: int = 0, d_j: int = 0, r: int = 0) -> tuple[float, str]:
    """Closed-form bound and its side for the six variance propositions."""
    if which in ("P1", "P1T"):
        return 4.0 * (d + 1.0) ** (-L) * (L + 1) * 3.0 ** (2 * L), "upper"
    if which == "P2":
        return (d + 1.0) ** -2 * 4.0 ** (2 - 2 * L), "lower"
    if which == "P2T":
        return 4.0 ** (2 - 2 * L) / ((d + 1.0) * (d_j + 1.0)), "lower"
    if which == "P3":
        return (3.0 / ((d + 1.0) * (r - 1))) ** 2 * 1.5 ** (-2 * L), "lower"
    if which == "P3T":
        return 3.0 / ((d + 1.0) * (r - 1) ** 2) * 1.5 ** (-2 * L), "lower"
    raise ConfigError(f"unknown proposition {which!r}")


def _verify_rooted_tree(g: Graph, i: int, L: int, d: int) -> None:
    ball = neighborhood(g, i, L)
    bad = [int(v) for v in ball if g.degrees[v] != d]
    if bad:
        raise ConfigError(f"nodes {bad[:5]} within {L} hops of {i} do not have degree {d}")
    if not is_tree(induced_subgraph(g, ball)):
        raise ConfigError(f"{L}-hop neighborhood of {i} is not a tree")


def _low_degree_path(g: Graph, i: int, L: int, max_inner: int = 3):
    """A walk of length ``L`` from ``i`` whose inner nodes have degree <= ``max_inner``.

    Searches simple paths first, then pads with self-loops at the end.
    Returns the walk or None.
    """
    best = None
    stack = [(i,)]
    while stack:
        w = stack.pop()
        if len(w) == L + 1:
            return w
        if best is None or len(w) > len(best):
            best = w
        for v in g.neighbors(w[-1]):
            v = int(v)
            if v in w:
                continue
            if len(w) < L and g.degrees[v] > max_inner:
                continue
            stack.append(w + (v,))
    if best is not None and len(best) > 1 and all(g.degrees[u] <= max_inner for u in best[1:]):
        return best + (best[-1],) * (L + 1 - len(best))
    return None


def _verify_cycle_split(g: Graph, i: int, r: int) -> list[int]:
    """Find ``r - 1`` degree-2 nodes closing a cycle through ``i`` and touching nothing else."""
    for start in g.neighbors(i):
        start = int(start)
        ring = [start]
        prev, cur = i, start
        while g.degrees[cur] == 2 and len(ring) < r:
            a, b = (int(x) for x in g.neighbors(cur))
            nxt = b if a == prev else a
            if nxt == i:
                break
            ring.append(nxt)
            prev, cur = cur, nxt
        else:
            continue
        if len(ring) == r - 1 and all(g.degrees[v] == 2 for v in ring) and i in g.neighbors(ring[-1]):
            return ring
    raise ConfigError(f"no cycle of length {r} hanging off node {i}")


def check_proposition(which: str, params: dict, g: Graph | None = None, node: int = 0) -> BoundReport:
    """Evaluate one of the variance propositions on its topology.

    ``params`` always carries ``L``. Without ``g`` the topology is built:

    * P1/P1T: ``d`` and ``depth`` (default ``L + 1``) -> d-regular rooted tree.
    * P2/P2T: ``d`` and ``chain_len`` (default ``L + 1``) -> star with a chain.
    * P3/P3T: ``r`` and ``d_i`` (default 2) -> cycle attached at a star center.

    The structural precondition is always verified before evaluating.
    """
    if which not in PROPOSITIONS:
        raise ConfigError(f"unknown proposition {which!r}")
    L = int(params["L"])
    if L < 1:
        raise ConfigError("L must be >= 1")
    kind = "T" if which.endswith("T") else "S"
    base = which[:2]
    i = node
    d_j = 0
    r = 0
    if base == "P1":
        d = int(params["d"])
        depth = int(params.get("depth", L + 1))
        if g is None:
            if depth < L + 1:
                raise ConfigError(f"tree depth {depth} too shallow for L={L}")
            g = synth.gen_regular_tree(d, depth)
            i = 0
        _verify_rooted_tree(g, i, L, d)
        topo = f"regular_tree;d={d};depth={depth}"
    elif base == "P2":
        d = int(params["d"])
        if g is None:
            g = synth.gen_star_chain(d, int(params.get("chain_len", L + 1)))
            i = 0
        if g.degrees[i] != d:
            raise ConfigError(f"node {i} has degree {g.degrees[i]}, expected {d}")
        walk = _low_degree_path(g, i, L)
        if walk is None:
            raise ConfigError(f"no length-{L} walk from {i} through degree<=3 nodes")
        d_j = int(g.degrees[walk[-1]])
        topo = f"star_chain;d={d};walk_end={walk[-1]};d_j={d_j}"
    else:
        r = int(params["r"])
        if g is None:
            g = synth.gen_cycle_attached(r, int(params.get("d_i", 2)))
            i = 0
        ring = _verify_cycle_split(g, i, r)
        d = int(g.degrees[i])
        topo = f"cycle_attached;r={r};d_i={d};ring={ring[0]}..{ring[-1]}"
    bound, side = bound_value(which, L, d=d, d_j=d_j, r=r)
    observed = ops.node_variance(ops.build(g, kind), L, i)
    return _report(observed, bound, side, which, topo + f";L={L}")
