"""Graph families, latent/spectral embeddings, signals and noise.

Every generator is a pure function of its parameters and seed.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ConfigError, GraphError
from .graph import Graph, hop_distances, is_connected, is_tree

MAX_SPECTRAL_N = 5000


@dataclass(frozen=True, eq=False)
class LatentEmbedding:
    """``n x 2`` per-node coordinates."""

    U: np.ndarray


@dataclass(frozen=True)
class SignalSpec:
    alpha: float

    @property
    def beta(self) -> tuple[float, float]:
        return (-self.alpha, self.alpha)


# --- latent variable graphs ------------------------------------------------


def _unit_weight_mst(n: int, edges) -> list[int]:
    """Kruskal on unit weights; ties broken by edge index. Returns edge indices."""
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    keep = []
    for k, (i, j) in enumerate(edges):
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[ri] = rj
            keep.append(k)
    return keep


def gen_latent_graph(n: int, scale: float = 5.0, sparsify_p: float = 0.0, seed: int = 0,
                     negate_exponent: bool = False, max_retries: int = 50):
    """Latent-variable graph with an MST backbone.

    ``U_i ~ Uniform[0,1]^2`` and edge ``(i, j)`` appears with probability
    ``1 / (1 + exp(-scale * ||U_i - U_j||))``. A unit-weight spanning tree
    of the realized graph is kept and every other edge is removed with
    probability ``sparsify_p``.

    ``negate_exponent=True`` flips the sign of the exponent so that nearby
    nodes connect more often; this is not the default model.
    """
    if n < 2:
        raise ConfigError(f"latent graph needs n >= 2, got {n}")
    if not 0.0 <= sparsify_p <= 1.0:
        raise ConfigError(f"sparsify_p must lie in [0, 1], got {sparsify_p}")
    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(n, k=1)
    sign = 1.0 if negate_exponent else -1.0
    for _ in range(max_retries):
        U = rng.uniform(0.0, 1.0, size=(n, 2))
        dist = np.linalg.norm(U[iu] - U[ju], axis=1)
        prob = 1.0 / (1.0 + np.exp(sign * scale * dist))
        present = rng.uniform(size=prob.size) < prob
        edges = list(zip(iu[present].tolist(), ju[present].tolist()))
        g0 = Graph(n, edges)
        if not is_connected(g0):
            continue
        in_tree = np.zeros(len(g0.edges), dtype=bool)
        in_tree[_unit_weight_mst(n, g0.edges)] = True
        drop = rng.uniform(size=len(g0.edges)) < sparsify_p
        kept = [e for e, t, d in zip(g0.edges, in_tree, drop) if t or not d]
        return Graph(n, kept), LatentEmbedding(U)
    raise GraphError(f"latent graph disconnected after {max_retries} draws")


# --- preferential attachment -------------------------------------------------


def gen_holme_kim(n: int, m: int, p: float, seed: int = 0) -> Graph:
    """Powerlaw-cluster growth: preferential attachment plus triad formation."""
    if not 1 <= m < n:
        raise ConfigError(f"need 1 <= m < n, got m={m}, n={n}")
    if not 0.0 <= p <= 1.0:
        raise ConfigError(f"triad probability must lie in [0, 1], got {p}")
    rng = np.random.default_rng(seed)
    adj: list[set] = [set() for _ in range(n)]
    repeated = list(range(m))

    def add(u, v):
        adj[u].add(v)
        adj[v].add(u)
        repeated.append(v)

    for source in range(m, n):
        targets = set()
        while len(targets) < m:
            targets.add(repeated[rng.integers(len(repeated))])
        targets = sorted(targets)
        rng.shuffle(targets)
        target = targets.pop()
        add(source, target)
        count = 1
        while count < m:
            if rng.uniform() < p:
                cand = sorted(v for v in adj[target] if v != source and v not in adj[source])
                if cand:
                    add(source, cand[rng.integers(len(cand))])
                    count += 1
                    continue
            target = targets.pop()
            add(source, target)
            count += 1
        repeated.extend([source] * m)
    return Graph(n, [(u, v) for u in range(n) for v in adj[u] if u < v])


# --- trees, barbells, attachments ------------------------------------------------


def gen_tree(branching: int, depth: int) -> Graph:
    """Complete ``branching``-ary tree; node 0 is the root, nodes in BFS order."""
    if branching < 2 or depth < 1:
        raise ConfigError(f"need branching >= 2 and depth >= 1, got {branching}, {depth}")
    edges = []
    level = [0]
    nxt_id = 1
    for _ in range(depth):
        new_level = []
        for u in level:
            for _ in range(branching):
                edges.append((u, nxt_id))
                new_level.append(nxt_id)
                nxt_id += 1
        level = new_level
    return Graph(nxt_id, edges)


def gen_regular_tree(d: int, depth: int) -> Graph:
    """Rooted tree in which every non-leaf node has edge degree ``d``.

    The root has ``d`` children and every other internal node ``d - 1``.
    """
    if d < 2 or depth < 1:
        raise ConfigError(f"need d >= 2 and depth >= 1, got {d}, {depth}")
    edges = []
    level = [0]
    nxt_id = 1
    for lvl in range(depth):
        kids = d if lvl == 0 else d - 1
        new_level = []
        for u in level:
            for _ in range(kids):
                edges.append((u, nxt_id))
                new_level.append(nxt_id)
                nxt_id += 1
        level = new_level
    return Graph(nxt_id, edges)


def gen_barbell(m: int, n: int) -> Graph:
    """Two ``K_m`` cliques joined by a chain of ``n - 2m`` nodes."""
    if m < 2 or n < 2 * m:
        raise ConfigError(f"barbell needs m >= 2 and n >= 2m, got m={m}, n={n}")
    edges = [(i, j) for i in range(m) for j in range(i + 1, m)]
    off = n - m
    edges += [(off + i, off + j) for i in range(m) for j in range(i + 1, m)]
    # chain runs from node m-1 (anchor of the first clique) to node n-m
    edges += [(k, k + 1) for k in range(m - 1, n - m)]
    return Graph(n, edges)


def gen_star_chain(d: int, chain_len: int) -> Graph:
    """Node 0 with ``d`` neighbors; neighbor 1 continues into a path.

    The path ``0 - 1 - ... - chain_len`` has inner degrees 2.
    """
    if d < 1 or chain_len < 1:
        raise ConfigError(f"need d >= 1 and chain_len >= 1, got {d}, {chain_len}")
    edges = [(0, k) for k in range(1, d + 1)]
    nxt_id = d + 1
    prev = 1
    for _ in range(chain_len - 1):
        edges.append((prev, nxt_id))
        prev = nxt_id
        nxt_id += 1
    return Graph(nxt_id, edges)


def gen_cycle_attached(r: int, d_i: int) -> Graph:
    """Node 0 shared by a cycle of length ``r`` and a star carrying the rest of its degree."""
    if r < 3 or d_i < 2:
        raise ConfigError(f"need r >= 3 and d_i >= 2, got r={r}, d_i={d_i}")
    star = Graph(d_i - 1, [(0, k) for k in range(1, d_i - 1)])
    return attach(star, 0, ("cycle", r))


_ATTACH_RE = re.compile(r"^\s*(\w+)\s*\(([^)]*)\)\s*$")


def parse_attachment(what) -> tuple:
    """``"cycle(4)"`` -> ``("cycle", 4)``; tuples pass through."""
    if isinstance(what, (tuple, list)):
        return (str(what[0]),) + tuple(int(a) for a in what[1:])
    m = _ATTACH_RE.match(str(what))
    if not m:
        raise ConfigError(f"cannot parse attachment {what!r}")
    args = tuple(int(a) for a in m.group(2).split(",") if a.strip())
    return (m.group(1),) + args


def tree_levels(g: Graph, root: int = 0) -> np.ndarray:
    """Level of every node of a tree, with the root on level 1."""
    if not is_tree(g):
        raise ConfigError("level attachments require a tree")
    return hop_distances(g, root) + 1


def attach(g: Graph, at: int, what) -> Graph:
    """Graft a small topology onto node ``at``.

    ``cycle(r)``: ``r - 1`` new nodes closing a cycle through ``at``.
    ``star(s)``: ``s`` new leaves on ``at``.
    ``clique(s)``: ``s`` new nodes forming a clique together with ``at``.
    ``level_edges(l1, l2)``: on a tree rooted at ``at`` (root on level 1),
    chain the nodes of level ``l1`` to each other in BFS order, and likewise
    for level ``l2``; this closes cycles through their common ancestors.
    ``level_bipartite(l1, l2)``: every pair between levels ``l1`` and ``l2``.
    """
    if not 0 <= at < g.n:
        raise GraphError(f"node {at} out of range for n={g.n}")
    kind, *args = parse_attachment(what)
    edges = list(g.edges)
    n = g.n
    if kind == "cycle":
        (r,) = args
        if r < 3:
            raise ConfigError(f"cycle length must be >= 3, got {r}")
        ring = [at] + list(range(n, n + r - 1))
        edges += [(ring[k], ring[(k + 1) % r]) for k in range(r)]
        n += r - 1
    elif kind == "star":
        (s,) = args
        if s < 2:
            raise ConfigError(f"star size must be >= 2, got {s}")
        edges += [(at, n + k) for k in range(s)]
        n += s
    elif kind == "clique":
        (s,) = args
        if s < 2:
            raise ConfigError(f"clique size must be >= 2, got {s}")
        members = [at] + list(range(n, n + s))
        edges += [(a, b) for x, a in enumerate(members) for b in members[x + 1:]]
        n += s
    elif kind in ("level_edges", "level_bipartite"):
        l1, l2 = args
        levels = tree_levels(g, at)
        groups = []
        for lvl in (l1, l2):
            members = np.flatnonzero(levels == lvl)
            if members.size == 0:
                raise ConfigError(f"tree has no nodes on level {lvl}")
            groups.append(members.tolist())
        if kind == "level_edges":
            for members in groups:
                edges += list(zip(members[:-1], members[1:]))
        else:
            edges += [(a, b) for a in groups[0] for b in groups[1] if a != b]
    else:
        raise ConfigError(f"unknown attachment {kind!r}")
    return Graph(n, edges)


# --- embeddings and signals ------------------------------------------------------


def _sign_normalize(V: np.ndarray) -> np.ndarray:
    V = V.copy()
    for c in range(V.shape[1]):
        nz = np.flatnonzero(np.abs(V[:, c]) > 1e-12)
        if nz.size and V[nz[0], c] < 0:
            V[:, c] = -V[:, c]
    return V


def spectral_embedding(g: Graph, columns: tuple[int, int] = (0, 1)) -> LatentEmbedding:
    """Eigenvectors of ``D - A`` for the requested ascending eigenvalue ranks.

    The default ``(0, 1)`` keeps the two smallest, including the constant
    kernel vector. Each column is flipped so its first nonzero entry is
    positive.
    """
    if g.n < 2:
        raise ConfigError("spectral embedding needs n >= 2")
    if g.n > MAX_SPECTRAL_N:
        raise ConfigError(f"dense eigensolver capped at n={MAX_SPECTRAL_N}, got {g.n}")
    A = g.adjacency.toarray()
    lap = np.diag(A.sum(axis=1)) - A
    _, vecs = np.linalg.eigh(lap)
    return LatentEmbedding(_sign_normalize(vecs[:, list(columns)]))


def make_signal(U, alpha: float) -> np.ndarray:
    """``f_i = 2 cos(U_i . beta)`` with ``beta = (-alpha, alpha)``."""
    U = U.U if isinstance(U, LatentEmbedding) else np.asarray(U, dtype=float)
    b1, b2 = SignalSpec(alpha).beta
    return 2.0 * np.cos(U[:, 0] * b1 + U[:, 1] * b2)


def roughness(f, g: Graph) -> float:
    """Root-mean-square edge difference of ``f``."""
    if not g.edges:
        raise ValueError("roughness is undefined on an edgeless graph")
    e = np.asarray(g.edges)
    f = np.asarray(f, dtype=float)
    d = f[e[:, 0]] - f[e[:, 1]]
    return float(np.sqrt(np.mean(d * d)))


def add_noise(f, sigma: float, rng: np.random.Generator) -> np.ndarray:
    if sigma < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    f = np.asarray(f, dtype=float)
    return f + sigma * rng.standard_normal(f.shape[0])


# --- recipes --------------------------------------------------------------------------

FAMILIES = ("latent", "holme_kim", "tree", "barbell")

_DEFAULTS = {
    "latent": {"n": 100, "scale": 5.0, "sparsify_p": 0.0, "negate_exponent": False},
    "holme_kim": {"n": 100, "m": 2, "p": 0.1},
    "tree": {"branching": 2, "depth": 5},
    "barbell": {"m": 20, "n": 100},
}


@dataclass(frozen=True)
class GraphRecipe:
    """A graph family plus its parameters and seed.

    ``spectral_columns`` picks which Laplacian eigenvectors form the
    embedding for non-latent families.
    """

    family: str
    params: dict = field(default_factory=dict)
    seed: Optional[int] = None
    spectral_columns: tuple = (0, 1)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ConfigError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        unknown = set(self.params) - set(_DEFAULTS[self.family])
        if unknown:
            raise ConfigError(f"unknown parameters for {self.family}: {sorted(unknown)}")

    @property
    def resolved(self) -> dict:
        return {**_DEFAULTS[self.family], **self.params}

    def describe(self) -> str:
        return ";".join(f"{k}={v}" for k, v in sorted(self.resolved.items()))

    def build(self, seed: Optional[int] = None) -> tuple[Graph, LatentEmbedding]:
        if seed is None:
            seed = 0 if self.seed is None else self.seed
        p = self.resolved
        if self.family == "latent":
            return gen_latent_graph(p["n"], p["scale"], p["sparsify_p"], seed,
                                    negate_exponent=p["negate_exponent"])
        if self.family == "holme_kim":
            g = gen_holme_kim(p["n"], p["m"], p["p"], seed)
        elif self.family == "tree":
            g = gen_tree(p["branching"], p["depth"])
        else:
            g = gen_barbell(p["m"], p["n"])
        return g, spectral_embedding(g, tuple(self.spectral_columns))
