"""Small graphs and dense-matrix oracles shared by the tests."""

import numpy as np
from gcnsmooth import synth
from gcnsmooth.graph import Graph


def path(n):
    return Graph(n, [(i, i + 1) for i in range(n - 1)])


def cycle(n):
    return Graph(n, [(i, (i + 1) % n) for i in range(n)])


def star(leaves):
    return Graph(leaves + 1, [(0, k) for k in range(1, leaves + 1)])


def complete(n):
    return Graph(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def random_connected(n, rng, extra=0.3):
    """Random spanning tree plus random extra edges."""
    edges = [(int(rng.integers(k)), k) for k in range(1, n)]
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < extra:
                edges.append((i, j))
    return Graph(n, edges)


def small_corpus():
    """Named graphs with n <= 10 used by the oracle checks."""
    rng = np.random.default_rng(7)
    out = {
        "edge": path(2),
        "path3": path(3),
        "path6": path(6),
        "cycle5": cycle(5),
        "star4": star(4),
        "K4": complete(4),
        "tree_2_2": synth.gen_tree(2, 2),
        "barbell_3_8": synth.gen_barbell(3, 8),
        "star_chain_5": synth.gen_star_chain(5, 3),
        "cycle_attached_4_3": synth.gen_cycle_attached(4, 3),
        "holme_kim_10": synth.gen_holme_kim(10, 2, 0.3, seed=1),
        "with_isolated": Graph(4, [(0, 1), (1, 2)]),
    }
    for k in range(6):
        out[f"random_{k}"] = random_connected(int(rng.integers(4, 11)), rng)
    assert all(g.n <= 10 for g in out.values())
    return out


def dense_S(g):
    A = g.adjacency.toarray() + np.eye(g.n)
    return A / A.sum(axis=1, keepdims=True)


def dense_T(g):
    A = g.adjacency.toarray() + np.eye(g.n)
    d = A.sum(axis=1)
    return A / np.sqrt(np.outer(d, d))


def dense(g, kind):
    return dense_S(g) if kind == "S" else dense_T(g)


CORPUS = small_corpus()

