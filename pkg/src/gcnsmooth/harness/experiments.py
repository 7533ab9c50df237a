"""Experiment drivers behind the CLI subcommands.

Each driver is deterministic given its config: random streams are derived
from ``(master seed, task index)`` and rows are sorted before writing.
"""

from __future__ import annotations

from pathlib import Path
from typing import Optional

import numpy as np
import scipy.sparse as sp
from scipy.stats import spearmanr

from .. import estimators as est
from .. import operators as ops
from .. import synth, walks
from ..errors import ConfigError
from ..graph import Graph, neighborhood_sizes, reach_matrix
from .config import ExperimentConfig, parse_estimator
from .io import ResultRow, write_edge_list, write_embedding, write_signal

GCN = "linear_gcn"
LOCAL_AVG = "local_avg"


def _row(cfg: ExperimentConfig, experiment: str, metric: str, value, *, family=None, params=None,
         alpha=None, roughness=None, estimator="", kind="", L=None, stderr=None, seed=None) -> ResultRow:
    return ResultRow(
        experiment=experiment,
        family=cfg.recipe.family if family is None else family,
        params=cfg.recipe.describe() if params is None else params,
        alpha=None if alpha is None else float(alpha),
        roughness=None if roughness is None else float(roughness),
        estimator=estimator, kind=kind,
        L=None if L is None else int(L),
        metric=metric, value=float(value),
        stderr=None if stderr is None else float(stderr),
        seed=cfg.seed if seed is None else int(seed),
    )


def _estimator_label(name: str) -> str:
    family, W = parse_estimator(name)
    if family == "local_avg":
        return LOCAL_AVG
    return f"{GCN}[refit]" if W is None else f"{GCN}[W={W:g}]"


def derived_seed(*parts: int) -> int:
    return int(np.random.SeedSequence([int(p) for p in parts]).generate_state(1)[0])


def split_nodes(n: int, rng: np.random.Generator, train: float, validation: float,
                train_size: Optional[int] = None, validation_size: Optional[int] = None):
    """Random disjoint (train, validation) index arrays.

    Absolute sizes are used when both are given and fit in ``n``; otherwise
    the fractions.
    """
    perm = rng.permutation(n)
    if train_size is not None and validation_size is not None and train_size + validation_size <= n:
        n_tr, n_va = train_size, validation_size
    else:
        n_tr = int(round(train * n))
        n_va = max(1, int(round(validation * n)))
        n_va = min(n_va, n - n_tr)
    return np.sort(perm[:n_tr]), np.sort(perm[n_tr:n_tr + n_va])


# --- generate -----------------------------------------------------------------------


def cmd_generate(cfg: ExperimentConfig, out_dir) -> dict:
    """Write ``edges.txt``, ``embedding.csv``, ``signal.csv`` (f*) and ``observed.csv`` (Y)."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    g, U = cfg.recipe.build(cfg.graph_seed)
    f = synth.make_signal(U, cfg.alphas[0])
    Y = synth.add_noise(f, cfg.sigma, np.random.default_rng([cfg.seed, 0xA11]))
    paths = {
        "edges": out / "edges.txt",
        "embedding": out / "embedding.csv",
        "signal": out / "signal.csv",
        "observed": out / "observed.csv",
    }
    write_edge_list(paths["edges"], g)
    write_embedding(paths["embedding"], U.U)
    write_signal(paths["signal"], f)
    write_signal(paths["observed"], Y)
    return paths


# --- risk -------------------------------------------------------------------------------


def cmd_risk(cfg: ExperimentConfig) -> list[ResultRow]:
    """Analytic bias^2 / variance / MSE and the matching upper bounds (unit noise)."""
    g, U = cfg.recipe.build(cfg.graph_seed)
    rows = []
    exp = "risk"
    for alpha in cfg.alphas:
        f = synth.make_signal(U, alpha)
        rough = synth.roughness(f, g) if g.edges else None
        common = dict(alpha=alpha, roughness=rough)
        for kind in cfg.kinds:
            P = ops.build(g, kind)
            delta = est.smoothness_delta(f, g, kind)
            for L in range(1, cfg.L_max + 1):
                for W in cfg.w_grid:
                    lab = f"{GCN}[W={W:g}]"
                    rep = est.analytic_risk(W, P, L, f)
                    for metric in ("bias_sq", "variance", "mse"):
                        rows.append(_row(cfg, exp, metric, getattr(rep, metric), estimator=lab, kind=kind, L=L, **common))
                    rows.append(_row(cfg, exp, "bound", est.theorem1_bound(L, W, delta, f, P),
                                     estimator=lab, kind=kind, L=L, **common))
        delta_S = est.smoothness_delta(f, g, "S")
        for L in range(1, cfg.L_max + 1):
            rep = est.analytic_risk(1.0, est.local_average_operator(g, L), 1, f)
            for metric in ("bias_sq", "variance", "mse"):
                rows.append(_row(cfg, exp, metric, getattr(rep, metric), estimator=LOCAL_AVG, L=L, **common))
            rows.append(_row(cfg, exp, "bound", est.theorem2_bound(L, delta_S, g), estimator=LOCAL_AVG, L=L, **common))
    return rows


# --- sweep over depth -------------------------------------------------------------------


def _validation_curve(Y, f, P: ops.PropagationOperator, L_max: int, train, val, refit: bool, W: Optional[float]):
    """Validation MSE (against ``f``) of ``W P^L Y`` for ``L = 1..L_max``."""
    curve = np.empty(L_max)
    PY = np.asarray(Y, dtype=float)
    for L in range(1, L_max + 1):
        PY = P.matrix @ PY
        if refit:
            fit_idx = train if train.size else np.arange(Y.shape[0])
            denom = float(PY[fit_idx] @ PY[fit_idx])
            w = float(Y[fit_idx] @ PY[fit_idx]) / denom if denom >= est.DEGENERATE_TOL else 0.0
        else:
            w = W
        curve[L - 1] = est.masked_mse(w * PY, f, val)
    return curve


def optimal_depth(curve) -> int:
    """1-based argmin; ties go to the smallest depth."""
    curve = np.asarray(curve)
    return int(np.flatnonzero(curve == curve.min())[0]) + 1


def cmd_sweep_L(cfg: ExperimentConfig) -> list[ResultRow]:
    """Optimal depth per roughness level.

    For each replicate a graph (seeded per replicate), a noise draw and a
    train/validation split are sampled; each alpha reuses them. The GCN
    weight is refit on the training nodes; the validation MSE is measured
    against the true signal on the validation nodes.
    """
    A = len(cfg.alphas)
    R = cfg.replicates
    specs = []
    for name in cfg.estimators:
        family, W = parse_estimator(name)
        for kind in (cfg.kinds if family == "gcn" else [""]):
            specs.append((name, family, W, kind))
    opt = {s: np.zeros((A, R)) for s in specs}
    curves = {s: np.zeros((A, R, cfg.L_max)) for s in specs}
    rough = np.zeros((A, R))
    for r in range(R):
        g, U = cfg.recipe.build(derived_seed(cfg.graph_seed, r))
        Pk = {k: ops.build(g, k) for k in cfg.kinds}
        LA = [est.local_average_operator(g, L) for L in range(1, cfg.L_max + 1)]
        rng = np.random.default_rng([cfg.seed, r])
        train, val = split_nodes(g.n, rng, cfg.train, cfg.validation)
        eps = rng.standard_normal(g.n)
        for a, alpha in enumerate(cfg.alphas):
            f = synth.make_signal(U, alpha)
            Y = f + cfg.sigma * eps
            rough[a, r] = synth.roughness(f, g)
            for s in specs:
                name, family, W, kind = s
                if family == "local_avg":
                    c = np.array([est.masked_mse(M.matrix @ Y, f, val) for M in LA])
                else:
                    c = _validation_curve(Y, f, Pk[kind], cfg.L_max, train, val, W is None, W)
                curves[s][a, r] = c
                opt[s][a, r] = optimal_depth(c)
    rows = []
    exp = "sweep-l"
    mean_rough = rough.mean(axis=1)
    for s in specs:
        name, _, _, kind = s
        lab = _estimator_label(name)
        for a, alpha in enumerate(cfg.alphas):
            o = opt[s][a]
            se = o.std(ddof=1) / np.sqrt(R) if R > 1 else 0.0
            rows.append(_row(cfg, exp, "optimal_L", o.mean(), alpha=alpha, roughness=mean_rough[a],
                             estimator=lab, kind=kind, stderr=se))
            for L in range(1, cfg.L_max + 1):
                c = curves[s][a, :, L - 1]
                se = c.std(ddof=1) / np.sqrt(R) if R > 1 else 0.0
                rows.append(_row(cfg, exp, "val_mse", c.mean(), alpha=alpha, roughness=mean_rough[a],
                                 estimator=lab, kind=kind, L=L, stderr=se))
        mean_opt = opt[s].mean(axis=1)
        if A >= 3 and np.ptp(mean_rough) > 0 and np.ptp(mean_opt) > 0:
            rho = spearmanr(mean_rough, mean_opt)[0]
            if np.isfinite(rho):
                rows.append(_row(cfg, exp, "spearman_roughness_optimal_L", rho, estimator=lab, kind=kind))
    return rows


# --- bias / variance ------------------------------------------------------------------------


def cmd_bias_variance(cfg: ExperimentConfig) -> list[ResultRow]:
    """Monte-Carlo bias^2 / variance / MSE per estimator and depth, plus analytic values for fixed smoothers."""
    if cfg.replicates < 2:
        raise ConfigError("bias-variance needs at least 2 replicates")
    g, U = cfg.recipe.build(cfg.graph_seed)
    rows = []
    exp = "bias-variance"
    for a, alpha in enumerate(cfg.alphas):
        f = synth.make_signal(U, alpha)
        rough = synth.roughness(f, g)
        common = dict(alpha=alpha, roughness=rough)
        for L in range(1, cfg.L_max + 1):
            for e_idx, name in enumerate(cfg.estimators):
                family, W = parse_estimator(name)
                lab = _estimator_label(name)
                kinds = cfg.kinds if family == "gcn" else [""]
                for kind in kinds:
                    if family == "gcn":
                        P = ops.build(g, kind)
                        sm = est.GcnSmoother(P, L, W)
                        analytic = None if W is None else est.analytic_risk(W, P, L, f, cfg.sigma)
                    else:
                        sm = est.LocalAverageSmoother(g, L)
                        analytic = est.analytic_risk(1.0, est.local_average_operator(g, L), 1, f, cfg.sigma)
                    mc_seed = derived_seed(cfg.seed, a, L, e_idx, "ST".find(kind) + 1)
                    rep = est.monte_carlo_risk(sm, f, cfg.sigma, cfg.replicates, mc_seed)
                    rows.append(_row(cfg, exp, "bias_sq", rep.bias_sq, estimator=lab, kind=kind, L=L, **common))
                    rows.append(_row(cfg, exp, "variance", rep.variance, estimator=lab, kind=kind, L=L,
                                     stderr=rep.variance_stderr, **common))
                    rows.append(_row(cfg, exp, "mse", rep.mse, estimator=lab, kind=kind, L=L,
                                     stderr=rep.mc_stderr, **common))
                    if rep.skipped:
                        rows.append(_row(cfg, exp, "skipped_replicates", rep.skipped, estimator=lab, kind=kind, L=L, **common))
                    if analytic is not None:
                        for metric in ("bias_sq", "variance", "mse"):
                            rows.append(_row(cfg, exp, f"analytic_{metric}", getattr(analytic, metric),
                                             estimator=lab, kind=kind, L=L, **common))
    return rows


# --- variance decay at a root --------------------------------------------------------------------


def decay_variants(cfg: ExperimentConfig) -> list[tuple[str, Graph]]:
    if cfg.recipe.family != "tree":
        raise ConfigError("variance-decay needs a tree recipe")
    g, _ = cfg.recipe.build(cfg.graph_seed)
    out = [("plain", g)]
    for what in cfg.attachments:
        out.append((str(what), synth.attach(g, 0, what)))
    return out


def cmd_variance_decay(cfg: ExperimentConfig) -> list[ResultRow]:
    """Root-node variance ``E[(P^L eps)_0^2]`` versus depth for each variant of the tree."""
    rows = []
    exp = "variance-decay"
    base = cfg.recipe.describe()
    for label, g in decay_variants(cfg):
        params = f"{base};attach={label}"
        for kind in cfg.kinds:
            P = ops.build(g, kind)
            for L in range(1, cfg.L_max + 1):
                rows.append(_row(cfg, exp, "root_variance", ops.node_variance(P, L, 0), params=params,
                                 estimator=GCN, kind=kind, L=L))
        for L in range(1, cfg.L_max + 1):
            size = np.diff(reach_matrix(g, L).indptr[:2])[0]
            rows.append(_row(cfg, exp, "root_variance", 1.0 / size, params=params, estimator=LOCAL_AVG, L=L))
    return rows


# --- real-data protocols -------------------------------------------------------------------------


def hollow_local_average(g: Graph, L: int) -> ops.PropagationOperator:
    """Uniform mean over ``N^L(i)`` without ``i`` itself."""
    R = reach_matrix(g, L).tolil()
    R.setdiag(0)
    R = R.tocsr()
    R.eliminate_zeros()
    sizes = np.diff(R.indptr).astype(float)
    inv = np.divide(1.0, sizes, out=np.zeros_like(sizes), where=sizes > 0)
    return ops.from_matrix(sp.diags(inv) @ R, kind="local_avg_hollow")


def _split_summary(cfg, exp, values: dict, skipped: dict, family: str, params: str) -> list[ResultRow]:
    rows = []
    for (lab, kind, L), errs in values.items():
        errs = np.asarray(errs)
        if errs.size == 0:
            continue
        q25, q75 = np.percentile(errs, [25, 75])
        se = errs.std(ddof=1) / np.sqrt(errs.size) if errs.size > 1 else 0.0
        kw = dict(family=family, params=params, estimator=lab, kind=kind, L=L)
        rows.append(_row(cfg, exp, "val_mse_mean", errs.mean(), stderr=se, **kw))
        rows.append(_row(cfg, exp, "val_mse_q25", q25, **kw))
        rows.append(_row(cfg, exp, "val_mse_q75", q75, **kw))
        rows.append(_row(cfg, exp, "skipped_nodes", skipped[(lab, kind, L)], **kw))
    return rows


def cmd_predict(g: Graph, Y, cfg: ExperimentConfig, source: str = "file") -> list[ResultRow]:
    """Predict validation nodes from their neighbors with hollow operators.

    ``Y_hat = H^L Y`` where ``H`` has a zero diagonal and renormalized rows;
    the diagonal stays zero at every application, so the target only
    re-enters through walks that leave and come back. Nodes with an empty
    row are skipped.
    """
    Y = np.asarray(Y, dtype=float)
    ops_by = {("S", "S_hollow"): ops.build(g, "S_hollow"), ("T", "T_hollow"): ops.build(g, "T_hollow")}
    values, skipped = {}, {}
    hollow_avg = [hollow_local_average(g, L) for L in range(1, cfg.L_max + 1)]
    for s in range(cfg.splits):
        rng = np.random.default_rng([cfg.seed, s])
        train, val = split_nodes(g.n, rng, cfg.train, cfg.validation, cfg.train_size, cfg.validation_size)
        for (kind, _), H in ops_by.items():
            if kind not in cfg.kinds:
                continue
            has_row = np.diff(H.matrix.indptr) > 0
            PY = Y.copy()
            for L in range(1, cfg.L_max + 1):
                PY = H.matrix @ PY
                ok = val[has_row[val]]
                key = (f"{GCN}_hollow", kind, L)
                values.setdefault(key, [])
                skipped[key] = skipped.get(key, 0) + int(val.size - ok.size)
                if ok.size:
                    values[key].append(est.masked_mse(PY, Y, ok))
        for L, H in enumerate(hollow_avg, start=1):
            has_row = np.diff(H.matrix.indptr) > 0
            ok = val[has_row[val]]
            key = (f"{LOCAL_AVG}_hollow", "", L)
            values.setdefault(key, [])
            skipped[key] = skipped.get(key, 0) + int(val.size - ok.size)
            if ok.size:
                values[key].append(est.masked_mse(H.matrix @ Y, Y, ok))
    return _split_summary(cfg, "predict", values, skipped, source, f"n={g.n};edges={g.num_edges}")


def replace_with_neighbor(g: Graph, Y, nodes, rng: np.random.Generator):
    """Copy of ``Y`` where each of ``nodes`` takes the original value of a random direct neighbor.

    Returns ``(Y_new, replaced_nodes)``; isolated nodes are left out.
    """
    Y = np.asarray(Y, dtype=float)
    out = Y.copy()
    done = []
    for i in nodes:
        nb = g.neighbors(int(i))
        if nb.size == 0:
            continue
        out[i] = Y[nb[rng.integers(nb.size)]]
        done.append(int(i))
    return out, np.array(done, dtype=np.int64)


def cmd_denoise(g: Graph, Y, cfg: ExperimentConfig, source: str = "file") -> list[ResultRow]:
    """Denoise test nodes after swapping their values for a neighbor's.

    Smoothing uses the self-loop operators ``S``/``T`` and local averaging;
    the error is measured against the original observations at the test nodes.
    """
    Y = np.asarray(Y, dtype=float)
    P = {k: ops.build(g, k) for k in cfg.kinds}
    LA = [est.local_average_operator(g, L) for L in range(1, cfg.L_max + 1)]
    values, skipped = {}, {}
    for s in range(cfg.splits):
        rng = np.random.default_rng([cfg.seed, s])
        _, test = split_nodes(g.n, rng, cfg.train, cfg.validation, cfg.train_size, cfg.validation_size)
        Yr, done = replace_with_neighbor(g, Y, test, rng)
        n_skip = int(test.size - done.size)
        for kind, op in P.items():
            PY = Yr.copy()
            for L in range(1, cfg.L_max + 1):
                PY = op.matrix @ PY
                key = (GCN, kind, L)
                values.setdefault(key, [])
                skipped[key] = skipped.get(key, 0) + n_skip
                if done.size:
                    values[key].append(est.masked_mse(PY, Y, done))
        for L, M in enumerate(LA, start=1):
            key = (LOCAL_AVG, "", L)
            values.setdefault(key, [])
            skipped[key] = skipped.get(key, 0) + n_skip
            if done.size:
                values[key].append(est.masked_mse(M.matrix @ Yr, Y, done))
    return _split_summary(cfg, "denoise", values, skipped, source, f"n={g.n};edges={g.num_edges}")


# --- bound verification ------------------------------------------------------------------------------

PROPOSITION_GRID = {
    "P1": [{"d": d, "depth": depth, "L": L} for d, depth in ((2, 6), (3, 6), (4, 5), (5, 5), (6, 4))
           for L in range(1, depth)],
    "P2": [{"d": d, "L": L} for d in (5, 10, 20) for L in range(1, 7)],
    "P3": [{"r": r, "d_i": d_i, "L": L} for r in range(3, 9) for d_i in (2, 4, 6) for L in range(1, 9)],
}


def proposition_reports() -> list[walks.BoundReport]:
    out = []
    for base, grid in PROPOSITION_GRID.items():
        for which in (base, base + "T"):
            for params in grid:
                out.append((which, params, walks.check_proposition(which, params)))
    return out


def cmd_verify_bounds(cfg: ExperimentConfig) -> list[ResultRow]:
    """Lower bound on the recipe graph at every node, then all proposition checks."""
    rows = []
    exp = "verify-bounds"
    g, _ = cfg.recipe.build(cfg.graph_seed)
    S = ops.build(g, "S")
    for L in range(1, cfg.L_max + 1):
        observed = ops.variance_profile(S, L).per_node
        bound = 1.0 / neighborhood_sizes(g, L)
        slack = observed - bound
        kw = dict(estimator="lower_bound", kind="S", L=L)
        rows.append(_row(cfg, exp, "min_slack", slack.min(), **kw))
        rows.append(_row(cfg, exp, "satisfied", float(np.all(slack >= -walks.BOUND_TOL)), **kw))
        if L == 1:
            rows.append(_row(cfg, exp, "max_abs_equality_gap", np.abs(slack).max(), **kw))
    for which, params, rep in proposition_reports():
        kind = "T" if which.endswith("T") else "S"
        kw = dict(family="proposition", params=rep.topology, estimator=which, kind=kind, L=params["L"])
        rows.append(_row(cfg, exp, "observed", rep.observed, **kw))
        rows.append(_row(cfg, exp, f"{rep.side}_bound", rep.bound, **kw))
        rows.append(_row(cfg, exp, "satisfied", float(rep.satisfied), **kw))
    return rows
