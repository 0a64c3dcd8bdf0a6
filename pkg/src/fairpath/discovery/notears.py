"""Linear NOTEARS: least squares + l1 under the smooth acyclicity constraint.

Augmented-Lagrangian outer loop on h(W) = tr(exp(W o W)) - d with an
L-BFGS-B inner solve over split positive/negative parts, which keeps the
l1 term smooth in the expanded variables. Diagonal entries are pinned to
zero throughout.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.optimize

from ..graphs import ARROW, TAIL, Dag
from ..stats import Dataset


@dataclass(frozen=True)
class NotearsResult:
    weights: np.ndarray
    graph: Dag
    converged: bool
    h_value: float
    removed_cycle_edges: tuple  # ((parent, child, weight), ...)


def h_and_grad(W: np.ndarray):
    """Acyclicity penalty tr(exp(W o W)) - d and its gradient exp(WoW)^T o 2W."""
    d = W.shape[0]
    E = scipy.linalg.expm(W * W)
    h = float(np.trace(E)) - d
    return h, E.T * (2.0 * W)


def _loss_and_grad(W: np.ndarray, X: np.ndarray):
    n = X.shape[0]
    R = X - X @ W
    loss = 0.5 / n * float((R**2).sum())
    return loss, -X.T @ R / n


def notears_linear(data: Dataset, cfg) -> NotearsResult:
    """Fit the weighted adjacency matrix and threshold it into a DAG.

    Entries with |weight| <= threshold are zeroed. If the thresholded graph
    is still cyclic (possible at threshold 0), smallest-|weight| edges lying
    on cycles are removed until acyclic and reported in the result.
    """
    from . import prepare

    data = prepare(data, cfg)
    ncfg = cfg.notears
    X = data.values - data.values.mean(axis=0, keepdims=True)
    n, d = X.shape

    def objective(w):
        W = (w[: d * d] - w[d * d :]).reshape(d, d)
        loss, g_loss = _loss_and_grad(W, X)
        h, g_h = h_and_grad(W)
        obj = loss + 0.5 * rho * h * h + alpha * h + ncfg.lambda_l1 * w.sum()
        g_smooth = g_loss + (rho * h + alpha) * g_h
        grad = np.concatenate(
            [g_smooth.ravel() + ncfg.lambda_l1, -g_smooth.ravel() + ncfg.lambda_l1]
        )
        return obj, grad

    bounds = [
        (0.0, 0.0) if i == j else (0.0, None)
        for _ in range(2)
        for i in range(d)
        for j in range(d)
    ]
    w_est = np.zeros(2 * d * d)
    rho, alpha, h = 1.0, 0.0, np.inf
    for _ in range(ncfg.max_dual_iters):
        w_new, h_new = None, None
        while rho < ncfg.rho_max:
            sol = scipy.optimize.minimize(
                objective, w_est, method="L-BFGS-B", jac=True, bounds=bounds
            )
            w_new = sol.x
            h_new, _ = h_and_grad((w_new[: d * d] - w_new[d * d :]).reshape(d, d))
            if h_new > 0.25 * h:
                rho *= 10.0
            else:
                break
        w_est, h = w_new, h_new
        alpha += rho * h
        if h <= ncfg.tol or rho >= ncfg.rho_max:
            break
    converged = bool(h <= ncfg.tol)

    W = (w_est[: d * d] - w_est[d * d :]).reshape(d, d)
    W[np.abs(W) <= ncfg.threshold] = 0.0
    W, removed = _break_cycles(W)

    graph = Dag(data.names)
    for i, j in zip(*np.nonzero(W)):
        graph.add_edge(int(i), int(j), TAIL, ARROW)
    graph.validate()
    return NotearsResult(
        weights=W,
        graph=graph,
        converged=converged,
        h_value=float(h),
        removed_cycle_edges=tuple(removed),
    )


def _break_cycles(W: np.ndarray):
    """Drop the smallest-|weight| edge on a cycle until the graph is acyclic."""
    W = W.copy()
    removed = []
    while True:
        cycle = _find_cycle(W != 0)
        if cycle is None:
            return W, removed
        i, j = min(cycle, key=lambda e: abs(W[e[0], e[1]]))
        removed.append((int(i), int(j), float(W[i, j])))
        W[i, j] = 0.0


def _find_cycle(adj: np.ndarray):
    """Edges of one directed cycle in a boolean adjacency matrix, or None."""
    d = adj.shape[0]
    color = [0] * d
    parent_edge = {}

    def dfs(v):
        color[v] = 1
        for u in range(d):
            if not adj[v, u]:
                continue
            if color[u] == 1:
                cycle = [(v, u)]
                w = v
                while w != u:
                    pv, w = parent_edge[w], parent_edge[w][0]
                    cycle.append(pv)
                return cycle
            if color[u] == 0:
                parent_edge[u] = (v, u)
                found = dfs(u)
                if found:
                    return found
        color[v] = 2
        return None

    for root in range(d):
        if color[root] == 0:
            found = dfs(root)
            if found:
                return found
    return None
