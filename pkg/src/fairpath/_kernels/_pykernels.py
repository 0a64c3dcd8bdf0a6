"""Pure numpy implementations of the hot kernels.

These are the import-time fallback when the compiled extension is not built.
Both backends implement the same contract; see ``fairpath._kernels``.
"""

import math

import numpy as np

BACKEND_NAME = "python"

CLAMP = 1.0 - 1e-12


def partial_correlation(corr: np.ndarray, i: int, j: int, cond) -> float:
    """Partial correlation of i, j given ``cond`` from a correlation matrix.

    Uses the precision-matrix formula on the submatrix over {i, j} | cond.
    The result is clamped to [-(1 - 1e-12), 1 - 1e-12]. Raises
    ``np.linalg.LinAlgError`` when the submatrix is singular.
    """
    cond = list(cond)
    if not cond:
        r = corr[i, j]
    else:
        idx = [i, j] + cond
        sub = corr[np.ix_(idx, idx)]
        prec = np.linalg.inv(sub)
        denom = prec[0, 0] * prec[1, 1]
        if denom <= 0:
            raise np.linalg.LinAlgError("non-positive precision diagonal")
        r = -prec[0, 1] / math.sqrt(denom)
    return float(min(CLAMP, max(-CLAMP, r)))


def fisher_z_stat(r: float, n: int, k: int) -> float:
    """sqrt(n - k - 3) * |atanh(r)| for a conditioning set of size k."""
    z = 0.5 * math.log((1.0 + r) / (1.0 - r))
    return math.sqrt(n - k - 3.0) * abs(z)


def normal_sf2(stat: float) -> float:
    """Two-sided tail probability 2 * (1 - Phi(stat)) via erfc."""
    return math.erfc(stat / math.sqrt(2.0))


def gauss_bic_local(cov: np.ndarray, n: int, node: int, parents) -> tuple:
    """Gaussian BIC local score of ``node`` given ``parents``.

    ``cov`` is the MLE covariance (normalized by n) of the data columns;
    centering makes the intercept implicit. Returns ``(score, ridge_used)``
    where score = -n*log(max(rss/n, 1e-12)) - |parents|*log(n), higher is
    better. A singular parent covariance falls back to a 1e-8 ridge.
    """
    parents = list(parents)
    var_y = cov[node, node]
    if not parents:
        resid = var_y
        ridge_used = False
    else:
        s_pp = cov[np.ix_(parents, parents)]
        s_py = cov[parents, node]
        ridge_used = False
        try:
            beta = np.linalg.solve(s_pp, s_py)
        except np.linalg.LinAlgError:
            ridge_used = True
            beta = np.linalg.solve(s_pp + 1e-8 * np.eye(len(parents)), s_py)
        else:
            # solve() can succeed on numerically singular systems; check
            if not np.all(np.isfinite(beta)) or np.linalg.cond(s_pp) > 1e12:
                ridge_used = True
                beta = np.linalg.solve(s_pp + 1e-8 * np.eye(len(parents)), s_py)
        resid = var_y - float(s_py @ beta)
    resid = max(resid, 1e-12)
    score = -n * math.log(resid) - len(parents) * math.log(n)
    return float(score), ridge_used
