"""Statistical primitives: correlation, Fisher-Z test, BIC, OLS, logistic.

All functions operate on a :class:`Dataset`; the partial-correlation and
BIC inner kernels are dispatched through ``fairpath._kernels`` so the
compiled backend is used when available.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import _kernels
from .errors import DataError

CONTINUOUS = "continuous"
BINARY = "binary"

CORR_CLAMP = 1.0 - 1e-12


class RidgeFallbackWarning(UserWarning):
    """A singular design triggered the 1e-8 ridge fallback in BIC scoring."""


@dataclass(frozen=True)
class Dataset:
    """Column-typed numeric table.

    ``values`` is an (n, d) float64 matrix, ``names`` the column labels and
    ``kinds`` per-column flags in {"continuous", "binary"}. Binary columns
    must contain only 0 and 1; no NaN anywhere (the loader drops incomplete
    rows before construction).
    """

    values: np.ndarray
    names: tuple
    kinds: tuple

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "kinds", tuple(self.kinds))
        if values.ndim != 2:
            raise DataError("values must be a 2-d matrix")
        n, d = values.shape
        if len(self.names) != d or len(self.kinds) != d:
            raise DataError("names/kinds length does not match column count")
        if len(set(self.names)) != d:
            raise DataError("duplicate column names")
        bad = [k for k in self.kinds if k not in (CONTINUOUS, BINARY)]
        if bad:
            raise DataError(f"unknown column kind {bad[0]!r}")
        if n == 0:
            raise DataError("dataset has no rows")
        if not np.all(np.isfinite(values)):
            raise DataError("dataset contains NaN or infinite values")
        for j, kind in enumerate(self.kinds):
            if kind == BINARY:
                col = values[:, j]
                if not np.all((col == 0.0) | (col == 1.0)):
                    raise DataError(
                        f"binary column {self.names[j]!r} has values outside {{0, 1}}"
                    )

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]

    def column(self, name_or_index):
        return self.values[:, self.index(name_or_index)]

    def index(self, name_or_index) -> int:
        if isinstance(name_or_index, (int, np.integer)):
            j = int(name_or_index)
            if not 0 <= j < self.d:
                raise IndexError(f"column index {j} out of range")
            return j
        from .graphs import normalize_name

        want = normalize_name(name_or_index)
        for j, nm in enumerate(self.names):
            if normalize_name(nm) == want:
                return j
        raise KeyError(f"no column named {name_or_index!r}")

    def standardized(self) -> "Dataset":
        """Continuous columns scaled to zero mean, unit variance."""
        values = self.values.copy()
        for j, kind in enumerate(self.kinds):
            if kind == CONTINUOUS:
                col = values[:, j]
                sd = col.std()
                if sd == 0:
                    raise DataError(f"column {self.names[j]!r} has zero variance")
                values[:, j] = (col - col.mean()) / sd
        return Dataset(values, self.names, self.kinds)


@dataclass(frozen=True)
class TestResult:
    statistic: float
    p_value: float
    independent: bool


def correlation_matrix(data: Dataset) -> np.ndarray:
    """Pearson correlation matrix; unit diagonal, symmetric."""
    values = data.values
    sds = values.std(axis=0)
    for j, sd in enumerate(sds):
        if sd == 0:
            raise DataError(f"column {data.names[j]!r} has zero variance")
    corr = np.corrcoef(values, rowvar=False)
    corr = np.asarray(corr, dtype=np.float64)
    corr = (corr + corr.T) / 2.0
    np.fill_diagonal(corr, 1.0)
    return np.ascontiguousarray(corr)


def partial_correlation(corr: np.ndarray, i: int, j: int, cond) -> float:
    """Partial correlation of columns i, j given the set ``cond``.

    Computed from the precision matrix of the submatrix over {i, j} | cond
    and clamped to +-(1 - 1e-12) so duplicated columns cannot produce an
    infinite Fisher z.
    """
    cond = sorted(cond)
    if i == j or i in cond or j in cond:
        raise DataError("i, j must be distinct and outside the conditioning set")
    try:
        return _kernels.partial_correlation(
            np.ascontiguousarray(corr, dtype=np.float64), i, j, cond
        )
    except np.linalg.LinAlgError:
        raise DataError("conditioning set collinear") from None


def fisher_z_test(data: Dataset, i: int, j: int, cond, alpha: float,
                  corr: np.ndarray = None) -> TestResult:
    """Fisher-Z conditional independence test of i against j given ``cond``.

    statistic = sqrt(n - |cond| - 3) * |atanh(r)|, p two-sided normal.
    A precomputed correlation matrix can be passed to amortize repeated
    calls over the same data.
    """
    cond = sorted(cond)
    n = data.n
    if n - len(cond) - 3 < 1:
        raise DataError(
            f"need n - |S| - 3 >= 1 for Fisher-Z (n={n}, |S|={len(cond)})"
        )
    if corr is None:
        corr = correlation_matrix(data)
    r = partial_correlation(corr, i, j, cond)
    if abs(r) >= CORR_CLAMP:
        statistic = math.inf
        p = 0.0
    else:
        statistic = _kernels.fisher_z_stat(r, n, len(cond))
        p = _kernels.normal_sf2(statistic)
    return TestResult(statistic=float(statistic), p_value=float(p),
                      independent=bool(p > alpha))


def bic_local_score(data: Dataset, node: int, parents) -> float:
    """Gaussian BIC local score of ``node`` given ``parents``; higher is better.

    score = -n log(RSS/n) - |parents| log(n) with RSS from the OLS of the
    node on its parents plus an intercept (RSS/n floored at 1e-12). The
    total graph score is the sum of local scores, so the score decomposes
    per node. A singular design falls back to a 1e-8 ridge and emits a
    RidgeFallbackWarning.
    """
    parents = sorted(parents)
    if node in parents:
        raise DataError("node cannot be its own parent")
    cov = _mle_covariance(data.values)
    score, ridge_used = _kernels.gauss_bic_local(cov, data.n, node, parents)
    if ridge_used:
        warnings.warn(
            f"singular design for node {data.names[node]!r}; ridge fallback",
            RidgeFallbackWarning,
            stacklevel=2,
        )
    return float(score)


def _mle_covariance(values: np.ndarray) -> np.ndarray:
    centered = values - values.mean(axis=0)
    return np.ascontiguousarray(centered.T @ centered / values.shape[0])


@dataclass(frozen=True)
class OlsFit:
    coefficients: np.ndarray
    intercept: float
    residual_variance: float
    predictors: tuple

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        return X @ self.coefficients + self.intercept


def ols_fit(data: Dataset, target, predictors) -> OlsFit:
    """Least squares of ``target`` on ``predictors`` plus an intercept.

    Solved by QR, not by the normal equations. Raises on rank-deficient
    designs, naming the dependent columns.
    """
    y_idx = data.index(target)
    p_idx = [data.index(p) for p in predictors]
    y = data.values[:, y_idx]
    X = data.values[:, p_idx]
    n, p = X.shape
    if n <= p + 1:
        raise DataError(f"need n > |predictors| + 1 (n={n}, p={p})")
    coef, intercept, rss, rank = _ols_arrays(X, y)
    if rank < p + 1:
        dep = _dependent_columns(X, [data.names[k] for k in p_idx])
        raise DataError(f"rank-deficient design; dependent columns: {dep}")
    return OlsFit(
        coefficients=coef,
        intercept=float(intercept),
        residual_variance=float(rss / (n - p - 1)),
        predictors=tuple(data.names[k] for k in p_idx),
    )


def _ols_arrays(X: np.ndarray, y: np.ndarray):
    """QR-based least squares with intercept; returns (coef, b0, rss, rank)."""
    n, p = X.shape
    design = np.column_stack([np.ones(n), X])
    q, r = np.linalg.qr(design)
    diag = np.abs(np.diag(r))
    tol = max(n, p + 1) * np.finfo(float).eps * (diag.max() if diag.size else 1.0)
    rank = int((diag > tol).sum())
    if rank == p + 1:
        beta = scipy.linalg.solve_triangular(r, q.T @ y)
    else:
        beta, *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - design @ beta
    return beta[1:], beta[0], float(resid @ resid), rank


def _dependent_columns(X: np.ndarray, names):
    n = X.shape[0]
    design = np.column_stack([np.ones(n), X])
    _, _, pivots = scipy.linalg.qr(design, pivoting=True)
    rank = np.linalg.matrix_rank(design)
    dep = sorted(pivots[rank:])
    return [("<intercept>" if k == 0 else names[k - 1]) for k in dep]


@dataclass(frozen=True)
class LogisticFit:
    coefficients: np.ndarray
    intercept: float
    converged: bool
    note: str
    predictors: tuple

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        eta = X @ self.coefficients + self.intercept
        return _sigmoid(eta)


def _sigmoid(eta: np.ndarray) -> np.ndarray:
    out = np.empty_like(eta, dtype=np.float64)
    pos = eta >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-eta[pos]))
    ez = np.exp(eta[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def logistic_fit(data: Dataset, target, predictors,
                 tol: float = 1e-8, max_iter: int = 100) -> LogisticFit:
    """Logistic regression by iteratively reweighted least squares.

    Converged when the largest coefficient change drops below ``tol``.
    A coefficient escaping past |30| is treated as perfect separation:
    the fit stops with converged=False and a note.
    """
    y_idx = data.index(target)
    if data.kinds[y_idx] != BINARY:
        raise DataError(f"target {data.names[y_idx]!r} must be binary")
    y = data.values[:, y_idx]
    if y.min() == y.max():
        raise DataError("single-class target")
    p_idx = [data.index(p) for p in predictors]
    X = data.values[:, p_idx]
    n, p = X.shape

    if p == 0:
        rate = float(y.mean())
        return LogisticFit(
            coefficients=np.zeros(0),
            intercept=math.log(rate / (1.0 - rate)),
            converged=True,
            note="",
            predictors=(),
        )

    beta, converged, note = _irls_arrays(X, y, tol=tol, max_iter=max_iter)
    return LogisticFit(
        coefficients=beta[1:],
        intercept=float(beta[0]),
        converged=converged,
        note=note,
        predictors=tuple(data.names[k] for k in p_idx),
    )


def _irls_arrays(X: np.ndarray, y: np.ndarray, tol: float = 1e-8,
                 max_iter: int = 100):
    """IRLS on raw arrays; returns (beta with intercept first, converged, note)."""
    n = X.shape[0]
    design = np.column_stack([np.ones(n), X])
    beta = np.zeros(design.shape[1])
    converged = False
    note = ""
    for _ in range(max_iter):
        eta = design @ beta
        mu = _sigmoid(eta)
        w = np.maximum(mu * (1.0 - mu), 1e-10)
        z = eta + (y - mu) / w
        wd = design * w[:, None]
        try:
            beta_new = np.linalg.solve(design.T @ wd, wd.T @ z)
        except np.linalg.LinAlgError:
            raise DataError("singular weighted design in IRLS") from None
        step = float(np.max(np.abs(beta_new - beta)))
        beta = beta_new
        if np.max(np.abs(beta)) > 30.0:
            note = "separation suspected: coefficient escaped past |30|"
            break
        if step < tol:
            converged = True
            break
    return beta, converged, note


def log_likelihood_logistic(y: np.ndarray, proba: np.ndarray) -> float:
    proba = np.clip(proba, 1e-12, 1.0 - 1e-12)
    return float(np.sum(y * np.log(proba) + (1.0 - y) * np.log(1.0 - proba)))
