"""Fairness-utility trade-off per path (direct, indirect, spurious).

Blocking is realized by input omission: the DE-blocked predictor drops the
protected attribute, IE-blocked drops the mediators, SE-blocked drops the
confounders. For each path the fairness gain is the drop in the magnitude
of that path's component when the decomposition is rerun on the blocked
predictor's outputs instead of the full predictor's outputs; the utility
cost is the training-loss increase (MSE for continuous outcomes, log-loss
for binary ones).
"""

import math
from dataclasses import dataclass

import numpy as np

from .decompose import (
    AUTO,
    LINEAR,
    LOGISTIC,
    DecompConfig,
    _check_protected,
    _point_estimates,
)
from .errors import DataError
from .rng import substream
from .sfm import SfmAssignment
from .stats import BINARY, Dataset, _irls_arrays, _ols_arrays, _sigmoid

EPSILON = 1e-9

PATHS = ("DE", "IE", "SE")
_COMPONENT_OF = {"DE": "de", "IE": "ie", "SE": "se"}


@dataclass(frozen=True)
class Predictor:
    """A fitted predictor over a column subset of (X, Z, W)."""

    columns: tuple  # dataset column indices fed to the model
    beta: np.ndarray  # intercept first
    kind: str  # linear | logistic

    def predict(self, values: np.ndarray) -> np.ndarray:
        if self.columns:
            eta = values[:, list(self.columns)] @ self.beta[1:] + self.beta[0]
        else:
            eta = np.full(values.shape[0], self.beta[0])
        return _sigmoid(eta) if self.kind == LOGISTIC else eta


@dataclass(frozen=True)
class PathTradeoff:
    fairness_gain: float
    utility_cost: float
    ratio: float
    unstable: bool
    ratio_boot_mean: float
    ratio_boot_sd: float

    def as_dict(self) -> dict:
        return {
            "fairness_gain": self.fairness_gain,
            "utility_cost": self.utility_cost,
            "ratio": self.ratio,
            "unstable": self.unstable,
            "ratio_boot_mean": self.ratio_boot_mean,
            "ratio_boot_sd": self.ratio_boot_sd,
        }


@dataclass(frozen=True)
class CfurResult:
    de: PathTradeoff
    ie: PathTradeoff
    se: PathTradeoff

    def path(self, name: str) -> PathTradeoff:
        return getattr(self, name.lower())

    def as_dict(self) -> dict:
        return {"DE": self.de.as_dict(), "IE": self.ie.as_dict(),
                "SE": self.se.as_dict()}


def _outcome_kind(data: Dataset, sfm: SfmAssignment, cfg: DecompConfig) -> str:
    if cfg.outcome_model != AUTO:
        return cfg.outcome_model
    return LOGISTIC if data.kinds[sfm.y] == BINARY else LINEAR


def _fit_predictor(values, y_col, columns, kind) -> Predictor:
    columns = tuple(columns)
    if not columns:
        if kind == LOGISTIC:
            rate = min(max(float(y_col.mean()), 1e-12), 1 - 1e-12)
            beta = np.array([math.log(rate / (1.0 - rate))])
        else:
            beta = np.array([float(y_col.mean())])
        return Predictor(columns, beta, kind)
    X = values[:, list(columns)]
    if kind == LOGISTIC:
        beta, converged, _ = _irls_arrays(X, y_col)
        if not converged:
            kind = LINEAR  # separation: linear probability fallback
    if kind == LINEAR:
        coef, b0, _, _ = _ols_arrays(X, y_col)
        beta = np.concatenate([[b0], coef])
    return Predictor(columns, beta, kind)


def train_predictors(data: Dataset, sfm: SfmAssignment, cfg: DecompConfig):
    """Fit {full, de_blocked, ie_blocked, se_blocked} on the same rows."""
    _check_protected(data, sfm, cfg)
    kind = _outcome_kind(data, sfm, cfg)
    return _train_on_arrays(data.values, data.values[:, sfm.y], sfm, kind)


def _train_on_arrays(values, y_col, sfm: SfmAssignment, kind):
    x, w, z = [sfm.x], list(sfm.w), list(sfm.z)
    return {
        "full": _fit_predictor(values, y_col, x + z + w, kind),
        "de_blocked": _fit_predictor(values, y_col, z + w, kind),
        "ie_blocked": _fit_predictor(values, y_col, x + z, kind),
        "se_blocked": _fit_predictor(values, y_col, x + w, kind),
    }


def _loss(y: np.ndarray, pred: np.ndarray, kind: str) -> float:
    if kind == LOGISTIC:
        p = np.clip(pred, 1e-12, 1.0 - 1e-12)
        return float(-np.mean(y * np.log(p) + (1.0 - y) * np.log(1.0 - p)))
    return float(np.mean((y - pred) ** 2))


def _ratio_of(gain: float, cost: float):
    if abs(cost) < EPSILON:
        return (gain / EPSILON if gain != 0.0 else 0.0), True
    return gain / cost, False


def _path_estimates(values, kinds, y_col, sfm, cfg, kind, seed_path):
    """Per-path (gain, cost, ratio, unstable) for one data sample.

    Decompositions of every predictor's outputs reuse the same derived seed,
    so identical predictors (empty blocks) cancel exactly.
    """
    predictors = _train_on_arrays(values, y_col, sfm, kind)
    preds = {name: p.predict(values) for name, p in predictors.items()}
    losses = {name: _loss(y_col, pred, kind) for name, pred in preds.items()}

    components = {}
    for name in ("full", "de_blocked", "ie_blocked", "se_blocked"):
        rng = substream(cfg.seed, "cfur", *seed_path)
        components[name] = _point_estimates(
            values, kinds, sfm, cfg, rng, y_override=preds[name]
        )
    out = {}
    for path in PATHS:
        comp = _COMPONENT_OF[path]
        blocked = f"{path.lower()}_blocked"
        gain = abs(components["full"][comp]) - abs(components[blocked][comp])
        cost = losses[blocked] - losses["full"]
        ratio, unstable = _ratio_of(gain, cost)
        out[path] = (gain, cost, ratio, unstable)
    return out


def cfur(data: Dataset, sfm: SfmAssignment, cfg: DecompConfig) -> CfurResult:
    """Fairness gain per unit utility cost for each blocked path.

    Point estimates on the full sample plus bootstrap mean/SD of the ratio
    over ``cfg.bootstrap_b`` row resamples (predictors refit per resample).
    """
    _check_protected(data, sfm, cfg)
    values, kinds = data.values, data.kinds
    y_col = values[:, sfm.y]
    kind = _outcome_kind(data, sfm, cfg)

    point = _path_estimates(values, kinds, y_col, sfm, cfg, kind, ("point",))

    ratios = {p: [] for p in PATHS}
    failed = 0
    n = data.n
    for b in range(cfg.bootstrap_b):
        rng = substream(cfg.seed, "cfur-resample", b)
        idx = rng.integers(0, n, size=n)
        try:
            est = _path_estimates(
                values[idx], kinds, y_col[idx], sfm, cfg, kind, (b,)
            )
        except DataError:
            failed += 1
            continue
        for p in PATHS:
            ratios[p].append(est[p][2])
    if cfg.bootstrap_b and failed > 0.2 * cfg.bootstrap_b:
        raise DataError(f"{failed}/{cfg.bootstrap_b} CFUR replicates failed")

    def tradeoff(path):
        gain, cost, ratio, unstable = point[path]
        vals = np.asarray(ratios[path])
        if len(vals) >= 2:
            mean, sd = float(vals.mean()), float(vals.std(ddof=1))
        else:
            mean, sd = float("nan"), float("nan")
        return PathTradeoff(
            fairness_gain=gain,
            utility_cost=cost,
            ratio=ratio,
            unstable=unstable,
            ratio_boot_mean=mean,
            ratio_boot_sd=sd,
        )

    return CfurResult(de=tradeoff("DE"), ie=tradeoff("IE"), se=tradeoff("SE"))
