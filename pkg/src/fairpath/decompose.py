"""Counterfactual decomposition of total variation under an SFM.

Plug-in estimation. With mu the fitted outcome model E[Y | X, Z, W] and
per-mediator models fitted in SFM order given (X, Z, earlier mediators),
four quantities are averaged over the baseline group {i : X = x0}:

    A = mean mu(x1, z_i, w_i)          counterfactual X, observed mediators
    B = mean mu(x0, z_i, w_i)          model-based baseline
    C = mean mu(x1, z_i, w~_i(x1))     mediators simulated at X = x1
    D = mean y over {i : X = x1}       empirical comparison group

Counterfactual mediator values w~(x1) are mediator-model predictions at
X = x1 plus residuals resampled from the fitted model, averaged over
``mc_draws`` draws. Components:

    tv = D - E0,  de = A - B,  ie = A - C,  se = (C - D) + (E0 - B)

with E0 the empirical baseline mean. Folding the model-vs-empirical
discrepancy (E0 - B) into the spurious component makes
tv = de - ie - se hold exactly, as an algebraic identity.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .rng import substream
from .sfm import SfmAssignment
from .stats import BINARY, Dataset, _irls_arrays, _ols_arrays, _sigmoid

AUTO = "auto"
LINEAR = "linear"
LOGISTIC = "logistic"

OUTCOME_UNITS = "outcome units"
PERCENTAGE_POINTS = "percentage points"


@dataclass(frozen=True)
class DecompConfig:
    x0: float = 0.0
    x1: float = 1.0
    mc_draws: int = 100
    bootstrap_b: int = 200
    seed: int = 0
    outcome_model: str = AUTO

    def __post_init__(self):
        if self.x0 == self.x1:
            raise DataError("x0 and x1 must differ")
        if self.mc_draws < 1:
            raise DataError("mc_draws must be >= 1")
        if self.outcome_model not in (AUTO, LINEAR, LOGISTIC):
            raise DataError(f"unknown outcome model {self.outcome_model!r}")


@dataclass(frozen=True)
class ComponentStats:
    estimate: float
    boot_mean: float
    boot_sd: float
    ci_low: float
    ci_high: float

    def as_dict(self) -> dict:
        return {
            "estimate": self.estimate,
            "boot_mean": self.boot_mean,
            "boot_sd": self.boot_sd,
            "ci95": [self.ci_low, self.ci_high],
        }


@dataclass(frozen=True)
class Contribution:
    effect: str  # "IE" or "SE"
    variable: str
    value: float


@dataclass(frozen=True)
class DecompResult:
    tv: ComponentStats
    ctf_de: ComponentStats
    ctf_ie: ComponentStats
    ctf_se: ComponentStats
    contributions: tuple
    units: str

    def as_dict(self) -> dict:
        return {
            "tv": self.tv.as_dict(),
            "ctf_de": self.ctf_de.as_dict(),
            "ctf_ie": self.ctf_ie.as_dict(),
            "ctf_se": self.ctf_se.as_dict(),
            "contributions": [
                {"effect": c.effect, "variable": c.variable, "value": c.value}
                for c in self.contributions
            ],
            "units": self.units,
        }


class _OutcomeModel:
    """Fitted E[Y | X, Z, W]; logistic with a linear-probability fallback."""

    def __init__(self, design, y, kind):
        self.kind = kind
        if kind == LOGISTIC:
            beta, converged, note = _irls_arrays(design, y)
            if not converged:
                warnings.warn(
                    f"logistic outcome model did not converge ({note or 'cap hit'}); "
                    "falling back to a linear probability model"
                )
                self.kind = LINEAR
            else:
                self.beta = beta
        if self.kind == LINEAR:
            coef, b0, _, _ = _ols_arrays(design, y)
            self.beta = np.concatenate([[b0], coef])

    def eta(self, design):
        return design @ self.beta[1:] + self.beta[0]

    def link(self, eta):
        return _sigmoid(eta) if self.kind == LOGISTIC else eta

    def predict(self, design):
        return self.link(self.eta(design))


def _fit_mediators(values, x_col, z_idx, w_idx, x_vals):
    """OLS models for each mediator given (X, Z, earlier mediators).

    Returns a list of (beta, residuals) in SFM mediator order; beta is laid
    out as [intercept, x, z..., earlier mediators...].
    """
    models = []
    for k, wj in enumerate(w_idx):
        cols = [values[:, x_col]]
        cols.extend(values[:, j] for j in z_idx)
        cols.extend(values[:, w_idx[m]] for m in range(k))
        X = np.column_stack(cols) if cols else np.empty((values.shape[0], 0))
        yj = values[:, wj]
        coef, b0, _, _ = _ols_arrays(X, yj)
        beta = np.concatenate([[b0], coef])
        resid = yj - (X @ coef + b0)
        models.append((beta, resid))
    return models


def _simulate_mediators(models, n0, mc, x1, z0, rng):
    """Draw counterfactual mediator matrices, each (n0, mc), in order."""
    sims = []
    for k, (beta, resid) in enumerate(models):
        base = np.full(n0, beta[0] + beta[1] * x1)
        if z0.shape[1]:
            base += z0 @ beta[2 : 2 + z0.shape[1]]
        pred = np.broadcast_to(base[:, None], (n0, mc)).copy()
        for m in range(k):
            pred += beta[2 + z0.shape[1] + m] * sims[m]
        pred += rng.choice(resid, size=(n0, mc), replace=True)
        sims.append(pred)
    return sims


def _point_estimates(values, kinds, sfm: SfmAssignment, cfg: DecompConfig,
                     rng, y_override=None, want_contributions=False):
    """One full plug-in pass; returns components dict (raw outcome units)."""
    x, y = sfm.x, sfm.y
    w_idx, z_idx = list(sfm.w), list(sfm.z)
    x_col = values[:, x]
    rows0 = x_col == cfg.x0
    rows1 = x_col == cfg.x1
    if not rows0.any() or not rows1.any():
        raise DataError(
            f"protected level missing: x0 n={int(rows0.sum())}, "
            f"x1 n={int(rows1.sum())}"
        )
    y_col = values[:, y] if y_override is None else np.asarray(y_override)
    D = float(y_col[rows1].mean())
    E0 = float(y_col[rows0].mean())
    tv = D - E0
    out = {"tv": tv}

    if not w_idx and not z_idx:
        # mu saturated in X alone: group means are the exact MLE for both
        # linear and logistic links, so A = C = D and B = E0 hold exactly
        out.update({"de": tv, "ie": 0.0, "se": 0.0})
        if want_contributions:
            out["contributions"] = []
        return out

    model_kind = cfg.outcome_model
    if model_kind == AUTO:
        is_binary = y_override is None and kinds[y] == BINARY
        model_kind = LOGISTIC if is_binary else LINEAR

    cov_idx = [x] + z_idx + w_idx
    design = values[:, cov_idx]
    mu = _OutcomeModel(design, y_col, model_kind)

    design0 = design[rows0].copy()
    design0[:, 0] = cfg.x1
    eta_a = mu.eta(design0)  # eta at (x1, z_i, observed w_i)
    a_units = mu.link(eta_a)
    A = float(a_units.mean())
    design0[:, 0] = cfg.x0
    B = float(mu.predict(design0).mean())
    design0[:, 0] = cfg.x1

    n0 = int(rows0.sum())
    z0 = values[np.ix_(rows0, z_idx)] if z_idx else np.empty((n0, 0))
    w_coef = mu.beta[1 + len(z_idx) + 1 :]  # outcome coefficients of mediators
    if w_idx:
        mediators = _fit_mediators(values, x, z_idx, w_idx, x_col)
        sims = _simulate_mediators(mediators, n0, cfg.mc_draws, cfg.x1, z0, rng)
        eta_c = np.broadcast_to(eta_a[:, None], (n0, cfg.mc_draws)).copy()
        for k in range(len(w_idx)):
            eta_c += w_coef[k] * (sims[k] - values[rows0, w_idx[k]][:, None])
        C = float(mu.link(eta_c).mean())
    else:
        C = A  # no mediators: A and C are the same expression
    de = A - B
    ie = A - C if w_idx else 0.0
    se = (C - D) + (E0 - B)
    out.update({"de": de, "ie": ie, "se": se})

    if want_contributions:
        contribs = []
        for k, wj in enumerate(w_idx):
            # substitute only mediator k; earlier mediators stay observed
            beta, resid = mediators[k]
            base = np.full(n0, beta[0] + beta[1] * cfg.x1)
            if z_idx:
                base += z0 @ beta[2 : 2 + len(z_idx)]
            pred = np.broadcast_to(base[:, None], (n0, cfg.mc_draws)).copy()
            for m in range(k):
                pred += beta[2 + len(z_idx) + m] * values[rows0, w_idx[m]][:, None]
            pred += rng.choice(resid, size=(n0, cfg.mc_draws), replace=True)
            eta_k = eta_a[:, None] + w_coef[k] * (pred - values[rows0, wj][:, None])
            value = float(a_units.mean() - mu.link(eta_k).mean())
            contribs.append(("IE", wj, value))
        x1_rows = values[rows1]
        for k, zj in enumerate(z_idx):
            delta = float(x1_rows[:, zj].mean() - values[rows0, zj].mean())
            shifted = design0.copy()
            shifted[:, 1 + k] += delta
            value = float(mu.predict(shifted).mean() - a_units.mean())
            contribs.append(("SE", zj, value))
        out["contributions"] = contribs
    return out


def tv(data: Dataset, sfm: SfmAssignment, cfg: DecompConfig) -> float:
    """Total variation mean(Y | X=x1) - mean(Y | X=x0); graph-independent.

    Percentage points for a binary outcome, raw units otherwise.
    """
    _check_protected(data, sfm, cfg)
    x_col = data.values[:, sfm.x]
    y_col = data.values[:, sfm.y]
    rows0 = x_col == cfg.x0
    rows1 = x_col == cfg.x1
    if not rows0.any() or not rows1.any():
        raise DataError("a protected level is absent from the data")
    scale = 100.0 if data.kinds[sfm.y] == BINARY else 1.0
    return scale * float(y_col[rows1].mean() - y_col[rows0].mean())


def _check_protected(data: Dataset, sfm: SfmAssignment, cfg: DecompConfig):
    if data.kinds[sfm.x] != BINARY:
        raise DataError(
            f"protected attribute {data.names[sfm.x]!r} must be binary"
        )
    if cfg.x0 not in (0.0, 1.0) or cfg.x1 not in (0.0, 1.0):
        raise DataError("x0/x1 must be levels of a binary protected attribute")


def decompose(data: Dataset, sfm: SfmAssignment, cfg: DecompConfig,
              y_override=None) -> DecompResult:
    """Full decomposition with bootstrap over row resamples.

    ``y_override`` substitutes a prediction vector for the outcome column
    (used by the fairness-utility tradeoff); overridden outcomes are treated
    as continuous and reported in raw units.
    """
    _check_protected(data, sfm, cfg)
    values, kinds = data.values, data.kinds
    n = data.n

    point_rng = substream(cfg.seed, "decompose", "point")
    point = _point_estimates(values, kinds, sfm, cfg, point_rng,
                             y_override=y_override, want_contributions=True)

    keys = ("tv", "de", "ie", "se")
    reps = {k: [] for k in keys}
    for b in range(cfg.bootstrap_b):
        rng = substream(cfg.seed, "decompose", b)
        idx = rng.integers(0, n, size=n)
        try:
            est = _point_estimates(
                values[idx], kinds, sfm, cfg, rng,
                y_override=None if y_override is None else y_override[idx],
            )
        except DataError:
            continue  # e.g. a resample lost one protected level
        for k in keys:
            reps[k].append(est[k])

    binary_outcome = y_override is None and kinds[sfm.y] == BINARY
    scale = 100.0 if binary_outcome else 1.0
    units = PERCENTAGE_POINTS if binary_outcome else OUTCOME_UNITS

    def stats_for(key):
        vals = np.asarray(reps[key]) * scale
        if len(vals) >= 2:
            lo, hi = np.percentile(vals, [2.5, 97.5])
            return ComponentStats(
                estimate=point[key] * scale,
                boot_mean=float(vals.mean()),
                boot_sd=float(vals.std(ddof=1)),
                ci_low=float(lo),
                ci_high=float(hi),
            )
        return ComponentStats(point[key] * scale, float("nan"), float("nan"),
                              float("nan"), float("nan"))

    contribs = tuple(
        Contribution(effect=eff, variable=data.names[j], value=val * scale)
        for eff, j, val in point["contributions"]
    )
    return DecompResult(
        tv=stats_for("tv"),
        ctf_de=stats_for("de"),
        ctf_ie=stats_for("ie"),
        ctf_se=stats_for("se"),
        contributions=contribs,
        units=units,
    )


def contributions(data: Dataset, sfm: SfmAssignment, cfg: DecompConfig,
                  effect: str):
    """Per-variable contributions for one effect ("IE" or "SE").

    One-at-a-time substitution, point estimates only (no bootstrap).
    """
    effect = effect.upper()
    if effect not in ("IE", "SE"):
        raise DataError("effect must be IE or SE")
    if effect == "IE" and not sfm.w:
        raise DataError("no mediators in the SFM")
    if effect == "SE" and not sfm.z:
        raise DataError("no confounders in the SFM")
    _check_protected(data, sfm, cfg)
    rng = substream(cfg.seed, "decompose", "point")
    point = _point_estimates(data.values, data.kinds, sfm, cfg, rng,
                             want_contributions=True)
    scale = 100.0 if data.kinds[sfm.y] == BINARY else 1.0
    return [
        Contribution(effect=eff, variable=data.names[j], value=val * scale)
        for eff, j, val in point["contributions"]
        if eff == effect
    ]
