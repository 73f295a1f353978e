"""Model fitting: random initial search plus damped Gauss-Newton refinement.

The estimation pipeline mirrors common reliability-growth practice: a large
seeded random search over log-uniform parameter draws picks the best starting
point, then a Levenberg-Marquardt loop with the analytic Jacobian polishes it
to a least-squares optimum, projecting every step back into the parameter
bounds.  Non-convergence is recorded on the result, never raised.

Goodness of fit is summarised four ways per fit:

* ``r_squared``   1 - SS_res / SS_tot
* ``aic``         n * ln(max(rss, 1e-12) / n) + 2 * (k + 1)
* ``bic``         n * ln(max(rss, 1e-12) / n) + (k + 1) * ln(n)
* ``rse``         sqrt(rss / (n - k))

The information criteria use the Gaussian concentrated log-likelihood with
the error variance counted as one extra estimated parameter, hence k + 1.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateDataError,
    InsufficientDataError,
    NumericError,
    SrgrowthError,
)
from .models import _GRAD, _MEAN, MODEL_ORDER, ModelId, descriptor, search_bounds, validate_params
from .series import FailureSeries

RSS_FLOOR = 1e-12

_SEARCH_CHUNK = 4096
_LAMBDA_INIT = 1e-3
_LAMBDA_MAX = 1e12
_FD_STEP = 1e-6


@dataclass(frozen=True)
class FitConfig:
    """Knobs for the two-stage estimation."""

    search_budget: int = 100_000
    rng_seed: int = 0
    max_refine_iterations: int = 1000
    rss_rel_tol: float = 1e-10
    step_tol: float = 1e-12

    def __post_init__(self):
        if self.search_budget < 1:
            raise ValueError("search_budget must be at least 1")
        if self.max_refine_iterations < 1:
            raise ValueError("max_refine_iterations must be at least 1")
        if self.rss_rel_tol <= 0.0 or self.step_tol <= 0.0:
            raise ValueError("tolerances must be positive")


@dataclass(frozen=True)
class GofScores:
    r2: float
    aic: float
    bic: float
    rse: float


@dataclass(frozen=True)
class FitResult:
    model: ModelId
    params: tuple[float, ...]
    rss: float
    n: int
    k: int
    converged: bool
    iterations_used: int
    gof: GofScores


# ---------------------------------------------------------------------------
# goodness of fit
# ---------------------------------------------------------------------------


def r_squared(observed, fitted) -> float:
    """Coefficient of determination of ``fitted`` against ``observed``."""
    o = np.asarray(observed, dtype=float)
    f = np.asarray(fitted, dtype=float)
    if o.shape != f.shape or o.ndim != 1:
        raise ValueError("observed and fitted must be 1-D arrays of equal length")
    if o.size < 2:
        raise InsufficientDataError("r_squared needs at least 2 observations")
    ss_tot = float(np.sum((o - o.mean()) ** 2))
    if ss_tot == 0.0:
        raise DegenerateDataError("observed values are all equal; R^2 undefined")
    ss_res = float(np.sum((o - f) ** 2))
    return 1.0 - ss_res / ss_tot


def _check_rss_n_k(rss: float, n: int, k: int) -> None:
    if k < 1:
        raise ValueError("k must be at least 1")
    if n <= k:
        raise InsufficientDataError(f"need n > k, got n={n}, k={k}")
    if not (rss >= 0.0):
        raise ValueError(f"rss must be nonnegative, got {rss}")


def aic(rss: float, n: int, k: int) -> float:
    _check_rss_n_k(rss, n, k)
    return n * math.log(max(rss, RSS_FLOOR) / n) + 2.0 * (k + 1)


def bic(rss: float, n: int, k: int) -> float:
    _check_rss_n_k(rss, n, k)
    return n * math.log(max(rss, RSS_FLOOR) / n) + (k + 1) * math.log(n)


def rse(rss: float, n: int, k: int) -> float:
    _check_rss_n_k(rss, n, k)
    return math.sqrt(rss / (n - k))


# ---------------------------------------------------------------------------
# stage 1: random search
# ---------------------------------------------------------------------------


def _require_enough_points(model: ModelId, series: FailureSeries) -> None:
    k = descriptor(model).k
    if series.n < k + 1:
        raise InsufficientDataError(
            f"{model} has {k} parameters and needs at least {k + 1} points, "
            f"series {series.label!r} has {series.n}"
        )


def _model_rng(cfg: FitConfig, model: ModelId) -> np.random.Generator:
    # Stream is keyed by (seed, model position) so each model sees the same
    # draws whether it is fitted alone, in a batch, or concurrently.
    seed = cfg.rng_seed & 0xFFFFFFFFFFFFFFFF
    return np.random.default_rng([seed, MODEL_ORDER.index(model)])


def initial_search(model: ModelId | str, series: FailureSeries, cfg: FitConfig) -> np.ndarray:
    """Best of ``cfg.search_budget`` log-uniform parameter draws by RSS."""
    mid = ModelId(model)
    _require_enough_points(mid, series)
    lo, hi = search_bounds(mid, series.n)
    log_lo = np.log(lo)
    log_span = np.log(hi) - log_lo
    k = lo.size
    t = series.times
    y = series.cumulative
    mean_fn = _MEAN[mid]
    rng = _model_rng(cfg, mid)

    best_rss = math.inf
    best: np.ndarray | None = None
    remaining = cfg.search_budget
    while remaining > 0:
        batch = min(_SEARCH_CHUNK, remaining)
        remaining -= batch
        candidates = np.exp(log_lo + rng.random((batch, k)) * log_span)
        residuals = mean_fn(candidates, t) - y
        rss = np.einsum("ij,ij->i", residuals, residuals)
        rss = np.where(np.isfinite(rss), rss, math.inf)
        idx = int(np.argmin(rss))
        if rss[idx] < best_rss:
            best_rss = float(rss[idx])
            best = candidates[idx].copy()
    if best is None:  # pragma: no cover - budget >= 1 guarantees a candidate
        raise NumericError("initial search produced no finite candidate")
    return best


# ---------------------------------------------------------------------------
# stage 2: damped Gauss-Newton refinement
# ---------------------------------------------------------------------------


def _fd_jacobian(mean_fn, p: np.ndarray, t: np.ndarray, lo, hi) -> np.ndarray:
    k = p.size
    cols = []
    for i in range(k):
        h = _FD_STEP * max(abs(p[i]), 1e-12)
        up = p.copy()
        dn = p.copy()
        up[i] = min(p[i] + h, hi[i])
        dn[i] = max(p[i] - h, lo[i] * (1.0 + 1e-12))
        span = up[i] - dn[i]
        if span <= 0.0:
            cols.append(np.zeros_like(t))
            continue
        cols.append((mean_fn(up, t) - mean_fn(dn, t)) / span)
    return np.stack(cols, axis=-1)


def _clip_params(p: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    # keep strictly above the lower bound so log/ratio terms stay defined
    floor = np.nextafter(lo, np.inf)
    return np.minimum(np.maximum(p, floor), hi)


def refine(
    model: ModelId | str, series: FailureSeries, init, cfg: FitConfig
) -> FitResult:
    """Polish ``init`` by damped Gauss-Newton on the residual sum of squares.

    Accepted steps never increase the RSS.  Stops when the relative RSS
    drop falls below ``cfg.rss_rel_tol``, when the step norm falls below
    ``cfg.step_tol`` (both count as convergence), or at the iteration cap
    or damping exhaustion (reported as ``converged=False``).
    """
    mid = ModelId(model)
    _require_enough_points(mid, series)
    p = validate_params(mid, init)
    lo, hi = search_bounds(mid, series.n)
    p = _clip_params(p, lo, hi)
    t = series.times
    y = series.cumulative
    mean_fn = _MEAN[mid]
    grad_fn = _GRAD[mid]

    fitted = mean_fn(p, t)
    residuals = y - fitted
    if not np.all(np.isfinite(residuals)):
        raise NumericError(f"{mid} produced non-finite residuals at {p.tolist()}")
    rss = float(residuals @ residuals)

    lam = _LAMBDA_INIT
    nu = 2.0
    converged = False
    iterations = 0
    for _ in range(cfg.max_refine_iterations):
        iterations += 1
        jac = grad_fn(p, t)
        if not np.all(np.isfinite(jac)):
            jac = _fd_jacobian(mean_fn, p, t, lo, hi)
        if not np.all(np.isfinite(jac)):
            break  # hopeless curvature information: report non-convergence
        jtj = jac.T @ jac
        jtr = jac.T @ residuals
        damp = np.maximum(np.diag(jtj), 1e-12)

        accepted = False
        rejections = 0
        while lam <= _LAMBDA_MAX:
            try:
                step = np.linalg.solve(jtj + lam * np.diag(damp), jtr)
            except np.linalg.LinAlgError:
                step = None
            if step is None or not np.all(np.isfinite(step)):
                lam *= nu
                nu *= 2.0
                rejections += 1
                continue
            p_new = _clip_params(p + step, lo, hi)
            fitted_new = mean_fn(p_new, t)
            residuals_new = y - fitted_new
            rss_new = (
                float(residuals_new @ residuals_new)
                if np.all(np.isfinite(residuals_new))
                else math.inf
            )
            if rss_new <= rss:
                accepted = True
                break
            lam *= nu
            nu *= 2.0
            rejections += 1
        if not accepted:
            break  # damping exhausted; report non-convergence

        # Nielsen gain ratio: shrink the damping according to how well the
        # quadratic model predicted the actual RSS reduction.
        moved = p_new - p
        predicted = float(moved @ (lam * damp * moved + jtr))
        rho = (rss - rss_new) / predicted if predicted > 0.0 else 0.0
        lam = max(lam * max(1.0 / 3.0, 1.0 - (2.0 * rho - 1.0) ** 3), 1e-12)
        nu = 2.0

        rel_drop = (rss - rss_new) / max(rss, RSS_FLOOR)
        p, residuals, rss = p_new, residuals_new, rss_new
        if float(np.linalg.norm(moved)) < cfg.step_tol:
            converged = True
            break
        # Trust the RSS stop only for steps accepted without escalation;
        # heavily damped micro-steps say nothing about being at an optimum.
        if rejections == 0 and rel_drop < cfg.rss_rel_tol:
            converged = True
            break

    n = series.n
    k = p.size
    fitted = mean_fn(p, t)
    scores = GofScores(
        r2=r_squared(y, fitted),
        aic=aic(rss, n, k),
        bic=bic(rss, n, k),
        rse=rse(rss, n, k),
    )
    return FitResult(
        model=mid,
        params=tuple(float(v) for v in p),
        rss=rss,
        n=n,
        k=k,
        converged=converged,
        iterations_used=iterations,
        gof=scores,
    )


# ---------------------------------------------------------------------------
# batch driver
# ---------------------------------------------------------------------------


def _failure_result(model: ModelId, series: FailureSeries) -> FitResult:
    k = descriptor(model).k
    nan = float("nan")
    return FitResult(
        model=model,
        params=(nan,) * k,
        rss=nan,
        n=series.n,
        k=k,
        converged=False,
        iterations_used=0,
        gof=GofScores(nan, nan, nan, nan),
    )


def fit_one(model: ModelId | str, series: FailureSeries, cfg: FitConfig) -> FitResult:
    """Initial search followed by refinement, as one call."""
    start = initial_search(model, series, cfg)
    return refine(model, series, start, cfg)


def fit_all(
    series: FailureSeries,
    models=MODEL_ORDER,
    cfg: FitConfig = FitConfig(),
    workers: int = 1,
) -> list[FitResult]:
    """Fit every requested model to one series.

    Results come back in the canonical model order.  A model whose fit
    fails outright (for example too few points for its parameter count)
    yields a placeholder result with ``converged=False`` and NaN scores;
    the batch itself never aborts.  ``workers > 1`` fans the per-model
    fits out to a thread pool; results are identical to the sequential
    composition because each model draws from its own seeded stream.
    """
    requested = {ModelId(m) for m in models}
    if not requested:
        raise ValueError("no models requested")
    ordered = [m for m in MODEL_ORDER if m in requested]

    def one(mid: ModelId) -> FitResult:
        try:
            return fit_one(mid, series, cfg)
        except SrgrowthError:
            return _failure_result(mid, series)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(one, ordered))
    return [one(m) for m in ordered]
