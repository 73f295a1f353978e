"""Mean value functions of nine software reliability growth models.

Each model predicts the expected cumulative number of defects ``m(t)`` at
time ``t``.  The zoo covers the classic concave, S-shaped and unbounded
("infinite failure") families:

====  =========================  =========================================
id    name                       m(t)
====  =========================  =========================================
GO    Goel-Okumoto               a * (1 - exp(-b*t))
GOS   Goel-Okumoto S-shaped      a * (1 - (1 + b*t) * exp(-b*t))
HD    Hossain-Dahiya             a * (1 - exp(-b*t)) / (1 + c*exp(-b*t))
MO    Musa-Okumoto               alpha * ln(beta*t + 1)
DU    Duane                      alpha * t**beta
WE    Weibull                    a * (1 - exp(-b * t**c))
YE    Yamada exponential         a * (1 - exp(-c * (1 - exp(-beta*t))))
YR    Yamada Rayleigh            a * (1 - exp(-c * (1 - exp(-beta*t*t/2))))
LL    Log-logistic               a * (l*t)**k / (1 + (l*t)**k)
====  =========================  =========================================

The Yamada models are fitted with the product of their test-effort rate and
scale as a single combined parameter (reported as ``r·α``); the two factors
only ever appear multiplied, so they cannot be identified separately from
failure data.

All functions evaluate in float64 with exponent arguments clamped to
[-700, 700] so extreme parameter draws saturate instead of overflowing.
Evaluation is vectorised over both time grids and batches of candidate
parameter vectors.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ParameterDomainError

EXP_CLAMP = 700.0

# Default fitting bounds.  The asymptote of the bounded models scales with
# the data (100x the number of observed failures); every rate and shape
# parameter shares one generous positive range.
ASYMPTOTE_LOWER = 1e-6
RATE_LOWER = 1e-9
RATE_UPPER = 1e3
ASYMPTOTE_SCALE = 100.0


class ModelId(str, Enum):
    GO = "GO"
    GOS = "GOS"
    HD = "HD"
    MO = "MO"
    DU = "DU"
    WE = "WE"
    YE = "YE"
    YR = "YR"
    LL = "LL"

    def __str__(self) -> str:  # "GO" rather than "ModelId.GO" in reports
        return self.value


class ShapeClass(str, Enum):
    CONCAVE = "Concave"
    S_SHAPED = "S-Shaped"
    INFINITE = "Infinite"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class ModelDescriptor:
    """Static description of one model.

    ``data_scaled`` marks parameters whose default upper fitting bound is
    ``100 * n`` for an n-point series (the asymptotes).  ``zero_ok`` marks
    parameters whose mathematical domain includes zero; only the shape
    parameter of HD qualifies (at c = 0 HD reduces to GO).
    """

    id: ModelId
    shape: ShapeClass
    param_names: tuple[str, ...]
    data_scaled: tuple[bool, ...]
    zero_ok: tuple[bool, ...]

    @property
    def k(self) -> int:
        return len(self.param_names)


_DESCRIPTORS: dict[ModelId, ModelDescriptor] = {
    ModelId.GO: ModelDescriptor(
        ModelId.GO, ShapeClass.CONCAVE, ("a", "b"), (True, False), (False, False)
    ),
    ModelId.GOS: ModelDescriptor(
        ModelId.GOS, ShapeClass.S_SHAPED, ("a", "b"), (True, False), (False, False)
    ),
    ModelId.HD: ModelDescriptor(
        ModelId.HD,
        ShapeClass.CONCAVE,
        ("a", "b", "c"),
        (True, False, False),
        (False, False, True),
    ),
    ModelId.MO: ModelDescriptor(
        ModelId.MO, ShapeClass.INFINITE, ("α", "β"), (False, False), (False, False)
    ),
    ModelId.DU: ModelDescriptor(
        ModelId.DU, ShapeClass.INFINITE, ("α", "β"), (False, False), (False, False)
    ),
    ModelId.WE: ModelDescriptor(
        ModelId.WE,
        ShapeClass.CONCAVE,
        ("a", "b", "c"),
        (True, False, False),
        (False, False, False),
    ),
    ModelId.YE: ModelDescriptor(
        ModelId.YE,
        ShapeClass.CONCAVE,
        ("a", "r·α", "β"),
        (True, False, False),
        (False, False, False),
    ),
    ModelId.YR: ModelDescriptor(
        ModelId.YR,
        ShapeClass.S_SHAPED,
        ("a", "r·α", "β"),
        (True, False, False),
        (False, False, False),
    ),
    ModelId.LL: ModelDescriptor(
        ModelId.LL,
        ShapeClass.S_SHAPED,
        ("a", "λ", "κ"),
        (True, False, False),
        (False, False, False),
    ),
}

# Canonical presentation order (concave pair, finite-over-infinite families
# as usually tabulated).  Batch fitting and reports follow it.
MODEL_ORDER: tuple[ModelId, ...] = (
    ModelId.GO,
    ModelId.GOS,
    ModelId.HD,
    ModelId.MO,
    ModelId.DU,
    ModelId.WE,
    ModelId.YE,
    ModelId.YR,
    ModelId.LL,
)


def descriptor(model: ModelId | str) -> ModelDescriptor:
    return _DESCRIPTORS[ModelId(model)]


def classify(model: ModelId | str) -> ShapeClass:
    """Shape class of the model's mean value curve."""
    return descriptor(model).shape


# ---------------------------------------------------------------------------
# evaluation kernels
#
# Each kernel takes a parameter array ``p`` whose last axis holds the
# parameters (shape (k,) for one vector, (B, k) for a batch) and a 1-D time
# array, and broadcasts to (n,) respectively (B, n).
# ---------------------------------------------------------------------------


def _exp(x: np.ndarray) -> np.ndarray:
    return np.exp(np.clip(x, -EXP_CLAMP, EXP_CLAMP))


def _safe_log_t(t: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(np.where(t > 0.0, t, 1.0))


def _col(p: np.ndarray, i: int) -> np.ndarray:
    return p[..., i : i + 1]


def _mean_go(p, t):
    a, b = _col(p, 0), _col(p, 1)
    return a * (1.0 - _exp(-b * t))


def _mean_gos(p, t):
    a, b = _col(p, 0), _col(p, 1)
    bt = b * t
    return a * (1.0 - (1.0 + bt) * _exp(-bt))


def _mean_hd(p, t):
    a, b, c = _col(p, 0), _col(p, 1), _col(p, 2)
    e = _exp(-b * t)
    return a * (1.0 - e) / (1.0 + c * e)


def _mean_mo(p, t):
    alpha, beta = _col(p, 0), _col(p, 1)
    return alpha * np.log(beta * t + 1.0)


def _mean_du(p, t):
    alpha, beta = _col(p, 0), _col(p, 1)
    # One exponential of ln(alpha) + beta ln(t) so the clamp bounds the
    # whole product; alpha * t^beta can overflow even when each factor
    # is representable.
    m = _exp(np.log(alpha) + beta * _safe_log_t(t))
    return np.where(t > 0.0, m, 0.0)


def _mean_we(p, t):
    a, b, c = _col(p, 0), _col(p, 1), _col(p, 2)
    tc = np.where(t > 0.0, _exp(c * _safe_log_t(t)), 0.0)
    return a * (1.0 - _exp(-b * tc))


def _mean_ye(p, t):
    a, c, beta = _col(p, 0), _col(p, 1), _col(p, 2)
    g = 1.0 - _exp(-beta * t)
    return a * (1.0 - _exp(-c * g))


def _mean_yr(p, t):
    a, c, beta = _col(p, 0), _col(p, 1), _col(p, 2)
    g = 1.0 - _exp(-beta * t * t / 2.0)
    return a * (1.0 - _exp(-c * g))


def _mean_ll(p, t):
    a, lam, kappa = _col(p, 0), _col(p, 1), _col(p, 2)
    # (l*t)^k / (1 + (l*t)^k) is the logistic function of k*log(l*t)
    x = kappa * (np.log(lam) + _safe_log_t(t))
    s = 1.0 / (1.0 + _exp(-x))
    return np.where(t > 0.0, a * s, 0.0)


_MEAN = {
    ModelId.GO: _mean_go,
    ModelId.GOS: _mean_gos,
    ModelId.HD: _mean_hd,
    ModelId.MO: _mean_mo,
    ModelId.DU: _mean_du,
    ModelId.WE: _mean_we,
    ModelId.YE: _mean_ye,
    ModelId.YR: _mean_yr,
    ModelId.LL: _mean_ll,
}


def _grad_go(p, t):
    a, b = _col(p, 0), _col(p, 1)
    e = _exp(-b * t)
    return np.stack(np.broadcast_arrays(1.0 - e, a * t * e), axis=-1)


def _grad_gos(p, t):
    a, b = _col(p, 0), _col(p, 1)
    bt = b * t
    e = _exp(-bt)
    return np.stack(np.broadcast_arrays(1.0 - (1.0 + bt) * e, a * b * t * t * e), axis=-1)


def _grad_hd(p, t):
    a, b, c = _col(p, 0), _col(p, 1), _col(p, 2)
    e = _exp(-b * t)
    d = 1.0 + c * e
    da = (1.0 - e) / d
    db = a * (1.0 + c) * t * e / (d * d)
    dc = -a * e * (1.0 - e) / (d * d)
    return np.stack(np.broadcast_arrays(da, db, dc), axis=-1)


def _grad_mo(p, t):
    alpha, beta = _col(p, 0), _col(p, 1)
    da = np.log(beta * t + 1.0)
    db = alpha * t / (beta * t + 1.0)
    return np.stack(np.broadcast_arrays(da, db), axis=-1)


def _grad_du(p, t):
    alpha, beta = _col(p, 0), _col(p, 1)
    logt = _safe_log_t(t)
    tb = np.where(t > 0.0, _exp(beta * logt), 0.0)
    m = np.where(t > 0.0, _exp(np.log(alpha) + beta * logt), 0.0)
    da = tb
    db = m * logt
    return np.stack(np.broadcast_arrays(da, db), axis=-1)


def _grad_we(p, t):
    a, b, c = _col(p, 0), _col(p, 1), _col(p, 2)
    logt = _safe_log_t(t)
    tc = np.where(t > 0.0, _exp(c * logt), 0.0)
    e = _exp(-b * tc)
    da = 1.0 - e
    # Group the rate derivatives around x e^(-x) with x = b t^c, which is
    # bounded by 1/e; the naive a*b*tc*e product overflows long before the
    # underflowing exponential can pull it back to zero.
    xe = (b * tc) * e
    db = a * xe / b
    dc = np.where(t > 0.0, a * logt * xe, 0.0)
    return np.stack(np.broadcast_arrays(da, db, dc), axis=-1)


def _grad_ye(p, t):
    a, c, beta = _col(p, 0), _col(p, 1), _col(p, 2)
    ebt = _exp(-beta * t)
    g = 1.0 - ebt
    e = _exp(-c * g)
    da = 1.0 - e
    dc = a * g * e
    dbeta = a * c * t * ebt * e
    return np.stack(np.broadcast_arrays(da, dc, dbeta), axis=-1)


def _grad_yr(p, t):
    a, c, beta = _col(p, 0), _col(p, 1), _col(p, 2)
    half_t2 = t * t / 2.0
    eb = _exp(-beta * half_t2)
    g = 1.0 - eb
    e = _exp(-c * g)
    da = 1.0 - e
    dc = a * g * e
    dbeta = a * c * half_t2 * eb * e
    return np.stack(np.broadcast_arrays(da, dc, dbeta), axis=-1)


def _grad_ll(p, t):
    a, lam, kappa = _col(p, 0), _col(p, 1), _col(p, 2)
    logx = np.log(lam) + _safe_log_t(t)
    s = 1.0 / (1.0 + _exp(-kappa * logx))
    s1s = s * (1.0 - s)
    da = np.where(t > 0.0, s, 0.0)
    dlam = np.where(t > 0.0, a * s1s * kappa / lam, 0.0)
    dkappa = np.where(t > 0.0, a * s1s * logx, 0.0)
    return np.stack(np.broadcast_arrays(da, dlam, dkappa), axis=-1)


_GRAD = {
    ModelId.GO: _grad_go,
    ModelId.GOS: _grad_gos,
    ModelId.HD: _grad_hd,
    ModelId.MO: _grad_mo,
    ModelId.DU: _grad_du,
    ModelId.WE: _grad_we,
    ModelId.YE: _grad_ye,
    ModelId.YR: _grad_yr,
    ModelId.LL: _grad_ll,
}


# ---------------------------------------------------------------------------
# public surface
# ---------------------------------------------------------------------------


def validate_params(model: ModelId | str, params) -> np.ndarray:
    """Check arity and domain; return the vector as a float64 array.

    Raises ``ParameterDomainError`` on the wrong number of parameters, on
    non-finite values, and on values outside the model's domain (all
    parameters strictly positive, except HD's c which may be zero).
    """
    desc = descriptor(model)
    arr = np.asarray(params, dtype=float)
    if arr.shape != (desc.k,):
        raise ParameterDomainError(
            f"{desc.id} expects {desc.k} parameters {desc.param_names}, "
            f"got shape {arr.shape}"
        )
    if not np.all(np.isfinite(arr)):
        raise ParameterDomainError(f"{desc.id} parameters must be finite: {arr}")
    for name, value, zero_ok in zip(desc.param_names, arr, desc.zero_ok):
        if value < 0.0 or (value == 0.0 and not zero_ok):
            raise ParameterDomainError(
                f"{desc.id} parameter {name} must be "
                f"{'nonnegative' if zero_ok else 'strictly positive'}, got {value}"
            )
    return arr


def _validate_times(t) -> tuple[np.ndarray, bool]:
    arr = np.asarray(t, dtype=float)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    if not np.all(np.isfinite(arr)) or np.any(arr < 0.0):
        raise ParameterDomainError(f"times must be finite and nonnegative: {t!r}")
    return arr, scalar


def mean_value(model: ModelId | str, params, t):
    """Expected cumulative defect count m(t).

    ``t`` may be a scalar or a 1-D array of nonnegative times; the return
    mirrors that shape.  m(0) = 0 and m is nondecreasing for every model.
    """
    mid = ModelId(model)
    p = validate_params(mid, params)
    times, scalar = _validate_times(t)
    values = _MEAN[mid](p, times)
    return float(values[0]) if scalar else values


def gradient(model: ModelId | str, params, t):
    """Partial derivatives of m(t) with respect to each parameter.

    Returns a vector of length k for scalar ``t``, else an (n, k) array.
    """
    mid = ModelId(model)
    p = validate_params(mid, params)
    times, scalar = _validate_times(t)
    values = _GRAD[mid](p, times)
    return values[0] if scalar else values


def search_bounds(model: ModelId | str, n_obs: int) -> tuple[np.ndarray, np.ndarray]:
    """Default fitting bounds (lower, upper) for an ``n_obs``-point series.

    Asymptote parameters live in (1e-6, 100 * n_obs]; rate and shape
    parameters live in (1e-9, 1e3].
    """
    desc = descriptor(model)
    if n_obs < 1:
        raise ValueError("n_obs must be at least 1")
    lo = np.array(
        [ASYMPTOTE_LOWER if ds else RATE_LOWER for ds in desc.data_scaled], dtype=float
    )
    hi = np.array(
        [ASYMPTOTE_SCALE * n_obs if ds else RATE_UPPER for ds in desc.data_scaled],
        dtype=float,
    )
    return lo, hi
