# Analytic parameter gradients checked against finite differences and a
# few hand-derived closed forms.
#
# The randomized check uses a five-point central stencil with relative
# steps.  Where the true derivative is orders of magnitude below the
# function value, differencing cannot resolve it relatively (the
# subtraction noise is about eps * |m|), so the comparison carries a
# small absolute floor tied to the function magnitude.

import math

import numpy as np
from numpy.testing import assert_allclose

from srgrowth.models import MODEL_ORDER, ModelId, descriptor, gradient, mean_value

# Log-uniform parameter sampling ranges, chosen inside the numerically
# benign region of each model.
SAMPLE_RANGES = {
    ModelId.GO: [(10.0, 500.0), (0.01, 0.5)],
    ModelId.GOS: [(10.0, 500.0), (0.01, 0.5)],
    ModelId.HD: [(10.0, 500.0), (0.01, 0.5), (0.1, 5.0)],
    ModelId.MO: [(5.0, 200.0), (0.01, 1.0)],
    ModelId.DU: [(0.5, 20.0), (0.3, 1.5)],
    ModelId.WE: [(10.0, 500.0), (0.005, 0.2), (0.6, 2.0)],
    ModelId.YE: [(10.0, 500.0), (0.5, 4.0), (0.01, 0.3)],
    ModelId.YR: [(10.0, 500.0), (0.5, 4.0), (0.0005, 0.01)],
    ModelId.LL: [(10.0, 500.0), (0.005, 0.1), (0.8, 4.0)],
}


def sample_params(model, rng):
    return tuple(
        float(np.exp(rng.uniform(np.log(lo), np.log(hi))))
        for lo, hi in SAMPLE_RANGES[model]
    )


def stencil5(model, params, t, index, h):
    """Fourth-order central difference, error O(h^4)."""

    def at(delta):
        q = list(params)
        q[index] += delta
        return mean_value(model, tuple(q), t)

    return (at(-2.0 * h) - 8.0 * at(-h) + 8.0 * at(h) - at(2.0 * h)) / (12.0 * h)


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(20240917)
    for model in MODEL_ORDER:
        k = descriptor(model).k
        for _ in range(60):
            params = sample_params(model, rng)
            t = float(rng.uniform(0.5, 120.0))
            g = gradient(model, params, t)
            assert g.shape == (k,)
            m_scale = max(1.0, abs(mean_value(model, params, t)))
            for i in range(k):
                fd = stencil5(model, params, t, i, 1e-3 * abs(params[i]))
                tol = 1e-9 * m_scale + 1e-6 * max(abs(g[i]), abs(fd))
                assert abs(g[i] - fd) <= tol, (
                    f"{model} component {i}: analytic {g[i]}, stencil {fd}, "
                    f"params {params}, t {t}"
                )


def test_gradient_vector_time_shape():
    t = np.array([1.0, 2.0, 5.0])
    g = gradient(ModelId.WE, (100.0, 0.05, 1.2), t)
    assert g.shape == (3, 3)
    row = gradient(ModelId.WE, (100.0, 0.05, 1.2), 2.0)
    assert_allclose(g[1], row, rtol=0, atol=0)


def test_power_law_rate_derivative():
    """For m = alpha t^beta, dm/dbeta = alpha t^beta ln t.
    alpha=2, beta=1, t=3: 6 ln 3."""
    g = gradient(ModelId.DU, (2.0, 1.0), 3.0)
    assert_allclose(g[1], 6.0 * math.log(3.0), rtol=1e-12)
    # and dm/dalpha = t^beta = 3
    assert_allclose(g[0], 3.0, rtol=1e-12)


def test_exponential_asymptote_derivative():
    """For m = a(1 - e^(-bt)), dm/da = 1 - e^(-bt) and
    dm/db = a t e^(-bt)."""
    a, b, t = 100.0, 0.2, 5.0
    g = gradient(ModelId.GO, (a, b), t)
    assert_allclose(g[0], 1.0 - math.exp(-1.0), rtol=1e-14)
    assert_allclose(g[1], a * t * math.exp(-1.0), rtol=1e-14)


def test_logarithmic_scale_derivative():
    """For m = alpha ln(beta t + 1), dm/dalpha = ln(beta t + 1) exactly."""
    alpha, beta, t = 10.0, 0.3, 10.0
    g = gradient(ModelId.MO, (alpha, beta), t)
    assert_allclose(g[0], math.log(4.0), rtol=1e-14)
    assert_allclose(g[1], alpha * t / 4.0, rtol=1e-14)


def test_delayed_s_shape_rate_derivative():
    """For m = a(1 - (1+bt)e^(-bt)), dm/db = a b t^2 e^(-bt).
    a=100, b=1, t=1: 100/e."""
    g = gradient(ModelId.GOS, (100.0, 1.0), 1.0)
    assert_allclose(g[1], 100.0 / math.e, rtol=1e-13)


def test_gradient_at_zero_time_is_finite():
    for model in MODEL_ORDER:
        params = tuple(lo for lo, _ in SAMPLE_RANGES[model])
        g = gradient(model, params, 0.0)
        assert np.all(np.isfinite(g)), f"{model} gradient not finite at t=0"
