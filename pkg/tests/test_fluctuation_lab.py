import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qracah_tilings.errors import RegimeViolation, WindowTooSmall
from qracah_tilings.fluctuation_lab import (
    GFFVarianceSpec,
    JacobiMatrix,
    c_direct,
    c_index_ratio,
    cosine_coefficients,
    cumulant_trace,
    gff_pairing,
    gff_pairing_target,
    gff_variance,
    jackknife,
    krein_bound,
    mc_fluctuation,
    multi_time_moments,
    sample_skewness,
    tau_of_t,
)
from qracah_tilings.hexagon_tilings import (
    HexagonSpec,
    enumerate_tilings,
    exact_samples,
    linear_statistic,
    slice_ensemble,
)
from qracah_tilings.limit_shape import ScaledParams

POLYS = ([0, 1], [0, 0, 1], [0, 0, 0, 1])
REGIMES = [(0.8, 0.1), (1.25, 0.1), (0.8, 1.5j), (cmath.exp(0.2j), cmath.exp(1.0j))]


def enumerable(q, k):
    for a in range(1, 4):
        for b in range(1, 4):
            for c in range(1, 4):
                try:
                    yield HexagonSpec(a, b, c, q, k)
                except RegimeViolation:
                    pass


def slice_statistic(h, ens, s, p):
    e = slice_ensemble(h, s)
    x = np.real(e.coords)
    return np.array([np.polyval(p[::-1], x[T[s] - e.shift]).sum() for T in ens.tilings])


@pytest.mark.parametrize("q,k", REGIMES, ids=["real<1", "real>1", "imag", "trig"])
def test_trace_formulas_against_enumeration(q, k):
    worst = 0.0
    for h in enumerable(q, k):
        ens = enumerate_tilings(h)
        P = ens.probabilities
        for s in range(1, h.b + h.c):
            J = JacobiMatrix.from_slice(h, s)
            for p in POLYS:
                X = slice_statistic(h, ens, s, p)
                m = P @ X
                v = P @ (X - m) ** 2
                worst = max(worst, abs(cumulant_trace(J, p, 1) - m) / max(1, abs(m)))
                worst = max(worst, abs(cumulant_trace(J, p, 2) - v) / max(1, abs(v)))
    assert worst <= 1e-10


def test_higher_cumulants_against_enumeration():
    h = HexagonSpec(3, 3, 3, 0.7, 0.05)
    ens = enumerate_tilings(h)
    P = ens.probabilities
    J = JacobiMatrix.from_slice(h, 3)
    X = slice_statistic(h, ens, 3, [0, 1, 0.3])
    c = X - P @ X
    k3 = P @ c**3
    k4 = P @ c**4 - 3 * (P @ c**2) ** 2
    assert cumulant_trace(J, [0, 1, 0.3], 3) == pytest.approx(k3, abs=1e-9 * max(1, abs(k3)))
    assert cumulant_trace(J, [0, 1, 0.3], 4) == pytest.approx(k4, abs=1e-9 * max(1, abs(k4)))


def test_constant_polynomial():
    J = JacobiMatrix.from_slice(HexagonSpec(3, 3, 3, 0.7, 0.05), 3)
    assert cumulant_trace(J, [1.0], 1) == pytest.approx(3)
    assert cumulant_trace(J, [1.0], 2) == 0


def test_variance_locality():
    h = HexagonSpec(6, 8, 8, 0.9, 0.02)
    J = JacobiMatrix.from_slice(h, 8)
    for p in POLYS:
        d = len(p) - 1
        w = cumulant_trace(J, p, 2, window=d)
        assert cumulant_trace(J, p, 2, window=2 * d) == pytest.approx(w, rel=1e-12)
    with pytest.raises(WindowTooSmall):
        cumulant_trace(J, [0, 0, 0, 1], 2, window=1)


def test_multi_time_moments_against_enumeration():
    h = HexagonSpec(2, 3, 2, 0.7, 0.05)
    ens = enumerate_tilings(h)
    P = ens.probabilities
    X = slice_statistic(h, ens, 1, [0, 1]) + slice_statistic(h, ens, 3, [0, 0, 1])
    mean, var = multi_time_moments(h, [1, 3], [[0, 1], [0, 0, 1]])
    assert mean == pytest.approx(P @ X, abs=1e-10)
    assert var == pytest.approx(P @ (X - P @ X) ** 2, abs=1e-10)


def test_tau_examples():
    for q in (0.5, 2.0, 0.9):
        sp = ScaledParams(1, 1, q, 0.2j)
        assert tau_of_t(sp, 1.0) == pytest.approx(0.5 * math.log(q), abs=1e-14)
    sp = ScaledParams(1, 1, 0.5, 0.2j)
    assert tau_of_t(sp, 1e-9) < -9 and tau_of_t(sp, 2 - 1e-9) > 9
    ts = np.linspace(0.01, 1.99, 50)
    assert np.all(np.diff([tau_of_t(sp, t) for t in ts]) > 0)


@pytest.mark.parametrize("k,l", [(0, 1), (-1, 0), (-1, 1)])
@pytest.mark.parametrize("t", [0.5, 1.0, 1.5])
def test_coefficient_ratio_time_change(t, k, l):
    n = 200
    sp = ScaledParams(1, 1, 0.5, 2.9j)
    h = HexagonSpec(n, n, n, 0.5 ** (1 / n), 2.9j)
    r = c_index_ratio(h, int(n * t), n + k, n + l)
    assert r == pytest.approx(math.exp(tau_of_t(sp, t) * (l - k)), rel=0.01)


def test_c_ratio_against_direct_product():
    h = HexagonSpec(6, 4, 5, 0.8, 0.1)
    for s in (1, 3, 6):
        assert c_index_ratio(h, s, 1, 3) == pytest.approx(c_direct(h, 1, s) / c_direct(h, 3, s), rel=1e-12)


def cos_spec(taus, coefs):
    # angular function of time m is sum_k coefs[m][k-1] cos(k theta) with a = 1/2, b = 0
    fs = [lambda x, c=c: np.polynomial.chebyshev.chebval(x, [0.0] + list(c)) for c in coefs]
    n = len(taus)
    return GFFVarianceSpec(list(range(n)), [0.5] * n, [0.0] * n, list(taus), fs)


def test_gff_variance_examples():
    assert gff_variance(cos_spec([0.0], [[1.0]])) == pytest.approx(0.25, abs=1e-12)
    assert gff_variance(cos_spec([0.0], [[0.0]])) == pytest.approx(0.0, abs=1e-12)
    assert gff_variance(cos_spec([0.0, math.log(2)], [[1.0], [1.0]])) == pytest.approx(0.75, abs=1e-12)
    assert gff_variance(cos_spec([0.0], [[1.0, 0.5, 0.25]])) == pytest.approx(0.421875, abs=1e-12)


def test_gff_variance_kmax_independent():
    spec = cos_spec([0.0], [[1.0]])
    spec.f = [lambda x: np.exp(np.sin(3 * x))]
    v = gff_variance(spec)
    assert gff_variance(spec, kmax=400) == pytest.approx(v, abs=1e-10)
    assert gff_variance(spec, kmax=800) == pytest.approx(v, abs=1e-10)


def test_cosine_coefficients_richardson():
    c, err = cosine_coefficients(lambda th: np.cos(2 * th) + 0.5)
    assert c[0] == pytest.approx(0.5, abs=1e-14) and c[2] == pytest.approx(0.5, abs=1e-14)
    assert err < 1e-14


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-2, 2), min_size=1, max_size=5), st.floats(0.0, 3.0))
def test_krein_bound(coefs, dtau):
    spec = cos_spec([0.0, dtau + 1e-3], [coefs, coefs[::-1]])
    L = [sum((k + 1) * abs(c) for k, c in enumerate(cs)) for cs in (coefs, coefs[::-1])]
    assert gff_variance(spec) <= krein_bound(spec, L) + 1e-12


def test_gff_spec_from_scaled_requires_increasing_tau():
    sp = ScaledParams(1, 1, 0.5, 2.9j)
    spec = GFFVarianceSpec.from_scaled(sp, [1.2, 0.6], lambda t, x: x)
    assert spec.times == [0.6, 1.2]
    with pytest.raises(ValueError):
        GFFVarianceSpec([0, 1], [1, 1], [0, 0], [1.0, 0.5], [lambda x: x] * 2)


def test_uniform_constant_function_has_zero_variance():
    h = HexagonSpec(3, 3, 3, 1.0)
    mean, var, se = mc_fluctuation(h, lambda t, x: np.ones_like(x), [0.5, 1.0], 16, seed=2)
    assert mean == 6 and var == 0 and se == 0


def test_mc_variance_against_enumeration():
    h = HexagonSpec(2, 2, 2, 0.8, 1.5j)
    ens = enumerate_tilings(h)
    f = lambda t, x: x**2 + np.sin(3 * x)  # noqa: E731
    X = np.array([linear_statistic(h, T, f, [0.5, 1.0]) for T in ens.tilings])
    P = ens.probabilities
    v = P @ (X - P @ X) ** 2
    _, var, se = mc_fluctuation(h, f, [0.5, 1.0], 4000, seed=9)
    assert abs(var - v) <= 3 * se


def test_mc_requires_samples():
    with pytest.raises(ValueError):
        mc_fluctuation(HexagonSpec(2, 2, 2), lambda t, x: x, [1.0], 8)


def test_skewness_and_jackknife():
    rng = np.random.default_rng(0)
    v = rng.normal(size=4000)
    g1, se = sample_skewness(v)
    assert abs(g1) < 3 * se
    assert se == pytest.approx(math.sqrt(6 / 4000), rel=0.01)
    se_mean = jackknife(v, np.mean)
    assert se_mean == pytest.approx(np.std(v, ddof=1) / math.sqrt(4000), rel=1e-10)


def test_pairing_trivial_cases():
    n = 10
    sp = ScaledParams(1, 1, 0.5, 2.9j)
    h = HexagonSpec(n, n, n, 0.5 ** (1 / n), 2.9j)
    T = exact_samples(h, 8, seed=1)
    zero = lambda u: 0.0  # noqa: E731
    assert np.all(gff_pairing(h, sp, zero, zero, T) == 0)
    # Laplacian concentrated at tau(0.01), far below every slice time s/n >= 0.1
    u0 = tau_of_t(sp, 0.01)
    g = lambda u: math.exp(-(u - u0) ** 2 / 0.02)  # noqa: E731
    g2 = lambda u: g(u) * (4 * (u - u0) ** 2 / 0.02**2 - 2 / 0.02)  # noqa: E731
    assert np.allclose(gff_pairing(h, sp, g, g2, T), 0, atol=1e-9)
    with pytest.raises(ValueError):
        gff_pairing(h, sp, g, g2, T, slices=[5])


def test_pairing_target_formula():
    # phi = sin(theta) e^{-u^2}: pi^2/2 int (1 + 4u^2) e^{-2u^2} du = pi^2/2 * 2 sqrt(pi/2)
    g = lambda u: math.exp(-u * u)  # noqa: E731
    g1 = lambda u: -2 * u * math.exp(-u * u)  # noqa: E731
    want = math.pi**2 / 2 * 2 * math.sqrt(math.pi / 2)
    assert gff_pairing_target(g, g1, -12, 12) == pytest.approx(want, rel=1e-10)
