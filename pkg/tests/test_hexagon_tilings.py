import cmath
import itertools
import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qracah_tilings.errors import RegimeViolation, TooLarge
from qracah_tilings.hexagon_tilings import (
    FILLS,
    HexagonSpec,
    count_tilings,
    dynamic_measure_check,
    empirical_height,
    empirical_tile_height,
    enumerate_tilings,
    exact_samples,
    flip_log_acceptance,
    flip_moves,
    is_valid,
    linear_statistic,
    log_tiling_weight,
    lowest_tiling,
    macmahon,
    mcmc_sample,
    slice_law,
    slice_marginal,
    tiling_from_json,
    tiling_to_json,
    tiling_to_svg,
)

REGIME_PARAMS = {
    "real": (0.8, 0.1),
    "imaginary": (0.8, 1.5j),
    "trigonometric": (cmath.exp(0.2j), cmath.exp(1.0j)),
}
SIDES = list(itertools.product(range(1, 4), repeat=3))


def hexagons(regime):
    q, k = REGIME_PARAMS[regime]
    for a, b, c in SIDES:
        try:
            yield HexagonSpec(a, b, c, q, k)
        except RegimeViolation:
            continue


def frequencies(ens, tilings):
    idx = {T.tobytes(): i for i, T in enumerate(ens.tilings)}
    c = np.zeros(len(ens))
    for T in tilings:
        c[idx[np.ascontiguousarray(T, dtype=np.int64).tobytes()]] += 1
    return c / c.sum()


def tv(p, r):
    return 0.5 * np.abs(p - r).sum()


@pytest.mark.parametrize("sides,count", [((1, 1, 1), 2), ((2, 2, 2), 20), ((2, 2, 3), 50), ((3, 3, 3), 980)])
def test_counts(sides, count):
    h = HexagonSpec(*sides)
    assert count_tilings(h) == macmahon(*sides) == count
    assert len(enumerate_tilings(h)) == count


def test_macmahon_all_small():
    for a, b, c in SIDES:
        assert count_tilings(HexagonSpec(a, b, c)) == macmahon(a, b, c)


def test_enumeration_guard():
    with pytest.raises(TooLarge):
        enumerate_tilings(HexagonSpec(3, 3, 3), guard=100)


def test_uniform_probabilities():
    ens = enumerate_tilings(HexagonSpec(2, 2, 2, 1.0))
    assert np.allclose(ens.probabilities, 1 / 20, atol=1e-15)
    for T in ens.tilings:
        assert is_valid(HexagonSpec(2, 2, 2), T)


@pytest.mark.parametrize("regime", sorted(REGIME_PARAMS))
def test_slice_marginals_and_dynamic_measure(regime):
    n = 0
    for h in hexagons(regime):
        ens = enumerate_tilings(h)
        for s in range(h.b + h.c + 1):
            law, marg = slice_law(h, s), slice_marginal(h, ens, s)
            assert set(marg) <= set(law)
            for k, v in law.items():
                assert abs(marg.get(k, 0.0) - v) <= 1e-12 * v
        assert dynamic_measure_check(h, ens) <= 1e-9
        n += 1
    assert n >= 10


def test_spectral_truncation_is_not_the_dynamic_measure():
    # summing only k < a in the transition kernels does not reproduce the tiling measure
    h = HexagonSpec(2, 2, 2, 0.8, 0.1)
    ens = enumerate_tilings(h)
    assert dynamic_measure_check(h, ens, full=True) <= 1e-9
    assert dynamic_measure_check(h, ens, full=False) > 1e-3


@pytest.mark.parametrize("q,kappa", [(1.0, 0.5), (0.8, 0.1)])
def test_mcmc_total_variation(q, kappa):
    h = HexagonSpec(2, 2, 2, q, kappa)
    ens = enumerate_tilings(h)
    res = mcmc_sample(h, 100_000, seed=11, thin=1, burn_in=100)
    p = frequencies(ens, res.tilings)
    assert tv(p, ens.probabilities) <= 0.01
    # every tiling visited
    assert np.all(p > 0)
    md = res.metadata()
    assert md["seed"] == 11 and md["regime"] == h.regime and 0 < md["acceptance_rate"] < 1


def test_mcmc_thread_independent():
    h = HexagonSpec(2, 3, 2, 0.7, 0.05)
    r1 = mcmc_sample(h, 200, seed=5, chains=4, threads=1)
    r2 = mcmc_sample(h, 200, seed=5, chains=4, threads=4)
    assert np.array_equal(r1.tilings, r2.tilings)
    assert all(is_valid(h, T) for T in r1.tilings)


def test_exact_sampler_matches_enumeration():
    h = HexagonSpec(2, 2, 2, 0.8, 1.5j)
    ens = enumerate_tilings(h)
    T = exact_samples(h, 20_000, seed=3)
    assert tv(frequencies(ens, T), ens.probabilities) <= 0.02


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 979), st.integers(1, 5), st.integers(0, 5), st.sampled_from([-1, 1]))
def test_detailed_balance(i, s, v, d):
    h = HexagonSpec(3, 3, 3, 0.7, 0.05)
    y = _ENS333.tilings[i]
    z = flip_moves(h, y, s, v, d)
    if z is None:
        return
    assert is_valid(h, z)
    lr = flip_log_acceptance(h, y, s, v, d)
    assert lr == pytest.approx(log_tiling_weight(h, z) - log_tiling_weight(h, y), abs=1e-12)
    # reverse move undoes it with the opposite ratio
    assert np.array_equal(flip_moves(h, z, s, v + d, -d), y)
    assert flip_log_acceptance(h, z, s, v + d, -d) == pytest.approx(-lr, abs=1e-12)


_ENS333 = enumerate_tilings(HexagonSpec(3, 3, 3, 0.7, 0.05))


def test_uniform_acceptance_ratio_is_one():
    h = HexagonSpec(2, 2, 2, 1.0)
    for y in enumerate_tilings(h).tilings:
        for s, v, d in itertools.product(range(1, 4), range(5), (-1, 1)):
            if flip_moves(h, y, s, v, d) is not None:
                assert flip_log_acceptance(h, y, s, v, d) == 0


def test_empirical_height():
    h = HexagonSpec(3, 2, 2)
    y = lowest_tiling(h)
    assert empirical_height(h, y, 0.5, -0.1) == 0
    assert empirical_height(h, y, 0.5, 5.0) == 1
    # pinned boundary line y_j(0) = j - 1 (zero-based j)
    for x in (0.0, 0.4, 0.7, 1.0):
        assert empirical_height(h, y, 0.0, x) == min(int(np.floor(3 * x)) + 1, 3) / 3
    assert empirical_tile_height(h, y, 0.0, 0.4) == pytest.approx(0.4 - 2 / 3)


def test_linear_statistic_identities():
    h = HexagonSpec(3, 2, 2, 0.7, 0.05)
    y = lowest_tiling(h)
    times = [0.4, 0.7, 1.0]
    assert linear_statistic(h, y, lambda t, x: np.ones_like(x), times) == 3 * len(times)
    x0 = 0.5
    ind = lambda t, x: (x <= x0 + 1e-12).astype(float)  # noqa: E731
    assert linear_statistic(h, y, ind, [0.7]) == pytest.approx(3 * empirical_height(h, y, 0.7, x0))


def test_json_roundtrip():
    h = HexagonSpec(2, 2, 2)
    y = enumerate_tilings(h).tilings[7]
    text = tiling_to_json(y, {"seed": 1})
    assert np.array_equal(tiling_from_json(text), y)
    assert json.loads(text)["metadata"]["seed"] == 1
    assert np.array_equal(tiling_from_json(json.dumps(y.tolist())), y)


def test_svg_has_three_fills():
    h = HexagonSpec(2, 2, 2)
    y = enumerate_tilings(h).tilings[7]
    svg = tiling_to_svg(h, y, dots=True)
    assert len(set(FILLS.values())) == 3
    for kind, fill in FILLS.items():
        assert f'class="type{kind}"' in svg and fill in svg
    # a b c lozenges of each type in a b x c hexagon: ab, ac, bc
    assert svg.count('class="typeI"') + svg.count('class="typeII"') + svg.count('class="typeIII"') == 12
