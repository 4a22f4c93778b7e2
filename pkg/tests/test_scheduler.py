import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dasalign.scheduler import (ConfidenceMatrix, assignment_objective, build_stage2, decide,
                                ftpa_power, hungarian, q_function, scan_range, schedule)


def brute_force(values, logs=None):
    """Lexicographically first permutation maximizing sum ln(values[n, perm[n]]).

    Pass exact ``logs`` (e.g. integer exponents) to avoid rounding-induced tie breaks.
    """
    logs = np.log(values) if logs is None else logs
    best, best_perm = -math.inf, None
    for perm in itertools.permutations(range(len(values))):
        total = sum(logs[n, k] for n, k in enumerate(perm))
        if total > best:
            best, best_perm = total, perm
    return np.array(best_perm)


def test_matches_brute_force_small(rng):
    for _ in range(30):
        values = rng.uniform(0.01, 10, (5, 5))
        perm = schedule(values)
        assert assignment_objective(values, perm) == assignment_objective(values, brute_force(values))


def test_hungarian_potentials(rng):
    cost = rng.uniform(-3, 3, (6, 6))
    assign, u, v = hungarian(cost)
    reduced = cost - np.asarray(u)[:, None] - np.asarray(v)[None, :]
    assert np.all(reduced >= -1e-12)
    assert np.allclose(reduced[np.arange(6), assign], 0, atol=1e-12)


def test_ties_break_lexicographically():
    assert list(schedule(np.ones((4, 4)))) == [0, 1, 2, 3]
    values = np.array([[2.0, 2.0, 1.0], [2.0, 2.0, 1.0], [1.0, 1.0, 4.0]])
    assert list(schedule(values)) == [0, 1, 2]
    values = np.array([[1.0, 3.0], [3.0, 1.0]])
    assert list(schedule(values)) == [1, 0]


def test_schedule_rejects_bad_input():
    with pytest.raises(ValueError):
        schedule(np.ones((2, 3)))
    with pytest.raises(ValueError):
        schedule(np.array([[1.0, 0.0], [1.0, 1.0]]))
    with pytest.raises(ValueError):
        ConfidenceMatrix(np.ones((2, 2)), np.zeros((3, 3)))


def test_ftpa_example():
    assert np.array_equal(ftpa_power([1.0, 4.0], 0.5, 1.0), np.array([2 / 3, 1 / 3]))
    assert np.allclose(ftpa_power([1.0, 4.0], 0.5, 3.0), [2.0, 1.0], rtol=1e-15)
    assert np.allclose(ftpa_power([0.3, 7.0, 2.0], 0.0, 6.0), 2.0)
    with pytest.raises(ValueError):
        ftpa_power([1.0, 0.0], 0.5, 1.0)
    with pytest.raises(ValueError):
        ftpa_power([1.0, 2.0], 1.5, 1.0)


def test_scan_range_values():
    assert scan_range(0.8, 0.8, 0.2) == math.pi / 2
    assert scan_range(1.0, 0.8, 0.2) == pytest.approx(0.4984301802044887, rel=1e-12)
    assert scan_range(0.6, 0.8, 0.2) == pytest.approx(2.6431624733853045, rel=1e-12)
    assert scan_range(100.0, 0.8, 0.2, theta_min=math.pi / 16) == math.pi / 16
    assert q_function(0.0) == 0.5


def test_scan_range_step_limit():
    assert scan_range(0.5, 0.8, 0.0) == math.pi
    assert scan_range(0.8, 0.8, 0.0) == math.pi / 2
    assert scan_range(0.9, 0.8, 0.0, theta_min=0.1) == 0.1
    with pytest.raises(ValueError):
        scan_range(1.0, 0.8, -0.1)


def test_stage2_configs_center_on_coarse_beam():
    conf = ConfidenceMatrix(np.array([[5.0, 0.1], [0.1, 0.2]]), np.array([[3, 0], [0, 9]]))
    decision = decide(conf, p_sum=1.0, nu=0.5, mu=0.8, sigma=0.2, c1=16, c2=16)
    assert list(decision.assignment) == [0, 1]
    assert np.allclose(decision.rru_confidence, [5.0, 0.2])
    assert decision.rru_power_w.sum() == pytest.approx(1.0)
    assert decision.rru_power_w[1] > decision.rru_power_w[0]
    c0, c1 = decision.stage2_configs
    assert c0.center_rad == pytest.approx(2 * math.pi * 3 / 16)
    assert c1.center_rad == pytest.approx(2 * math.pi * 9 / 16)
    assert c0.half_range_rad == pytest.approx(math.pi / 16)     # confident: clamped at the minimum
    assert c1.half_range_rad > 2.9                               # unsure: nearly the full circle
    assert c0.codebook_size == 16 and c0.tx_power_w == decision.rru_power_w[0]


def test_build_stage2_rejects_tiny_codebook():
    conf = ConfidenceMatrix(np.ones((1, 1)), np.zeros((1, 1)))
    with pytest.raises(ValueError):
        build_stage2(conf, [0], [1.0], 16, 1, 0.8, 0.2)


@settings(max_examples=60, deadline=None)
@given(n=st.integers(1, 6), seed=st.integers(0, 2**31))
def test_schedule_is_optimal_permutation(n, seed):
    values = np.random.default_rng(seed).lognormal(0, 2, (n, n))
    perm = schedule(values)
    assert sorted(perm) == list(range(n))
    assert assignment_objective(values, perm) == pytest.approx(
        assignment_objective(values, brute_force(values)), abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(n=st.integers(2, 5), seed=st.integers(0, 2**31), levels=st.integers(1, 3))
def test_ties_give_lexicographically_smallest(n, seed, levels):
    # values on a small lattice produce many exactly tied optima
    exponents = np.random.default_rng(seed).integers(0, levels, (n, n))
    values = 2.0 ** exponents
    assert list(schedule(values)) == list(brute_force(values, exponents))


@settings(max_examples=60, deadline=None)
@given(xi=st.lists(st.floats(1e-3, 1e3), min_size=1, max_size=8), nu=st.floats(0, 1),
       p=st.floats(0.01, 100))
def test_ftpa_properties(xi, nu, p):
    powers = ftpa_power(xi, nu, p)
    assert powers.sum() == pytest.approx(p, rel=1e-12)
    order = np.argsort(xi)
    assert np.all(np.diff(powers[order]) <= 1e-12 * p)


@settings(max_examples=100, deadline=None)
@given(a=st.floats(-5, 5), b=st.floats(-5, 5), mu=st.floats(0, 2), sigma=st.floats(0.01, 2))
def test_scan_range_monotone_and_bounded(a, b, mu, sigma):
    lo, hi = min(a, b), max(a, b)
    assert scan_range(lo, mu, sigma) >= scan_range(hi, mu, sigma)
    assert 0 <= scan_range(hi, mu, sigma) <= math.pi
    assert scan_range(hi, mu, sigma, math.pi / 16) >= math.pi / 16
