import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from trigzero import (
    CoefficientSample,
    companion_oracle,
    correlation_of,
    count_zeros,
    evaluate_grid,
    sample_coefficients,
    zero_statistics,
)
from trigzero.zeros import companion_polynomial, default_zero_grid, evaluate_at

TWO_PI = 2.0 * np.pi
SEED = 20260810


def make_sample(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return CoefficientSample(n=len(a), a=a, b=b, master_seed=0, stream_id=0)


# -- evaluation ------------------------------------------------------------------


def test_evaluate_grid_cosine():
    s = make_sample([1.0], [0.0])
    f = evaluate_grid(s, 4096)
    x = TWO_PI * np.arange(4096) / 4096
    assert np.max(np.abs(f - np.cos(x))) < 1e-12


def test_evaluate_grid_sine_scaling():
    # n=2 with b = (sqrt(2), 0): the 1/sqrt(2) normalization cancels
    s = make_sample([0.0, 0.0], [math.sqrt(2.0), 0.0])
    f = evaluate_grid(s, 4096)
    x = TWO_PI * np.arange(4096) / 4096
    assert np.max(np.abs(f - np.sin(x))) < 1e-12


def test_evaluate_grid_matches_direct(measures):
    s = sample_coefficients(measures["poisson"], 64, SEED, 0)
    f = evaluate_grid(s, 4096)
    x = TWO_PI * np.arange(4096) / 4096
    assert np.max(np.abs(f - evaluate_at(s, x))) < 1e-10


def test_grid_size_validation():
    s = make_sample([1.0] * 8, [0.0] * 8)
    with pytest.raises(ValueError):
        evaluate_grid(s, 100)  # not a power of two
    with pytest.raises(ValueError):
        evaluate_grid(s, 16)  # < 2n+2


# -- counting --------------------------------------------------------------------


def test_count_cosine():
    zc = count_zeros(make_sample([1.0], [0.0]))
    assert zc.count == 2
    assert np.allclose(zc.roots, [np.pi / 2, 3 * np.pi / 2], atol=1e-12)
    assert zc.suspicious_cells == 0
    assert zc.method == "grid_bisection"


def test_root_residuals(measures):
    s = sample_coefficients(measures["poisson"], 128, SEED, 2)
    zc = count_zeros(s, retain_roots=True)
    f = np.abs(evaluate_at(s, zc.roots))
    scale = np.max(np.abs(evaluate_grid(s)))
    assert np.max(f) < 1e-9 * (1.0 + scale)
    assert np.all(np.diff(zc.roots) > 0)


def test_count_within_degree_bound(measures):
    for name in ("uniform", "box", "atomic"):
        s = sample_coefficients(measures[name], 96, SEED, 1)
        assert count_zeros(s).count <= 2 * 96


def test_interval_counts_add_up(measures):
    s = sample_coefficients(measures["poisson"], 64, SEED, 4)
    full = count_zeros(s).count
    c1 = count_zeros(s, interval=(0.0, 2.5)).count
    c2 = count_zeros(s, interval=(2.5, TWO_PI)).count
    assert c1 + c2 == full


@settings(max_examples=20, deadline=None)
@given(c=st.floats(0.0, TWO_PI), seed=st.integers(0, 50))
def test_shift_invariance(c, seed):
    m = __import__("trigzero").measure_from_density("poisson", r=0.5)
    s = sample_coefficients(m, 48, 99, seed)
    full = count_zeros(s, interval=(0.0, TWO_PI)).count
    # [c, c+2pi) must count the same periodic zero set
    left = count_zeros(s, interval=(c, TWO_PI)).count if c > 0 else full
    right = count_zeros(s, interval=(0.0, c)).count if c > 0 else 0
    assert left + right == full


# -- engineered tangencies ------------------------------------------------------------


def tangency_sample(delta):
    """f(x) = cos(x) - (1+delta) cos(2x), a double zero at 0 when delta = 0."""
    return make_sample([math.sqrt(2.0), -math.sqrt(2.0) * (1.0 + delta)],
                       [0.0, 0.0])


def test_tangency_pair_detected():
    # delta > 0 pushes f(0) slightly negative: a zero pair ~1e-4 wide appears
    zc = count_zeros(tangency_sample(1e-8))
    assert zc.count == 4
    assert zc.suspicious_cells == 0


def test_tangency_no_pair():
    zc = count_zeros(tangency_sample(-1e-8))
    assert zc.count == 2
    assert zc.suspicious_cells == 0


def test_exact_tangency_is_suspicious():
    zc = count_zeros(tangency_sample(0.0))
    assert zc.count == 2
    assert zc.suspicious_cells == 1


# -- companion oracle --------------------------------------------------------------------


def test_companion_polynomial_cosine():
    # Q_1(z) = (z^2 + 1)/2 for f = cos x
    s = make_sample([1.0], [0.0])
    assert np.allclose(companion_polynomial(s), [0.5, 0.0, 0.5])
    zc = companion_oracle(s)
    assert zc.count == 2
    assert np.allclose(zc.roots, [np.pi / 2, 3 * np.pi / 2], atol=1e-9)


def test_companion_polynomial_sine():
    s = make_sample([0.0], [1.0])
    zc = companion_oracle(s)
    assert zc.count == 2
    assert np.allclose(zc.roots, [0.0, np.pi], atol=1e-9)


def test_companion_identity_validation(measures):
    # Q(e^{i theta}) = e^{i n theta} sqrt(n) f(theta) before any eigensolve
    s = sample_coefficients(measures["box"], 24, SEED, 9)
    coeffs = companion_polynomial(s)
    theta = np.linspace(0.1, 6.0, 13)
    lhs = np.polyval(coeffs, np.exp(1j * theta))
    rhs = np.exp(1j * 24 * theta) * math.sqrt(24) * evaluate_at(s, theta)
    assert np.max(np.abs(lhs - rhs)) < 1e-9 * (1 + np.max(np.abs(rhs)))


def test_companion_matches_grid_count(measures):
    for name in ("uniform", "poisson", "box"):
        for seed in range(25):
            s = sample_coefficients(measures[name], 20, seed, 0)
            zc = count_zeros(s)
            co = companion_oracle(s)
            assert zc.count == co.count, (name, seed)
            assert np.max(np.abs(zc.roots - co.roots)) < 1e-6


def test_companion_cap():
    s = make_sample(np.ones(129), np.zeros(129))
    with pytest.raises(ValueError):
        companion_oracle(s)


def test_companion_degenerate_leading_coefficient():
    s = make_sample([1.0, 0.0], [0.0, 0.0])  # a_n = b_n = 0
    with pytest.raises(RuntimeError, match="degenerate leading"):
        companion_oracle(s)


# -- Monte Carlo summaries ------------------------------------------------------------------


def test_zero_statistics_summary(measures):
    st1 = zero_statistics(measures["uniform"], 128, 40, SEED)
    assert st1.counts.shape == (40,)
    assert st1.mean_ratio == pytest.approx(np.mean(st1.counts) / 128)
    assert st1.se == pytest.approx(
        np.std(st1.ratios, ddof=1) / math.sqrt(40)
    )
    # reproducible
    st2 = zero_statistics(measures["uniform"], 128, 40, SEED)
    assert np.array_equal(st1.counts, st2.counts)


def test_zero_statistics_needs_replicates(measures):
    with pytest.raises(ValueError):
        zero_statistics(measures["uniform"], 64, 1, SEED)
