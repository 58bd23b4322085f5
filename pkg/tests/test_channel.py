import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from densim import channel
from densim.checks import semicircle_samples
from densim.errors import DomainError, NumericError
from densim.seeding import SeedPath


def test_exponential_moments_and_tail():
    g = channel.sample_exponential(SeedPath(1), 100_000)
    assert abs(g.mean() - 1.0) <= 3 / math.sqrt(g.size)
    p = math.exp(-1)
    assert abs(np.mean(g > 1) - p) <= 3 * math.sqrt(p * (1 - p) / g.size)
    assert np.all(g >= 0)
    np.testing.assert_array_equal(g[:10], channel.sample_exponential(SeedPath(1), 100_000)[:10])


def test_gamma_shape_one_is_exponential():
    g = channel.sample_gamma(1, SeedPath(2), 100_000)
    e = channel.sample_exponential(SeedPath(3), 100_000)
    assert stats.ks_2samp(g, e).statistic < 0.01


def test_gamma_moments():
    g = channel.sample_gamma(64, SeedPath(4), 100_000)
    n = g.size
    assert abs(g.mean() - 64) <= 3 * math.sqrt(64 / n)
    # var of the sample variance for Gamma(k): (mu4 - sigma^4) / n with mu4 = 3k^2 + 6k
    assert abs(g.var(ddof=1) - 64) <= 3 * math.sqrt((3 * 64**2 + 6 * 64 - 64**2) / n)


def test_gamma_is_sum_of_exponentials():
    n = 5
    g = channel.sample_gamma(n, SeedPath(5), 100_000)
    s = channel.sample_exponential(SeedPath(6), (100_000, n)).sum(axis=1)
    assert stats.ks_2samp(g, s).statistic < 0.01


@pytest.mark.parametrize("shape", [0, 0.5, 2.5, -3])
def test_gamma_rejects_bad_shape(shape):
    with pytest.raises(DomainError):
        channel.sample_gamma(shape, SeedPath(1))


def test_matrix_shape_and_moments():
    h = channel.sample_matrix(3, 5, SeedPath(7))
    assert h.shape == (3, 5) and h.dtype == complex
    np.testing.assert_array_equal(h, channel.sample_matrix(3, 5, SeedPath(7)))
    fro = np.array([channel.frobenius_sq(channel.sample_matrix(3, 5, SeedPath(8, (k,)))) for k in range(4000)])
    # sum of 15 unit exponentials: mean 15, variance 15
    assert abs(fro.mean() - 15) <= 3 * math.sqrt(15 / fro.size)
    with pytest.raises(DomainError):
        channel.sample_matrix(0, 3, SeedPath(1))


def test_scalar_entry_is_unit_exponential():
    z = np.array([abs(channel.sample_matrix(1, 1, SeedPath(9, (k,)))[0, 0]) ** 2 for k in range(20_000)])
    big = np.abs((channel.sample_matrix(1, 100_000, SeedPath(10)))[0]) ** 2
    assert stats.kstest(big, "expon").statistic < 0.01
    assert abs(z.mean() - 1) <= 3 / math.sqrt(z.size)


def test_frobenius_examples():
    assert channel.frobenius_sq(np.zeros((3, 4))) == 0.0
    h = np.array([[3 + 4j]])
    assert channel.frobenius_sq(h) == 25.0
    assert channel.max_singular_value_sq(h) == 25.0


def test_power_iteration_matches_eigendecomposition():
    worst = 0.0
    for k in range(200):
        h = channel.sample_matrix(8, 8, SeedPath(12, (k,)))
        oracle = np.linalg.eigvalsh(h @ h.conj().T)[-1]
        worst = max(worst, abs(channel.max_singular_value_sq(h) - oracle) / oracle)
    assert worst <= 1e-10


@pytest.mark.parametrize("shape", [(2, 9), (9, 2), (16, 64), (64, 16), (64, 64)])
def test_power_iteration_rectangular(shape):
    for k in range(5):
        h = channel.sample_matrix(*shape, SeedPath(13, (k,)))
        oracle = np.linalg.svd(h, compute_uv=False)[0] ** 2
        assert channel.max_singular_value_sq(h) == pytest.approx(oracle, rel=1e-10)


def test_power_iteration_cap_raises_with_diagnostics():
    h = channel.sample_matrix(16, 16, SeedPath(14))
    with pytest.raises(NumericError) as info:
        channel.max_eigenvalue_hermitian(h @ h.conj().T, tol=0.0, max_iter=3)
    assert info.value.diagnostics["iterations"] == 3


def test_empty_matrix_rejected():
    with pytest.raises(DomainError):
        channel.max_singular_value_sq(np.zeros((0, 3)))


@settings(max_examples=80, deadline=None)
@given(n_r=st.integers(1, 12), n_t=st.integers(1, 12), seed=st.integers(0, 2**32))
def test_frobenius_sandwich(n_r, n_t, seed):
    h = channel.sample_matrix(n_r, n_t, SeedPath(seed))
    fro = channel.frobenius_sq(h)
    phi = channel.max_singular_value_sq(h)
    assert fro / min(n_r, n_t) <= phi <= fro


# Finite-size edge shift: E[phi0^2 / N_t] sits a few percent below (1 + sqrt(y))^2 and
# the shortfall shrinks roughly like N^(-2/3).  At N_t = 64 it exceeds 5% for y > 0.
SEMICIRCLE_CASES = [
    (0.0, 64),
    (0.0, 256),
    pytest.param(0.25, 64, marks=pytest.mark.xfail(strict=True, reason="finite-size edge shift exceeds 5% at N_t=64")),
    (0.25, 256),
    pytest.param(1.0, 64, marks=pytest.mark.xfail(strict=True, reason="finite-size edge shift exceeds 5% at N_t=64")),
    (1.0, 256),
]


@pytest.mark.parametrize("ratio,n_t", SEMICIRCLE_CASES)
def test_semicircle_edge(ratio, n_t):
    n_r = max(1, round(ratio * n_t))
    values = semicircle_samples(n_t, n_r, 200, master_seed=21)
    assert abs(values.mean() / channel.semicircle_edge(ratio) - 1) <= 0.05
