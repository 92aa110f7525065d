from __future__ import annotations

import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cspfolio.evaluation.stats import betainc, paired_t_test, pearson, t_sf_two_sided


def mp_p_value(x, y):
    mpmath.mp.dps = 40
    d = [mpmath.mpf(a) - mpmath.mpf(b) for a, b in zip(x, y)]
    n = len(d)
    mean = mpmath.fsum(d) / n
    var = mpmath.fsum((v - mean) ** 2 for v in d) / (n - 1)
    t = mean / mpmath.sqrt(var / n)
    df = n - 1
    return float(mpmath.betainc(df / 2, 0.5, 0, df / (df + t * t), regularized=True))


@given(a=st.floats(0.05, 60), b=st.floats(0.05, 60), x=st.floats(0, 1))
@settings(max_examples=200, deadline=None)
def test_betainc_against_mpmath(a, b, x):
    ref = float(mpmath.betainc(a, b, 0, x, regularized=True))
    assert betainc(a, b, x) == pytest.approx(ref, abs=1e-9)


@pytest.mark.parametrize(
    "t,df,p",
    [(2.228, 10, 0.05), (2.086, 20, 0.05), (1.812, 10, 0.10), (2.845, 20, 0.01), (1.96, 10**6, 0.05)],
)
def test_t_table(t, df, p):
    assert t_sf_two_sided(t, df) == pytest.approx(p, abs=5e-4)
    assert t_sf_two_sided(-t, df) == t_sf_two_sided(t, df)


@pytest.mark.parametrize("seed", range(25))
def test_reference_samples(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, 200))
    x = rng.normal(size=n) * rng.uniform(0.1, 100)
    y = x + rng.normal(rng.uniform(-0.5, 0.5), 1.0, size=n)
    assert abs(paired_t_test(x, y) - mp_p_value(x, y)) <= 1e-6


def test_identical_samples():
    x = [1.0, 5.0, 2.5, 7.0]
    assert paired_t_test(x, x) == 1.0


def test_constant_shift():
    assert paired_t_test([1.0] * 10, [0.0] * 10) == 0.0


def test_symmetry():
    rng = np.random.default_rng(4)
    x, y = rng.normal(size=30), rng.normal(size=30)
    assert paired_t_test(x, y) == pytest.approx(paired_t_test(y, x), abs=1e-15)


def test_length_mismatch():
    with pytest.raises(ValueError):
        paired_t_test([1, 2, 3], [1, 2])
    with pytest.raises(ValueError):
        pearson([1, 2, 3], [1, 2])


def test_pearson_exact_lines():
    a = np.arange(10, dtype=float) ** 1.5
    assert abs(pearson(a, 2 * a + 1) - 1.0) <= 1e-12
    assert abs(pearson(a, -a) + 1.0) <= 1e-12


def test_pearson_fsum_oracle():
    a = [0.3, 1.7, 2.2, 5.1, 3.3, 9.8, 4.4, 6.0, 7.7, 0.9]
    b = [1.1, 0.4, 2.9, 4.0, 2.2, 8.1, 5.5, 4.9, 9.3, 0.2]
    ma, mb = math.fsum(a) / 10, math.fsum(b) / 10
    num = math.fsum((u - ma) * (v - mb) for u, v in zip(a, b))
    den = math.sqrt(math.fsum((u - ma) ** 2 for u in a) * math.fsum((v - mb) ** 2 for v in b))
    assert abs(pearson(a, b) - num / den) <= 1e-12


def test_pearson_zero_variance():
    with pytest.raises(ValueError, match="zero variance"):
        pearson([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])
