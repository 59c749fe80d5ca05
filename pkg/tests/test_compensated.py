from decimal import Decimal, getcontext
from fractions import Fraction

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from copieslab.compensated import GOLDEN_Z, dd_from_decimal, frac_mul, frac_sum, golden_z_dd, two_prod, two_sum

finite = st.floats(min_value=-1e12, max_value=1e12, allow_nan=False, allow_infinity=False)
# products must stay clear of the subnormal range for the split to be exact
normal = finite.filter(lambda x: x == 0 or abs(x) > 1e-140)


@given(finite, finite)
def test_two_sum_is_error_free(a, b):
    s, e = two_sum(a, b)
    assert Fraction(s) + Fraction(e) == Fraction(a) + Fraction(b)


@given(normal, normal)
def test_two_prod_is_error_free(a, b):
    p, e = two_prod(a, b)
    assert Fraction(p) + Fraction(e) == Fraction(a) * Fraction(b)


def test_golden_double_double_carries_extra_digits():
    hi, lo = golden_z_dd()
    getcontext().prec = 60
    err = abs(Decimal(hi) + Decimal(lo) - Decimal(GOLDEN_Z))
    assert err < Decimal("1e-31")
    assert hi == float(Decimal(GOLDEN_Z))


@settings(max_examples=200)
@given(st.integers(min_value=0, max_value=2**52), st.integers(min_value=0, max_value=50))
def test_frac_mul_matches_rational_oracle(k, offset):
    hi, lo = dd_from_decimal(Decimal(offset) + Decimal(GOLDEN_Z))
    got = float(frac_mul(hi, lo, float(k)))
    c = Fraction(hi) + Fraction(lo)
    want = c * k - (c * k).__floor__()
    assert abs(got - float(want)) < 1e-15 or abs(abs(got - float(want)) - 1) < 1e-15


def test_frac_mul_beats_naive_float_at_large_index():
    hi, lo = golden_z_dd()
    k = np.array([99_999.0 ** 2])
    exact = Fraction(hi) + Fraction(lo)
    want = float((exact * int(k[0])) % 1)
    assert abs(float(frac_mul(hi, lo, k)[0]) - want) < 1e-14


@given(st.lists(st.floats(min_value=0, max_value=1, exclude_max=True), min_size=1, max_size=5))
def test_frac_sum_in_unit_interval(parts):
    out = float(frac_sum(*[np.float64(p) for p in parts]))
    assert 0.0 <= out < 1.0
    want = float(sum(Fraction(p) for p in parts) % 1)
    assert min(abs(out - want), 1 - abs(out - want)) < 1e-15
