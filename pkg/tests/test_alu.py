import random

import pytest
from hypothesis import given, strategies as st

from zuse_z1.alu import (
    BitVector,
    add_anticipating,
    add_exponent,
    adder_sum,
    exp_route,
    mant_route,
    route_output,
    shifter,
    _shift,
)
from zuse_z1.errors import DatapathOverflow, ExponentOverflow, RangeError


def ripple(a, b, width, cin=0):
    """Plain ripple-carry adder, one bit at a time."""
    carry, out, carries = cin, 0, 0
    for i in range(width):
        carries |= carry << i
        x, y = (a >> i) & 1, (b >> i) & 1
        out |= (x ^ y ^ carry) << i
        carry = (x & y) | (carry & (x ^ y))
    return out, carry, carries


def test_worked_example():
    t = add_anticipating(BitVector.from_str("10111"), BitVector.from_str("00001"))
    assert str(t.xor_bits) == "10110"
    assert str(t.and_bits) == "00001"
    assert str(t.carry_bits) == "01110"
    assert str(t.sum) == "11000"
    assert t.carry_out == 0


def test_exhaustive_width_eight_against_ripple():
    for a in range(256):
        for b in range(256):
            t = add_anticipating(BitVector(a, 8), BitVector(b, 8))
            s, c, carries = ripple(a, b, 8)
            assert (t.sum.value, t.carry_out, t.carry_bits.value) == (s, c, carries)


def test_random_wide_against_ripple():
    rng = random.Random(5)
    for _ in range(100_000):
        width = rng.choice((7, 23))
        a, b, cin = rng.getrandbits(width), rng.getrandbits(width), rng.getrandbits(1)
        s, c, _ = ripple(a, b, width, cin)
        assert adder_sum(a, b, width, cin) == (s, c)


@given(st.integers(0, (1 << 23) - 1), st.integers(0, (1 << 23) - 1), st.integers(0, 1))
def test_closed_form_matches_carry_fixpoint(a, b, cin):
    t = add_anticipating(BitVector(a, 23), BitVector(b, 23), cin)
    assert adder_sum(a, b, 23, cin) == (t.sum.value, t.carry_out)


def test_carry_in_is_bit_zero_of_carries():
    t = add_anticipating(BitVector(0, 4), BitVector(0, 4), 1)
    assert t.carry_bits.value == 1 and t.sum.value == 1


def test_width_mismatch():
    with pytest.raises(ValueError):
        add_anticipating(BitVector(1, 4), BitVector(1, 5))


def test_bitvector_bounds():
    with pytest.raises(RangeError):
        BitVector(16, 4)
    assert BitVector.from_signed(-1, 4).value == 15
    assert BitVector(0b1000, 4).signed == -8
    assert BitVector(0b0101, 4)[2] == 1


def test_add_exponent_overflow():
    assert add_exponent(60, 3) == (63, False)
    assert add_exponent(60, 4) == (-64, True)
    assert add_exponent(-64, -1) == (63, True)
    assert add_exponent(-5, 3) == (-2, False)


def test_route_transforms():
    one = 1 << 20
    assert mant_route(one, "half") == one >> 1
    assert mant_route(one, "quarter") == one >> 2
    assert mant_route(one, "double") == one << 1
    assert mant_route(one >> 2, "octuple") == one << 1
    neg = mant_route(one, "negate")
    assert mant_route(neg, "half") == mant_route(one >> 1, "negate")  # arithmetic shift
    e = BitVector(0b0011, 4)
    assert route_output(e, "negate").signed == -3


def test_double_overflow_raises():
    with pytest.raises(DatapathOverflow):
        mant_route(1 << 21, "double")
    with pytest.raises(DatapathOverflow):
        mant_route(1 << 20, "octuple")


def test_negating_minus_64_overflows():
    with pytest.raises(ExponentOverflow):
        exp_route(64, "negate")
    assert exp_route(63, "negate") == 65


@pytest.mark.parametrize("sel", ["identity", "negate", "half", "quarter", "double", "octuple"])
def test_fast_shifter_matches_reference(sel):
    fn = shifter(8, sel)
    for raw in range(256):
        try:
            want = _shift(raw, 8, sel)
        except DatapathOverflow:
            with pytest.raises(DatapathOverflow):
                fn(raw)
            continue
        assert fn(raw) == want
