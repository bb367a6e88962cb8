"""The reference models themselves: checked against exact arithmetic."""

import random
from fractions import Fraction

import oracles


def rand_triple(rng, lo=-30, hi=30):
    return (rng.getrandbits(1), rng.randint(lo, hi), rng.getrandbits(16))


def test_mul_div_bound_holds_for_bit_faithful_models():
    rng = random.Random(21)
    worst = {"mul": Fraction(0), "div": Fraction(0)}
    for _ in range(5000):
        F, G = rand_triple(rng), rand_triple(rng)
        for op, fn in (("mul", oracles.mul), ("div", oracles.div)):
            out = fn(F, G)
            assert out[0] == "ok"
            err = abs(oracles.word_value(*out[1:]) - oracles.exact(F, G, op))
            bound = oracles.mul_div_bound(out[2])
            assert err <= bound
            worst[op] = max(worst[op], err / bound)
    # the bound is not vacuous: observed errors come within a factor 4 of it
    assert worst["mul"] > Fraction(1, 4)
    assert worst["div"] > Fraction(1, 4)


def test_add_sub_equal_exponents_is_exact_truncation():
    rng = random.Random(22)
    for _ in range(5000):
        e = rng.randint(-20, 20)
        F, G = (0, e, rng.getrandbits(16)), (0, e, rng.getrandbits(16))
        out = oracles.add_sub(F, G, subtract=False)
        total = oracles.exact(F, G, "add")
        got = oracles.word_value(*out[1:])
        assert got <= total < got + Fraction(2) ** (out[2] - 16)


def test_oracle_error_tags():
    assert oracles.add_sub((0, 3, 5), (0, 3, 5), subtract=True) == ("zero",)
    assert oracles.add_sub((0, 0, 0), (0, -64, 0), subtract=False) == ("overflow",)
    assert oracles.mul((0, 40, 0), (0, 40, 0)) == ("overflow",)
    assert oracles.div((0, 0, 0), (0, -64, 0)) == ("overflow",)


def test_decimal_digits_oracle():
    assert oracles.bin2dec_digits(Fraction(8743)) == ((8, 7, 4, 3), 4)
    assert oracles.bin2dec_digits(Fraction(1, 8)) == ((1, 2, 5, 0), 0)


def test_integer_fast_paths_agree_with_rational_models():
    rng = random.Random(23)
    for _ in range(3000):
        F, G = rand_triple(rng, -64, 63), rand_triple(rng, -64, 63)
        assert oracles.mul_int(F, G) == oracles.mul(F, G)
        assert oracles.div_int(F, G) == oracles.div(F, G)
        for op, fn, check in (("mul", oracles.mul_int, oracles.mul_within_bound),
                              ("div", oracles.div_int, oracles.div_within_bound)):
            out = fn(F, G)
            if out[0] == "ok":
                err = abs(oracles.word_value(*out[1:]) - oracles.exact(F, G, op))
                assert check(F, G, out) == (err <= oracles.mul_div_bound(out[2]))
