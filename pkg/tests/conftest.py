import math
import sys
from fractions import Fraction

import pytest

from zuse_z1.numerics import Word24, pack


def word(x) -> Word24:
    """Exactly representable number -> memory word."""
    x = Fraction(x)
    sign = int(x < 0)
    x = abs(x)
    e = math.floor(math.log2(x))
    while Fraction(2) ** e > x:
        e -= 1
    while Fraction(2) ** (e + 1) <= x:
        e += 1
    frac = (x / Fraction(2) ** e - 1) * (1 << 16)
    assert frac.denominator == 1, f"{x} is not representable"
    return pack(sign, e, int(frac))


@pytest.fixture
def w():
    return word


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.report_lines():
        terminalreporter.write_line(line)
