"""Adder with anticipated carries, the exponent adder, and the output shifters.

One adder design serves both halves of the processor; it is instantiated at
7 bits for exponents and 23 bits for mantissas.
"""

from dataclasses import dataclass
from typing import NamedTuple

from .errors import DatapathOverflow, ExponentOverflow, RangeError
from .numerics import EXP_BITS, EXP_MASK, MANT_WIDTH, exp_from_raw, exp_to_raw


@dataclass(frozen=True)
class BitVector:
    """Fixed-width bit pattern; ``value`` is the unsigned raw integer, bit 0 is the lsb."""

    value: int
    width: int

    def __post_init__(self):
        if self.width <= 0:
            raise RangeError("width must be positive")
        if not 0 <= self.value < 1 << self.width:
            raise RangeError(f"{self.value:#x} does not fit in {self.width} bits")

    @classmethod
    def from_str(cls, s: str) -> "BitVector":
        s = s.replace("_", "")
        return cls(int(s, 2), len(s))

    @classmethod
    def from_signed(cls, n: int, width: int) -> "BitVector":
        return cls(n & ((1 << width) - 1), width)

    @property
    def signed(self) -> int:
        if self.value >> (self.width - 1):
            return self.value - (1 << self.width)
        return self.value

    def __getitem__(self, i: int) -> int:
        if not 0 <= i < self.width:
            raise IndexError(i)
        return (self.value >> i) & 1

    def __str__(self):
        return format(self.value, f"0{self.width}b")


class AdderTrace(NamedTuple):
    xor_bits: BitVector
    and_bits: BitVector
    carry_bits: BitVector  # carry into each position; bit 0 is the carry-in
    sum: BitVector
    carry_out: int


def _carries(g: int, p: int, carry_in: int, mask: int) -> int:
    # carries generated by AND bits travel left across runs of XOR ones
    c = carry_in
    while True:
        nxt = (((g | (p & c)) << 1) | carry_in) & mask
        if nxt == c:
            return c
        c = nxt


def adder_sum(a: int, b: int, width: int, carry_in: int = 0) -> tuple:
    """Sum and carry-out of raw ``width``-bit operands.

    The anticipated carries settle to exactly ``(a + b + cin) ^ a ^ b``, so the
    hot path uses that closed form; :func:`add_anticipating` runs the carry
    fixpoint explicitly and the two are checked against each other in tests.
    """
    total = a + b + carry_in
    return total & ((1 << width) - 1), total >> width


def add_anticipating(a: BitVector, b: BitVector, carry_in: int = 0) -> AdderTrace:
    if a.width != b.width:
        raise ValueError(f"operand widths differ: {a.width} vs {b.width}")
    w = a.width
    mask = (1 << w) - 1
    p = a.value ^ b.value
    g = a.value & b.value
    c = _carries(g, p, carry_in, (mask << 1) | 1)
    return AdderTrace(
        BitVector(p, w), BitVector(g, w), BitVector(c & mask, w),
        BitVector((p ^ c) & mask, w), c >> w,
    )


def add_exponent(a: int, b: int) -> tuple:
    """7-bit two's-complement addition; returns (sum, overflow)."""
    raw, _ = adder_sum(exp_to_raw(a), exp_to_raw(b), EXP_BITS)
    s = exp_from_raw(raw)
    return s, s != a + b


SELECTORS = ("identity", "negate", "half", "quarter", "double", "octuple")


def _shift(raw: int, width: int, selector: str) -> int:
    mask = (1 << width) - 1
    n = raw - (1 << width) if raw >> (width - 1) else raw
    if selector == "identity":
        return raw
    if selector == "negate":
        return -n & mask
    if selector == "half":
        return (n >> 1) & mask
    if selector == "quarter":
        return (n >> 2) & mask
    k = {"double": 1, "octuple": 3}.get(selector)
    if k is None:
        raise ValueError(f"unknown selector {selector!r}")
    out = n << k
    if not -(1 << (width - 1)) <= out < 1 << (width - 1):
        raise DatapathOverflow(f"{selector} pushed bits past the top position")
    return out & mask


def shifter(width: int, selector: str):
    """The transform ``selector`` as a function on raw ``width``-bit values."""
    if selector not in SELECTORS:
        raise ValueError(f"unknown selector {selector!r}")
    mask = (1 << width) - 1
    top = 1 << (width - 1)
    if selector == "identity":
        return lambda raw: raw
    if selector == "negate":
        return lambda raw: -raw & mask
    if selector in ("half", "quarter"):
        k = 1 if selector == "half" else 2
        return lambda raw: ((raw - (raw & top) * 2) >> k) & mask
    # doubling is safe while the bits above the result's sign agree
    k = 1 if selector == "double" else 3
    guard = ((1 << (k + 1)) - 1) << (width - 1 - k)

    def up(raw):
        g = raw & guard
        if g and g != guard:
            raise DatapathOverflow(f"{selector} pushed bits past the top position")
        return (raw << k) & mask

    return up


def route_output(e: BitVector, selector: str) -> BitVector:
    """Apply one of the fixed transforms wired to the ALU output."""
    if selector not in SELECTORS:
        raise ValueError(f"unknown selector {selector!r}")
    return BitVector(_shift(e.value, e.width, selector), e.width)


def mant_route(raw: int, selector: str) -> int:
    return _shift(raw, MANT_WIDTH, selector)


def exp_route(raw: int, selector: str) -> int:
    """Exponent-side transforms; negating -64 overflows."""
    if selector == "negate" and raw == 1 << (EXP_BITS - 1):
        raise ExponentOverflow("negating exponent -64")
    return _shift(raw & EXP_MASK, EXP_BITS, selector)

