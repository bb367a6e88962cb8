"""Z1 number formats.

Memory words are 24 bits: one sign bit, a 7-bit two's-complement exponent and
16 stored fraction bits behind an implicit leading 1.  Inside the processor the
mantissa lives in a wider two's-complement register covering binary positions
+2 down to -20.
"""

from dataclasses import dataclass
from fractions import Fraction

from .errors import RangeError, ZeroUnsupported

EXP_BITS = 7
EXP_MIN = -64
EXP_MAX = 63
EXP_MASK = (1 << EXP_BITS) - 1

FRAC_BITS = 16
FRAC_MASK = (1 << FRAC_BITS) - 1

# processor mantissa: positions +2 .. -20
MANT_LOW = -20
MANT_HIGH = 2
MANT_WIDTH = MANT_HIGH - MANT_LOW + 1  # 23
MANT_MASK = (1 << MANT_WIDTH) - 1
MANT_ONE = 1 << -MANT_LOW  # raw value of 1.0
# shift between a stored 16-bit fraction and the register's -20 floor
FRAC_SHIFT = -MANT_LOW - FRAC_BITS


def exp_to_raw(e: int) -> int:
    return e & EXP_MASK


def exp_from_raw(raw: int) -> int:
    raw &= EXP_MASK
    return raw - (1 << EXP_BITS) if raw & (1 << (EXP_BITS - 1)) else raw


def mant_signed(raw: int) -> int:
    raw &= MANT_MASK
    return raw - (1 << MANT_WIDTH) if raw >> (MANT_WIDTH - 1) else raw


@dataclass(frozen=True)
class Word24:
    sign: int
    exponent: int
    fraction: int

    @property
    def bits(self) -> int:
        return (self.sign << 23) | (exp_to_raw(self.exponent) << FRAC_BITS) | self.fraction

    @classmethod
    def from_bits(cls, bits: int) -> "Word24":
        if not 0 <= bits < 1 << 24:
            raise RangeError(f"word bits out of range: {bits:#x}")
        return cls((bits >> 23) & 1, exp_from_raw(bits >> FRAC_BITS), bits & FRAC_MASK)

    @property
    def mantissa(self) -> int:
        """17-bit integer mantissa including the hidden bit."""
        return (1 << FRAC_BITS) | self.fraction

    def __str__(self):
        s = "-" if self.sign else "+"
        return f"{s}1.{self.fraction:016b}b*2^{self.exponent}"


ZERO_WORD = Word24(0, 0, 0)  # the all-zeros word; it reads as +1.0


def pack(sign: int, exponent: int, fraction: int) -> Word24:
    if sign not in (0, 1):
        raise RangeError(f"sign must be 0 or 1, got {sign}")
    if not EXP_MIN <= exponent <= EXP_MAX:
        raise RangeError(f"exponent {exponent} outside [{EXP_MIN}, {EXP_MAX}]")
    if not 0 <= fraction <= FRAC_MASK:
        raise RangeError(f"fraction {fraction:#x} does not fit 16 bits")
    return Word24(sign, exponent, fraction)


def unpack(w: Word24) -> tuple:
    return w.sign, w.exponent, w.fraction


def value_of(w: Word24) -> Fraction:
    """Exact rational value of a memory word."""
    v = Fraction(w.mantissa, 1 << FRAC_BITS)
    v = v * 2 ** w.exponent if w.exponent >= 0 else v / 2 ** -w.exponent
    return -v if w.sign else v


@dataclass(frozen=True)
class ProcMantissa:
    """Processor mantissa register, raw 23-bit two's complement, lsb = 2^-20."""

    raw: int

    def __post_init__(self):
        if not 0 <= self.raw <= MANT_MASK:
            raise RangeError(f"raw mantissa {self.raw:#x} does not fit {MANT_WIDTH} bits")

    @classmethod
    def from_word(cls, w: Word24) -> "ProcMantissa":
        return cls(w.mantissa << FRAC_SHIFT)

    @classmethod
    def from_value(cls, v) -> "ProcMantissa":
        """Exact fixed-point value; raises if v is not on the 2^-20 grid or out of range."""
        scaled = Fraction(v) * MANT_ONE
        if scaled.denominator != 1:
            raise RangeError(f"{v} is not a multiple of 2^{MANT_LOW}")
        n = scaled.numerator
        if not -(1 << (MANT_WIDTH - 1)) <= n < 1 << (MANT_WIDTH - 1):
            raise RangeError(f"{v} outside the mantissa register range")
        return cls(n & MANT_MASK)

    @property
    def signed(self) -> int:
        return mant_signed(self.raw)

    @property
    def value(self) -> Fraction:
        return Fraction(self.signed, MANT_ONE)

    def bit(self, pos: int) -> int:
        if not MANT_LOW <= pos <= MANT_HIGH:
            raise RangeError(f"position {pos} outside [{MANT_LOW}, {MANT_HIGH}]")
        return (self.raw >> (pos - MANT_LOW)) & 1

    @property
    def is_normalized(self) -> bool:
        return self.bit(0) == 1 and self.bit(1) == 0 and self.bit(2) == 0

    def fraction16(self) -> int:
        """Stored-word fraction: positions -1..-16, lower bits truncated."""
        return (self.raw >> FRAC_SHIFT) & FRAC_MASK

    def __str__(self):
        bits = f"{self.raw:023b}"
        return f"{bits[:3]}.{bits[3:]}"


def normalize(m: ProcMantissa, e: int) -> tuple:
    """Shift ``m`` until it lies in [1, 2), adjusting ``e``; bits below -20 are dropped."""
    s = m.signed
    if s == 0:
        raise ZeroUnsupported("cannot normalize a zero mantissa")
    if s < 0:
        raise RangeError("normalize expects a non-negative mantissa")
    while s >= 2 * MANT_ONE:
        s >>= 1
        e += 1
    while s < MANT_ONE:
        s <<= 1
        e -= 1
    return ProcMantissa(s), e


def repack(sign: int, m: ProcMantissa, e: int) -> Word24:
    """Normalized register contents back to a memory word (truncating)."""
    if not m.is_normalized:
        raise RangeError(f"mantissa {m} is not normalized")
    return pack(sign, e, m.fraction16())
