"""Processor register file and the routing fabric around the two ALUs.

Exponent registers hold raw 7-bit two's-complement patterns and mantissa
registers raw 23-bit patterns (lsb = 2^-20); use the helpers in
:mod:`zuse_z1.numerics` to read them as numbers.  Every bus is wired-OR: a
register loaded by several sources in one engagement receives the OR of them.
"""

from dataclasses import dataclass, field, fields, replace
from operator import attrgetter
from typing import Callable, Iterable, List

from .alu import exp_route, mant_route, shifter
from .errors import RangeError, SequencerError
from .numerics import (
    EXP_BITS,
    FRAC_SHIFT,
    MANT_WIDTH,
    MANT_LOW,
    Word24,
    exp_from_raw,
    exp_to_raw,
    mant_signed,
)

EXP_REGS = ("Af", "Ag", "Aa", "Ab", "Ae")
MANT_REGS = ("Bf", "Bg", "Ba", "Bb", "Be")
ALU_INPUTS = ("Aa", "Ab", "Ba", "Bb")

# decimal digits enter with their lsb at mantissa position -13
DIGIT_POS = -13
# in the display routine the register holds value/4; positions +2..-2 are then the integer digit
PRIMED_INT_SHIFT = -2 - MANT_LOW
SERIAL_BITS = 17


@dataclass(slots=True)
class ProcessorState:
    Af: int = 0
    Ag: int = 0
    Aa: int = 0
    Ab: int = 0
    Ae: int = 0
    Bf: int = 0
    Bg: int = 0
    Ba: int = 0
    Bb: int = 0
    Be: int = 0
    S0: int = 0
    S1: int = 0
    S3: int = 0
    mm: int = 0
    sign_F: int = 0
    sign_G: int = 0
    sign_result: int = 0
    Ph: int = 0
    Op: int = 0
    f_loaded: bool = False
    g_loaded: bool = False
    serial_count: int = 0
    Za: tuple = (0, 0, 0, 0)  # Za3, Za2, Za1, Za0
    lever: int = 0
    digits: List[int] = field(default_factory=list)
    arrow: int = 0
    flags: List[str] = field(default_factory=list)

    def copy(self) -> "ProcessorState":
        return replace(self, digits=list(self.digits), flags=list(self.flags))

    def word(self, reg: str) -> Word24:
        """Register pair F or G as a memory word (hidden bit stripped, truncated)."""
        if reg == "F":
            a, b, s = self.Af, self.Bf, self.sign_F
        elif reg == "G":
            a, b, s = self.Ag, self.Bg, self.sign_G
        else:
            raise ValueError(reg)
        return Word24(s, exp_from_raw(a), (b >> FRAC_SHIFT) & 0xFFFF)


def word_to_regs(w: Word24) -> tuple:
    """(exponent raw, mantissa raw with the hidden 1 at position 0, sign)."""
    return exp_to_raw(w.exponent), w.mantissa << FRAC_SHIFT, w.sign


def load_operand(state: ProcessorState, w: Word24) -> str:
    """LOAD discipline: fill G first, then F; returns the register written."""
    a, b, s = word_to_regs(w)
    if not state.g_loaded:
        state.Ag, state.Bg, state.sign_G, state.g_loaded = a, b, s, True
        return "G"
    state.Af, state.Bf, state.sign_F, state.f_loaded = a, b, s, True
    return "F"


def set_result(state: ProcessorState, exp_raw: int, mant_raw: int, sign: int) -> None:
    """Arithmetic result into F (17 mantissa bits kept); G becomes free for the next LOAD."""
    keep = ~((1 << FRAC_SHIFT) - 1)
    state.Af, state.Bf, state.sign_F = exp_raw, mant_raw & keep, sign
    state.f_loaded, state.g_loaded = True, False


_CONSTANTS = {"one": 1, "three": 3, "thirteen": 13}


@dataclass(frozen=True)
class RouteAction:
    """Load ``target`` (an ALU input register) from ``source`` through ``transform``.

    Sources: any register name, the constants ``one``/``three``/``thirteen``
    (exponent side), the panel digits ``Za3``..``Za0``, and ``Be_frac`` (Be with
    its integer digit erased, used by the display routine).
    """

    target: str
    source: str
    transform: str = "identity"

    def __post_init__(self):
        if self.target not in ALU_INPUTS:
            raise RangeError(f"route target must be an ALU input, got {self.target}")

    @property
    def exponent_side(self) -> bool:
        return self.target[0] == "A"

    def compile(self) -> Callable:
        """Function state -> raw value pushed onto the target."""
        src, tf = self.source, self.transform
        if src in _CONSTANTS:
            k = _CONSTANTS[src]
            raw = exp_route(k, tf)
            return lambda s: raw
        if src.startswith("Za"):
            idx = 3 - int(src[2])
            shift = DIGIT_POS - MANT_LOW
            return lambda s: mant_route(s.Za[idx] << shift, tf)
        if src == "Be_frac":
            mask = (1 << PRIMED_INT_SHIFT) - 1
            return lambda s: mant_route(s.Be & mask, tf)
        if src not in EXP_REGS + MANT_REGS:
            raise RangeError(f"unknown route source {src!r}")
        get = attrgetter(src)
        if tf == "identity":
            return get
        if src[0] == "A":
            if tf == "negate":
                return lambda s: exp_route(get(s), tf)
            fn = shifter(EXP_BITS, tf)
        else:
            fn = shifter(MANT_WIDTH, tf)
        return lambda s: fn(get(s))

    def __str__(self):
        tf = "" if self.transform == "identity" else f"{self.transform}:"
        return f"{self.target}<-{tf}{self.source}"


def apply_route(state: ProcessorState, actions: Iterable[RouteAction]) -> ProcessorState:
    """All actions read the pre-state; drivers of one target are ORed."""
    pushed = {}
    for act in actions:
        pushed[act.target] = pushed.get(act.target, 0) | act.compile()(state)
    new = state.copy()
    for target, value in pushed.items():
        setattr(new, target, getattr(new, target) | value)
    return new


def shift_register_bit(state: ProcessorState, direction: str = "low-to-high") -> int:
    """Serial read of Bf for multiplication: returns the bit shifted out at position -16."""
    if direction != "low-to-high":
        raise ValueError("Bf is only read low-to-high; division writes it with write_quotient_bit")
    if state.serial_count >= SERIAL_BITS:
        raise SequencerError("more than 17 serial accesses to Bf in one operation")
    bit = (state.Bf >> FRAC_SHIFT) & 1
    state.Bf = (state.Bf >> 1) & ~((1 << FRAC_SHIFT) - 1)
    state.serial_count += 1
    return bit


def write_quotient_bit(state: ProcessorState, bit: int) -> None:
    """Serial write of Bf for division, from position 0 downward."""
    n = state.serial_count
    if n >= SERIAL_BITS:
        raise SequencerError("more than 17 serial accesses to Bf in one operation")
    if n == 0:
        state.Bf = 0
    if bit:
        state.Bf |= 1 << (-MANT_LOW - n)
    state.serial_count = n + 1


def _mant_bits(raw: int) -> str:
    bits = format(raw, "023b")
    return f"{bits[:3]}.{bits[3:7]} {bits[7:11]} {bits[11:15]} {bits[15:19]} {bits[19:]}"


def format_state(state: ProcessorState) -> str:
    """One line per register; mantissas labelled from position +2 to -20."""
    lines = []
    for name in EXP_REGS:
        raw = getattr(state, name)
        lines.append(f"{name}  {raw:07b}  ({exp_from_raw(raw):+d})")
    lines.append("      +2..0 . -1 .......................... -20")
    for name in MANT_REGS:
        raw = getattr(state, name)
        lines.append(f"{name}  {_mant_bits(raw)}  ({mant_signed(raw) / (1 << -MANT_LOW):.9g})")
    lines.append(
        f"S0={state.S0} S1={state.S1} S3={state.S3} mm={state.mm} Ph={state.Ph} Op={state.Op:03b} "
        f"sF={state.sign_F} sG={state.sign_G} F={'loaded' if state.f_loaded else 'empty'} "
        f"G={'loaded' if state.g_loaded else 'empty'}"
    )
    return "\n".join(lines)


def compact_state(state: ProcessorState) -> str:
    """Single-line register summary for traces."""
    parts = []
    for e, m in (("Af", "Bf"), ("Ag", "Bg"), ("Ae", "Be")):
        parts.append(f"{e}={getattr(state, e):07b} {m}={getattr(state, m):023b}")
    return " ".join(parts)


STATE_FIELDS = tuple(f.name for f in fields(ProcessorState))
