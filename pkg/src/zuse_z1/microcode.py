"""Criterion table and the phase sequencer that executes it.

Each row of the table is a :class:`Criterion`.  It matches on the ten control
bits (opcode, S0, S1, phase) plus a list of guard conditions read from the
datapath, and carries the register loads for the ALU inputs and the control
effects (advance the phase, finish, set condition bits, ...).  Per machine
cycle at most one row fires on the exponent side and one on the mantissa side;
then both ALUs add their inputs, and the inputs are erased.

Rows flagged ``instant`` move no data.  They only resolve a loop exit or hand
control to a suspended multiplication, so they take no machine cycle.
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, List, Optional

from .alu import adder_sum
from .datapath import (
    PRIMED_INT_SHIFT,
    ProcessorState,
    RouteAction,
    set_result,
    shift_register_bit,
    write_quotient_bit,
    word_to_regs,
)
from .errors import (
    ExponentOverflow,
    PanelError,
    RangeError,
    RegisterEmpty,
    SequencerError,
    ZeroUnsupported,
)
from .numerics import (
    EXP_BITS,
    EXP_MASK,
    FRAC_BITS,
    MANT_LOW,
    MANT_MASK,
    MANT_ONE,
    MANT_WIDTH,
    Word24,
    exp_from_raw,
    exp_to_raw,
    pack,
)

OPCODES = {"ADD": 0, "SUB": 1, "MUL": 2, "DIV": 3, "READ": 4, "DISP": 5}
OPNAMES = {v: k for k, v in OPCODES.items()}
EXP, MANT = "exp", "mant"

LEVER_RANGE = (-8, 8)
ARROW_RANGE = (-16, 16)

CRITERION_IDS = {
    "ADD": range(1, 13),
    "SUB": range(1, 13),
    "MUL": range(21, 28),
    "DIV": range(40, 46),
    "READ": range(50, 61),
    "DISP": range(70, 79),
}

_BIT0 = -MANT_LOW
_SIGN_BIT = MANT_WIDTH - 1


def _value(state) -> Fraction:
    v = Fraction(state.Be, MANT_ONE)
    e = exp_from_raw(state.Ae)
    return v * 2**e if e >= 0 else v / 2**-e


def _in_range(state) -> bool:
    if state.Be == 0 or state.Be >> _SIGN_BIT:
        return False
    return 1 <= _value(state) < 10


GUARD_ATOMS = {
    "Ae>=0": lambda s: not (s.Ae >> (EXP_BITS - 1)),
    "Ae=0": lambda s: s.Ae == 0,
    "Be0": lambda s: (s.Be >> _BIT0) & 1 == 1,
    "Be+1": lambda s: (s.Be >> (_BIT0 + 1)) & 1 == 1,
    "u+2": lambda s: (s.Be >> _SIGN_BIT) & 1 == 1,
    "mm": lambda s: s.mm == 1,
    "u6": lambda s: s.lever > 0,
    "u4": lambda s: s.lever < 0,
    "in_range": _in_range,
}

EFFECTS = {
    "advance", "finish", "set_S1", "set_S3", "shift_bf", "write_q",
    "await_input", "lever_down", "suspend_tenth", "suspend_scale", "emit_digit",
}

_PREFIXES = (("1/2", "half"), ("1/4", "quarter"), ("-", "negate"), ("2", "double"), ("8", "octuple"))


def parse_routes(text: str) -> tuple:
    """``"Aa=Ae; Ab=-one; Ba=1/2Be"`` -> RouteActions."""
    out = []
    for part in filter(None, (p.strip() for p in text.split(";"))):
        target, expr = (x.strip() for x in part.split("="))
        transform = "identity"
        for prefix, name in _PREFIXES:
            if expr.startswith(prefix) and not expr[len(prefix):].isdigit():
                transform, expr = name, expr[len(prefix):]
                break
        out.append(RouteAction(target, expr, transform))
    return tuple(out)


def parse_guards(text: str) -> tuple:
    out = []
    for tok in text.split():
        want = not tok.startswith("!")
        atom = tok.lstrip("!")
        if atom not in GUARD_ATOMS:
            raise SequencerError(f"unknown guard atom {atom!r}")
        out.append((atom, want))
    return tuple(out)


@dataclass(frozen=True)
class Criterion:
    id: int
    side: str
    ops: frozenset
    phases: frozenset
    s0: Optional[int] = None
    s1: Optional[int] = None
    guards: tuple = ()
    routes: tuple = ()
    effects: tuple = ()
    instant: bool = False
    needs_mantissa: bool = False
    note: str = ""

    def matches_key(self, op: int, s0: int, s1: int, ph: int) -> bool:
        return (
            op in self.ops
            and ph in self.phases
            and (self.s0 is None or self.s0 == s0)
            and (self.s1 is None or self.s1 == s1)
        )

    def pattern(self) -> str:
        """Ten control bits Op2..Op0 S0 S1 Ph4..Ph0; x = don't care, * = several values."""

        def field_bits(values, width):
            vals = sorted(values)
            if len(vals) == 1:
                return format(vals[0], f"0{width}b")
            chars = []
            for i in reversed(range(width)):
                bits = {(v >> i) & 1 for v in vals}
                chars.append(str(bits.pop()) if len(bits) == 1 else "x")
            # a mask that also covers values outside the set is shown with *
            covered = [v for v in range(1 << width) if all(
                c == "x" or int(c) == (v >> (width - 1 - k)) & 1 for k, c in enumerate(chars))]
            return "".join(chars) if covered == vals else "*" * width

        s0 = "x" if self.s0 is None else str(self.s0)
        s1 = "x" if self.s1 is None else str(self.s1)
        return f"{field_bits(self.ops, 3)} {s0}{s1} {field_bits(self.phases, 5)}"

    def guard_text(self) -> str:
        return " ".join(("" if want else "!") + atom for atom, want in self.guards) or "-"

    def action_text(self) -> str:
        parts = [str(r) for r in self.routes] + list(self.effects)
        if self.instant:
            parts.append("(no cycle)")
        return " ".join(parts) or "-"


def _row(cid, side, ops, phases, s0=None, s1=None, guards="", routes="", effects="",
         instant=False, needs_mantissa=False, note=""):
    if isinstance(phases, int):
        phases = (phases,)
    effects = tuple(effects.split())
    bad = set(effects) - EFFECTS
    if bad:
        raise SequencerError(f"criterion {cid}: unknown effects {bad}")
    return Criterion(
        cid, side, frozenset(OPCODES[o] for o in ops.split()), frozenset(phases), s0, s1,
        parse_guards(guards), parse_routes(routes), effects, instant, needs_mantissa, note,
    )


AS, MUL, DIV, READ, DISP = "ADD SUB", "MUL", "DIV", "READ", "DISP"

TABLE = (
    # addition / subtraction
    _row(1, EXP, AS, 0, routes="Aa=Af; Ab=-Ag", effects="advance", note="difference of exponents"),
    _row(2, EXP, AS, 1, guards="Ae>=0", routes="Aa=Ae", effects="set_S1 advance"),
    _row(2, EXP, AS, 1, guards="!Ae>=0", routes="Aa=Ae", effects="advance"),
    _row(3, EXP, AS, 2, s1=0, routes="Ab=-Ae", effects="advance", note="|difference|"),
    _row(3, MANT, AS, 2, s1=0, routes="Bb=Bf"),
    _row(4, EXP, AS, 2, s1=1, routes="Ab=Ae", effects="advance"),
    _row(4, MANT, AS, 2, s1=1, routes="Bb=Bg"),
    _row(5, EXP, AS, 3, guards="Ae=0", effects="advance", instant=True, note="align right"),
    _row(5, MANT, AS, 3, guards="Ae=0", instant=True),
    _row(5, EXP, AS, 3, guards="!Ae=0", routes="Aa=Ae; Ab=-one"),
    _row(5, MANT, AS, 3, guards="!Ae=0", routes="Ba=1/2Be"),
    _row(6, MANT, AS, 4, s0=0, routes="Bb=-Be", note="subtract mantissas"),
    _row(7, MANT, AS, 4, s0=1, routes="Bb=Be", note="add mantissas"),
    _row(8, EXP, AS, 4, s1=1, routes="Ab=Af; Ba=Bf", effects="advance"),
    _row(9, EXP, AS, 4, s1=0, routes="Ab=Ag; Ba=Bg", effects="advance"),
    _row(10, EXP, AS, 5, s0=1, guards="Be+1", routes="Aa=Ae; Ab=one", effects="finish"),
    _row(10, EXP, AS, 5, s0=1, guards="!Be+1", routes="Aa=Ae", effects="finish"),
    _row(10, MANT, AS, 5, s0=1, guards="Be+1", routes="Ba=1/2Be"),
    _row(10, MANT, AS, 5, s0=1, guards="!Be+1", routes="Ba=Be"),
    _row(11, EXP, AS, 5, s0=0, guards="u+2", routes="Aa=Ae", effects="set_S3 advance",
         note="complement by subtraction"),
    _row(11, EXP, AS, 5, s0=0, guards="!u+2", routes="Aa=Ae", effects="advance"),
    _row(11, MANT, AS, 5, s0=0, guards="u+2", routes="Ba=-Be"),
    _row(11, MANT, AS, 5, s0=0, guards="!u+2", routes="Ba=Be"),
    _row(12, EXP, AS, 6, s0=0, guards="!Be0", routes="Aa=Ae; Ab=-one", needs_mantissa=True,
         note="renormalize left"),
    _row(12, EXP, AS, 6, s0=0, guards="Be0", effects="finish", instant=True, needs_mantissa=True),
    _row(12, MANT, AS, 6, s0=0, guards="!Be0", routes="Ba=2Be", needs_mantissa=True),
    _row(12, MANT, AS, 6, s0=0, guards="Be0", instant=True, needs_mantissa=True),
    # multiplication
    _row(21, EXP, MUL, 0, routes="Aa=Af; Ab=Ag", effects="shift_bf advance", note="sum of exponents"),
    _row(24, EXP, MUL, range(1, 18), routes="Aa=Ae", effects="advance", note="shift and add"),
    _row(24, MANT, MUL, range(1, 17), guards="mm", routes="Ba=1/2Be; Bb=Bg", effects="shift_bf"),
    _row(24, MANT, MUL, range(1, 17), guards="!mm", routes="Ba=1/2Be", effects="shift_bf"),
    _row(24, MANT, MUL, 17, guards="mm", routes="Ba=1/2Be; Bb=Bg"),
    _row(24, MANT, MUL, 17, guards="!mm", routes="Ba=1/2Be"),
    _row(26, EXP, MUL, 18, guards="Be+1", routes="Aa=Ae; Ab=one", effects="advance", note="align"),
    _row(26, EXP, MUL, 18, guards="!Be+1", routes="Aa=Ae", effects="advance"),
    _row(26, MANT, MUL, 18, guards="Be+1", routes="Ba=1/2Be"),
    _row(26, MANT, MUL, 18, guards="!Be+1", routes="Ba=Be"),
    _row(27, EXP, MUL, 19, routes="Aa=Ae", effects="finish", note="result to bus"),
    _row(27, MANT, MUL, 19, routes="Ba=Be"),
    # division
    _row(40, EXP, DIV, 0, routes="Aa=Af; Ab=-Ag", effects="advance", note="difference of exponents"),
    _row(40, MANT, DIV, 0, routes="Bb=Bf", note="remainder := dividend"),
    _row(41, MANT, DIV, 1, routes="Ba=Be; Bb=-Bg", note="first trial subtraction"),
    _row(42, MANT, DIV, range(2, 18), guards="u+2", routes="Ba=2Be; Bb=Bg", note="non-restoring step"),
    _row(42, MANT, DIV, range(2, 18), guards="!u+2", routes="Ba=2Be; Bb=-Bg"),
    _row(43, EXP, DIV, 1, routes="Aa=Ae", effects="advance"),
    _row(43, EXP, DIV, range(2, 19), routes="Aa=Ae", effects="write_q advance",
         note="quotient bit into Bf"),
    _row(44, EXP, DIV, 19, routes="Aa=Ae", effects="advance"),
    _row(44, MANT, DIV, 19, routes="Bb=Bf", note="quotient to ALU"),
    _row(45, EXP, DIV, 20, guards="!Be0", routes="Aa=Ae; Ab=-one", effects="finish", note="align left"),
    _row(45, EXP, DIV, 20, guards="Be0", routes="Aa=Ae", effects="finish"),
    _row(45, MANT, DIV, 20, guards="!Be0", routes="Ba=2Be"),
    _row(45, MANT, DIV, 20, guards="Be0", routes="Ba=Be"),
    # decimal to binary
    _row(50, MANT, READ, 0, effects="await_input advance", note="ready?"),
    _row(51, MANT, READ, 1, routes="Ba=Za3; Bb=Be", effects="advance", note="digit 1"),
    _row(52, MANT, READ, 2, routes="Ba=2Be; Bb=8Be", effects="advance", note="x10"),
    _row(53, MANT, READ, 3, routes="Ba=Za2; Bb=Be", effects="advance", note="digit 2"),
    _row(54, MANT, READ, 4, routes="Ba=2Be; Bb=8Be", effects="advance"),
    _row(55, MANT, READ, 5, routes="Ba=Za1; Bb=Be", effects="advance", note="digit 3"),
    _row(56, MANT, READ, 6, routes="Ba=2Be; Bb=8Be", effects="advance"),
    _row(57, EXP, READ, 7, routes="Ab=thirteen", note="digits sit at position -13"),
    _row(57, MANT, READ, 7, routes="Ba=Za0; Bb=Be", effects="advance", note="digit 4"),
    _row(58, EXP, READ, 8, guards="!Be0", routes="Aa=Ae; Ab=-one", needs_mantissa=True,
         note="align left"),
    _row(58, EXP, READ, 8, guards="Be0", effects="advance", instant=True, needs_mantissa=True),
    _row(58, MANT, READ, 8, guards="!Be0", routes="Ba=2Be", needs_mantissa=True),
    _row(58, MANT, READ, 8, guards="Be0", instant=True, needs_mantissa=True),
    _row(59, EXP, READ, 9, guards="Be+1", routes="Aa=Ae; Ab=one", note="decimal exponent"),
    _row(59, EXP, READ, 9, guards="!Be+1 u6", routes="Aa=Ae; Ab=three"),
    _row(59, EXP, READ, 9, guards="!Be+1 !u6 u4", effects="suspend_tenth", instant=True),
    _row(59, EXP, READ, 9, guards="!Be+1 !u6 !u4", effects="advance", instant=True),
    _row(59, MANT, READ, 9, guards="Be+1", routes="Ba=1/2Be"),
    _row(59, MANT, READ, 9, guards="!Be+1 u6", routes="Ba=Be; Bb=1/4Be", effects="lever_down",
         note="x1.25 with exponent +3 is x10"),
    _row(59, MANT, READ, 9, guards="!Be+1 !u6 u4", instant=True),
    _row(59, MANT, READ, 9, guards="!Be+1 !u6 !u4", instant=True),
    _row(60, EXP, READ, 10, guards="Be+1", routes="Aa=Ae; Ab=one", effects="finish", note="align right"),
    _row(60, EXP, READ, 10, guards="!Be+1", routes="Aa=Ae", effects="finish"),
    _row(60, MANT, READ, 10, guards="Be+1", routes="Ba=1/2Be"),
    _row(60, MANT, READ, 10, guards="!Be+1", routes="Ba=Be"),
    # binary to decimal
    _row(70, EXP, DISP, 0, routes="Aa=Af", effects="advance", note="setup operands"),
    _row(70, MANT, DISP, 0, routes="Bb=Bf"),
    _row(71, EXP, DISP, 1, guards="in_range", routes="Aa=Ae", effects="advance", note="range scaling"),
    _row(71, EXP, DISP, 1, guards="!in_range", effects="suspend_scale", instant=True,
         needs_mantissa=True),
    _row(71, MANT, DISP, 1, guards="in_range", routes="Ba=Be"),
    _row(71, MANT, DISP, 1, guards="!in_range", instant=True, needs_mantissa=True),
    _row(72, EXP, DISP, 2, routes="Aa=Ae", effects="advance", note="shift two places right"),
    _row(72, MANT, DISP, 2, routes="Ba=1/4Be"),
    _row(73, EXP, DISP, 3, guards="!Ae=0", routes="Aa=Ae; Ab=-one", note="align"),
    _row(73, EXP, DISP, 3, guards="Ae=0", effects="advance", instant=True),
    _row(73, MANT, DISP, 3, guards="!Ae=0", routes="Ba=2Be"),
    _row(73, MANT, DISP, 3, guards="Ae=0", instant=True),
    _row(74, EXP, DISP, 4, effects="advance", note="digit d3"),
    _row(74, MANT, DISP, 4, routes="Ba=2Be_frac; Bb=8Be_frac", effects="emit_digit"),
    _row(75, EXP, DISP, 5, effects="advance", note="digit d2"),
    _row(75, MANT, DISP, 5, routes="Ba=2Be_frac; Bb=8Be_frac", effects="emit_digit"),
    _row(76, EXP, DISP, 6, effects="advance", note="digit d1"),
    _row(76, MANT, DISP, 6, routes="Ba=2Be_frac; Bb=8Be_frac", effects="emit_digit"),
    _row(77, EXP, DISP, 7, effects="advance", note="digit d0"),
    _row(77, MANT, DISP, 7, effects="emit_digit"),
    _row(78, EXP, DISP, 8, effects="finish", note="finish"),
)


def _key(op, s0, s1, ph):
    return (op << 7) | (s0 << 6) | (s1 << 5) | ph


def _compile_guard(guards):
    preds = tuple((GUARD_ATOMS[a], want) for a, want in guards)
    if not preds:
        return lambda s: True
    if len(preds) == 1:
        (p, want), = preds
        return (lambda s: p(s)) if want else (lambda s: not p(s))
    return lambda s: all(p(s) == want for p, want in preds)


_F_ADVANCE, _F_FINISH, _F_S1, _F_S3, _F_SHIFT, _F_WRITE_Q = 1, 2, 4, 8, 16, 32
_F_EMIT, _F_LEVER, _F_TENTH, _F_SCALE, _F_NEEDS = 64, 128, 256, 512, 1024
_F_SLOW = _F_S1 | _F_S3 | _F_SHIFT | _F_WRITE_Q | _F_EMIT | _F_LEVER
_EFFECT_FLAGS = {
    "advance": _F_ADVANCE, "finish": _F_FINISH, "set_S1": _F_S1, "set_S3": _F_S3,
    "shift_bf": _F_SHIFT, "write_q": _F_WRITE_Q, "emit_digit": _F_EMIT, "lever_down": _F_LEVER,
    "suspend_tenth": _F_TENTH, "suspend_scale": _F_SCALE, "await_input": 0,
}


_INPUT_INDEX = {"Aa": 0, "Ab": 1, "Ba": 2, "Bb": 3}


class _Compiled:
    """A criterion prepared for the sequencer's inner loop."""

    __slots__ = ("crit", "id", "guard", "routes", "flags", "instant", "counter")

    def __init__(self, crit: Criterion):
        self.crit = crit
        self.id = crit.id
        self.guard = _compile_guard(crit.guards) if crit.guards else None
        self.routes = tuple((_INPUT_INDEX[r.target], r.compile()) for r in crit.routes)
        flags = 0
        for eff in crit.effects:
            flags |= _EFFECT_FLAGS[eff]
        if crit.needs_mantissa:
            flags |= _F_NEEDS
        self.flags = flags
        self.instant = crit.instant
        # loop rows whose exponent step counts alignment / renormalization shifts
        self.counter = crit.side == EXP and crit.id in (5, 12) and bool(crit.routes)


class _Step:
    """The exponent-side and mantissa-side rows firing together in one cycle."""

    __slots__ = ("ce", "cm", "flags", "instant", "routes", "exp_id", "mant_id", "counter")
    select = None

    def __init__(self, ce, cm):
        rows = [c for c in (ce, cm) if c is not None]
        if len({c.instant for c in rows}) > 1:
            raise SequencerError(
                f"criteria {[c.id for c in rows]}: instant and clocked rows would fire together"
            )
        self.ce, self.cm = ce, cm
        self.flags = 0
        for c in rows:
            self.flags |= c.flags
        self.instant = rows[0].instant
        self.routes = tuple(r for c in rows for r in c.routes)
        self.exp_id = ce.id if ce else None
        self.mant_id = cm.id if cm else None
        self.counter = ce.id if ce is not None and ce.counter else 0


class _Branch:
    __slots__ = ("select",)

    def __init__(self, atoms, choices):
        if len(atoms) == 1:
            p, = atoms
            self.select = lambda s: choices[(p(s),)]
        else:
            self.select = lambda s: choices[tuple(p(s) for p in atoms)]


class MicroprogramTable:
    """Indexed criterion table; construction verifies that rows never overlap."""

    def __init__(self, criteria=TABLE):
        self.criteria = tuple(criteria)
        self.index = {EXP: [() for _ in range(1024)], MANT: [() for _ in range(1024)]}
        for side in (EXP, MANT):
            rows = [c for c in self.criteria if c.side == side]
            for op in range(8):
                for s0 in (0, 1):
                    for s1 in (0, 1):
                        for ph in range(32):
                            hits = tuple(_Compiled(c) for c in rows if c.matches_key(op, s0, s1, ph))
                            self.index[side][_key(op, s0, s1, ph)] = hits
        self.check_soundness()
        self.plans = [self._plan(k) for k in range(1024)]

    def _plan(self, key):
        """What fires for control pattern ``key``: None, a _Step, or a _Branch on guard atoms."""
        he, hm = self.index[EXP][key], self.index[MANT][key]
        if not he and not hm:
            return None
        names = sorted({a for h in he + hm for a, _ in h.crit.guards})
        if not names:
            return _Step(he[0] if he else None, hm[0] if hm else None)
        choices = {}
        for bits in range(1 << len(names)):
            env = {a: bool((bits >> i) & 1) for i, a in enumerate(names)}

            def pick(hits):
                for h in hits:
                    if all(env[a] == w for a, w in h.crit.guards):
                        return h
                return None

            choices[tuple(env[a] for a in names)] = _Step(pick(he), pick(hm))
        return _Branch([GUARD_ATOMS[a] for a in names], choices)

    def candidates(self, side, op, s0, s1, ph):
        return tuple(c.crit for c in self.index[side][_key(op, s0, s1, ph)])

    def check_soundness(self) -> int:
        """Exhaustive check over all 1024 control patterns and every guard assignment.

        Wherever a side has candidate rows, exactly one must match for each
        combination of the guard atoms they mention.  Returns the number of
        (pattern, assignment) cases checked.
        """
        checked = 0
        for side in (EXP, MANT):
            for key, hits in enumerate(self.index[side]):
                if not hits:
                    continue
                atoms = sorted({a for h in hits for a, _ in h.crit.guards})
                for bits in range(1 << len(atoms)):
                    env = {a: bool((bits >> i) & 1) for i, a in enumerate(atoms)}
                    n = sum(all(env[a] == w for a, w in h.crit.guards) for h in hits)
                    checked += 1
                    if n != 1:
                        ids = sorted({h.crit.id for h in hits})
                        raise SequencerError(
                            f"{side} side, pattern {key:010b}, guards {env}: "
                            f"{n} criteria match (rows {ids})"
                        )
        return checked

    def listing(self) -> str:
        lines = ["# id\tside\tOp S0S1 Ph\tguards\tactions\tnote"]
        for c in self.criteria:
            lines.append(
                f"{c.id}\t{c.side}\t{c.pattern()}\t{c.guard_text()}\t{c.action_text()}\t{c.note}"
            )
        return "\n".join(lines) + "\n"


# sign unit ------------------------------------------------------------------

def effective_addition(op: int, sign_F: int, sign_G: int) -> int:
    """S0: 1 when the magnitudes are added, 0 when they are subtracted."""
    if op == OPCODES["ADD"]:
        return int(sign_F == sign_G)
    return int(sign_F != sign_G)


def addsub_sign(sign_F: int, S0: int, S1: int, S3: int) -> int:
    """Sign of F op G once the mantissa unit has run.

    For a magnitude subtraction the ALU computes (larger-exponent operand) minus
    the other one; S1 says whether that was F, S3 whether the difference had to
    be complemented.
    """
    if S0:
        return sign_F
    return sign_F ^ (1 - S1) ^ S3


def product_sign(sign_F: int, sign_G: int) -> int:
    return sign_F ^ sign_G


# decimal scaling constants -----------------------------------------------------

def decimal_constant(k: int) -> Word24:
    """10^-k as a memory word, rounded up and then raised by two more units.

    The upward bias outweighs the truncation inside a multiplication, so exact
    decimal values never display one unit low.
    """
    v = Fraction(1, 10**k) if k >= 0 else Fraction(10**-k)
    e = math.floor(math.log2(v))
    while Fraction(2) ** e > v:
        e -= 1
    while Fraction(2) ** (e + 1) <= v:
        e += 1
    scaled = v / Fraction(2) ** e * (1 << FRAC_BITS)
    m = math.ceil(scaled) + 2
    if m >= 2 << FRAC_BITS:
        m >>= 1
        e += 1
    return pack(0, e, m - (1 << FRAC_BITS))


def _decimal_exponent(v: Fraction) -> int:
    """floor(log10 v) for v > 0, exactly."""
    k = math.floor(math.log10(v.numerator) - math.log10(v.denominator))
    while Fraction(10) ** k > v:
        k -= 1
    while Fraction(10) ** (k + 1) <= v:
        k += 1
    return k


# sequencer ---------------------------------------------------------------------

@dataclass
class OpResult:
    op: str
    cycles: int = 0
    exp_ids: List[int] = field(default_factory=list)
    mant_ids: List[int] = field(default_factory=list)
    align_shifts: int = 0
    renorm_shifts: int = 0
    suspended_cycles: int = 0
    zero: bool = False
    overflow: bool = False


_DEFAULT_TABLE = None


def default_table() -> MicroprogramTable:
    global _DEFAULT_TABLE
    if _DEFAULT_TABLE is None:
        _DEFAULT_TABLE = MicroprogramTable()
    return _DEFAULT_TABLE


_EXP_SIGN = 1 << (EXP_BITS - 1)
MAX_CYCLES = 1024
MAX_SUSPENSIONS = 3


class Sequencer:
    """Runs one instruction's microprogram on a :class:`ProcessorState`.

    ``strict`` makes a zero mantissa or an exponent overflow raise; otherwise
    the machine carries on with what the hardware would hold and flags it.
    ``on_cycle(state, exp_id, mant_id)`` is called after every machine cycle.
    """

    def __init__(self, table: Optional[MicroprogramTable] = None, strict: bool = True,
                 on_cycle: Optional[Callable] = None):
        self.table = table or default_table()
        self.strict = strict
        self.on_cycle = on_cycle
        self.current: Optional[OpResult] = None

    # ---- public entry points

    def execute(self, state: ProcessorState, opname: str) -> OpResult:
        op = OPCODES[opname]
        res = OpResult(opname)
        self.current = res
        if opname in ("ADD", "SUB", "MUL", "DIV"):
            if not (state.f_loaded and state.g_loaded):
                raise RegisterEmpty(f"{opname} needs both F and G loaded")
        state.S0 = state.S1 = state.S3 = 0
        state.serial_count = 0
        state.mm = 0
        if opname in ("ADD", "SUB"):
            state.S0 = effective_addition(op, state.sign_F, state.sign_G)
        elif opname in ("MUL", "DIV"):
            state.sign_result = product_sign(state.sign_F, state.sign_G)
        elif opname == "READ":
            self._check_panel(state)
        elif opname == "DISP":
            state.digits = []
            state.arrow = 0
        self._run(state, op, res)
        self._finish(state, opname, res)
        return res

    # ---- internals

    def _check_panel(self, state):
        if len(state.Za) != 4 or any(not (isinstance(d, int) and 0 <= d <= 9) for d in state.Za):
            raise PanelError(f"panel digits must be four values 0..9, got {state.Za}")
        lo, hi = LEVER_RANGE
        if not lo <= state.lever <= hi:
            raise PanelError(f"exponent lever {state.lever} outside {lo}..{hi}")

    def _finish(self, state, opname, res):
        keep_exp = state.Ae & EXP_MASK
        if opname in ("ADD", "SUB"):
            sign = addsub_sign(state.sign_F, state.S0, state.S1, state.S3)
            set_result(state, keep_exp, state.Be, sign)
        elif opname in ("MUL", "DIV"):
            set_result(state, keep_exp, state.Be, state.sign_result)
        elif opname == "READ":
            sign = state.sign_result
            keep = state.Be & ~((1 << (-MANT_LOW - FRAC_BITS)) - 1)
            if not state.g_loaded:
                state.Ag, state.Bg, state.sign_G, state.g_loaded = keep_exp, keep, sign, True
            else:
                state.Af, state.Bf, state.sign_F, state.f_loaded = keep_exp, keep, sign, True
        elif opname == "DISP":
            lo, hi = ARROW_RANGE
            if not lo <= state.arrow + 1 <= hi:
                raise RangeError(f"decimal exponent {state.arrow + 1} outside the display ({lo}..{hi})")

    def _overflow(self, what):
        if self.strict:
            raise ExponentOverflow(what)
        return True

    def _run(self, state, op, res):
        plans = self.table.plans
        on_cycle = self.on_cycle
        exp_ids, mant_ids = res.exp_ids, res.mant_ids
        state.Op, state.Ph = op, 0
        state.Aa = state.Ab = state.Ba = state.Bb = 0
        base = op << 7
        suspensions = 0
        cycles = 0
        try:
            while True:
                if cycles > MAX_CYCLES:
                    raise SequencerError(f"{OPNAMES[op]} did not finish within {MAX_CYCLES} cycles")
                key = base | (state.S0 << 6) | (state.S1 << 5) | state.Ph
                step = plans[key]
                if step is None:
                    raise SequencerError(
                        f"no criterion matches {OPNAMES[op]} S0={state.S0} S1={state.S1} Ph={state.Ph}"
                    )
                if step.select is not None:
                    step = step.select(state)
                flags, instant, routes = step.flags, step.instant, step.routes
                if flags & _F_NEEDS and state.Be == 0:
                    if self.strict:
                        raise ZeroUnsupported(f"{OPNAMES[op]}: mantissa became zero (phase {state.Ph})")
                    res.zero = True
                    state.flags.append("zero-mantissa")
                    return
                if instant:
                    if flags & _F_SCALE:
                        suspensions += 1
                        if suspensions > MAX_SUSPENSIONS:
                            raise SequencerError("decimal scaling did not converge")
                    if flags & (_F_SCALE | _F_TENTH):
                        res.cycles = cycles
                        self._suspend(state, flags, res)
                        cycles = res.cycles
                    if flags & _F_ADVANCE:
                        state.Ph += 1
                    if flags & _F_FINISH:
                        return
                    continue

                # routes read the pre-state; drivers of one input are ORed
                inp = [0, 0, 0, 0]
                try:
                    for target, fn in routes:
                        inp[target] |= fn(state)
                except ExponentOverflow:
                    if self.strict:
                        raise
                    inp = [0, 0, 0, 0]
                    for target, fn in routes:
                        inp[target] |= self._eval_route(fn, state, res)
                if flags & _F_SLOW:
                    if flags & _F_WRITE_Q:
                        write_quotient_bit(state, 1 - ((state.Be >> _SIGN_BIT) & 1))
                    if flags & _F_EMIT:
                        d = state.Be >> PRIMED_INT_SHIFT
                        if d > 9:
                            raise SequencerError(f"digit extraction produced {d}")
                        state.digits.append(d)

                # both ALUs add; the inputs are erased afterwards
                aa, ab, ba, bb = inp
                ae = adder_sum(aa, ab, EXP_BITS)[0]
                if (aa & _EXP_SIGN) == (ab & _EXP_SIGN) and (ae & _EXP_SIGN) != (aa & _EXP_SIGN):
                    res.overflow = self._overflow(
                        f"{OPNAMES[op]}: exponent {exp_from_raw(aa)} + {exp_from_raw(ab)} overflows"
                    )
                    state.flags.append("exponent-overflow")
                state.Ae = ae
                state.Be = adder_sum(ba, bb, MANT_WIDTH)[0]
                state.Aa = state.Ab = state.Ba = state.Bb = 0
                cycles += 1
                if step.exp_id is not None:
                    exp_ids.append(step.exp_id)
                    if step.counter == 5:
                        res.align_shifts += 1
                    elif step.counter:
                        res.renorm_shifts += 1
                if step.mant_id is not None:
                    mant_ids.append(step.mant_id)

                if flags & _F_SLOW:
                    if flags & _F_S1:
                        state.S1 = 1
                    if flags & _F_S3:
                        state.S3 = 1
                    if flags & _F_SHIFT:
                        state.mm = shift_register_bit(state)
                    if flags & _F_LEVER:
                        state.lever -= 1
                if on_cycle is not None:
                    res.cycles = cycles
                    on_cycle(state, step.exp_id, step.mant_id)
                if flags & _F_ADVANCE:
                    state.Ph = (state.Ph + 1) & 31
                if flags & _F_FINISH:
                    return
        finally:
            res.cycles = cycles

    def _eval_route(self, fn, state, res):
        try:
            return fn(state)
        except ExponentOverflow:
            if self.strict:
                raise
            res.overflow = True
            state.flags.append("exponent-overflow")
            return 1 << (EXP_BITS - 1)

    def _suspend(self, state, flags, res):
        """Run a multiplication of (Ae, Be) by a decimal constant, then resume."""
        if flags & _F_TENTH:
            k = 1
            state.lever += 1
        else:
            if state.Be == 0 or state.Be >> _SIGN_BIT:
                raise ZeroUnsupported("cannot display a zero mantissa")
            k = _decimal_exponent(_value(state))
            if k == 0:
                k = 1 if _value(state) >= 10 else -1
            state.arrow += k
        const = decimal_constant(k)
        saved = state.copy()
        keep = ~((1 << (-MANT_LOW - FRAC_BITS)) - 1)
        state.Af, state.Bf = state.Ae, state.Be & keep & MANT_MASK
        state.Ag, state.Bg, _ = word_to_regs(const)
        state.serial_count = 0
        state.mm = 0
        state.S0 = state.S1 = 0
        sub = OpResult("MUL")
        self._run(state, OPCODES["MUL"], sub)
        ae, be = state.Ae, state.Be
        for name in ("Af", "Ag", "Bf", "Bg", "S0", "S1", "S3", "mm", "serial_count", "Op", "Ph"):
            setattr(state, name, getattr(saved, name))
        state.Ae, state.Be = ae, be
        res.cycles += sub.cycles
        res.suspended_cycles += sub.cycles
        res.overflow = res.overflow or sub.overflow


def run_add_sub(F: Word24, G: Word24, op: str = "add", strict: bool = True) -> tuple:
    """Convenience: F op G on a fresh processor; returns (result word, OpResult)."""
    return _run_binary(F, G, op.upper(), strict)


def run_mul(F: Word24, G: Word24, strict: bool = True) -> tuple:
    return _run_binary(F, G, "MUL", strict)


def run_div(F: Word24, G: Word24, strict: bool = True) -> tuple:
    return _run_binary(F, G, "DIV", strict)


def _fresh_with(F, G):
    st = ProcessorState()
    st.Ag, st.Bg, st.sign_G = word_to_regs(G)
    st.Af, st.Bf, st.sign_F = word_to_regs(F)
    st.f_loaded = st.g_loaded = True
    return st


def _run_binary(F, G, opname, strict):
    st = _fresh_with(F, G)
    res = Sequencer(strict=strict).execute(st, opname)
    return st.word("F"), res


def run_dec2bin(digits, lever: int = 0, sign: int = 0, strict: bool = True) -> tuple:
    """Panel digits (Za3, Za2, Za1, Za0) to a word; returns (word, OpResult)."""
    st = ProcessorState()
    st.Za = tuple(digits)
    st.lever = lever
    st.sign_result = sign
    res = Sequencer(strict=strict).execute(st, "READ")
    return st.word("G"), res


def run_bin2dec(F: Word24, strict: bool = True) -> tuple:
    """Word to display; returns ((d3, d2, d1, d0), arrow, sign, OpResult)."""
    st = ProcessorState()
    st.Af, st.Bf, st.sign_F = word_to_regs(F)
    st.f_loaded = True
    res = Sequencer(strict=strict).execute(st, "DISP")
    return tuple(st.digits), st.arrow + 1, st.sign_F, res


__all__ = [
    "Criterion", "MicroprogramTable", "Sequencer", "default_table", "OpResult", "TABLE", "OPCODES",
    "run_add_sub", "run_mul", "run_div", "run_dec2bin", "run_bin2dec", "decimal_constant",
    "effective_addition", "addsub_sign", "product_sign", "exp_to_raw",
]
