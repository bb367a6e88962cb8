"""Tape reader, instruction decoder, I/O panels and the instruction-level machine.

Instruction bytes:

    11 aaaaaa   LOAD addr
    10 aaaaaa   STORE addr
    01 000ooo   ooo: 000 ADD, 001 SUB, 010 MUL, 011 DIV, 100 READ, 101 DISP

Every other byte is illegal.  Operands: the first LOAD after an empty G fills G,
the next one F (a further LOAD overwrites F).  SUB and DIV compute F - G and
F / G.  Arithmetic leaves its result in F and frees G, so results chain into
the next operation.  STORE and DISP use F when it holds a value, else G.
"""

import re
from dataclasses import dataclass, field
from typing import Callable, Iterable, List, Optional, Sequence, Union

from .datapath import ProcessorState, compact_state, load_operand
from .errors import IllegalInstruction, PanelError, RegisterEmpty, Z1Error
from .memory import MemoryUnit
from .microcode import (
    OPCODES,
    OPNAMES,
    MicroprogramTable,
    Sequencer,
    addsub_sign,
    effective_addition,
    product_sign,
)
from .numerics import ZERO_WORD

MODES = ("full", "cpu-only", "memory-only")
TRACE_MODES = ("off", "instr", "cycle")
MNEMONICS = ("LOAD", "STORE") + tuple(OPCODES)


@dataclass(frozen=True)
class Instruction:
    op: str
    addr: Optional[int] = None

    def __post_init__(self):
        if self.op not in MNEMONICS:
            raise IllegalInstruction(f"unknown operation {self.op!r}")
        if self.op in ("LOAD", "STORE"):
            if self.addr is None or not 0 <= self.addr < 64:
                raise IllegalInstruction(f"{self.op} needs an address 0..63, got {self.addr}")
        elif self.addr is not None:
            raise IllegalInstruction(f"{self.op} takes no address")

    def __str__(self):
        return self.op if self.addr is None else f"{self.op} {self.addr}"


def encode(instr: Instruction) -> int:
    if instr.op == "LOAD":
        return 0b11000000 | instr.addr
    if instr.op == "STORE":
        return 0b10000000 | instr.addr
    return 0b01000000 | OPCODES[instr.op]


def decode(byte: int, tape_pos: Optional[int] = None) -> Instruction:
    if not 0 <= byte <= 0xFF:
        raise IllegalInstruction(f"tape value {byte} is not a byte", tape_pos=tape_pos)
    cls, low = byte >> 6, byte & 0x3F
    if cls == 0b11:
        return Instruction("LOAD", low)
    if cls == 0b10:
        return Instruction("STORE", low)
    if cls == 0b01 and low in OPNAMES:
        return Instruction(OPNAMES[low])
    raise IllegalInstruction(f"undefined instruction byte {byte:08b}", tape_pos=tape_pos)


def sign_unit(op: str, sign_F: int, sign_G: int, S3: int = 0, S1: int = 1) -> int:
    """Result sign of F op G.

    Products and quotients get the XOR of the operand signs up front.  For
    addition and subtraction the sign follows once the mantissa unit reports
    S1 (the F exponent was not smaller) and S3 (the difference was complemented).
    """
    if op in ("MUL", "DIV"):
        return product_sign(sign_F, sign_G)
    if op in ("ADD", "SUB"):
        s0 = effective_addition(OPCODES[op], sign_F, sign_G)
        return addsub_sign(sign_F, s0, S1, S3)
    raise ValueError(f"{op} has no result sign")


# I/O panels --------------------------------------------------------------------

@dataclass(frozen=True)
class PanelInput:
    """Operator setting of the input panel: digits (Za3..Za0), exponent lever, sign lever."""

    digits: tuple
    exponent: int = 0
    sign: int = 0

    def __post_init__(self):
        if len(self.digits) != 4 or any(not 0 <= d <= 9 for d in self.digits):
            raise PanelError(f"need four digits 0..9, got {self.digits}")
        if self.sign not in (0, 1):
            raise PanelError(f"sign must be 0 or 1, got {self.sign}")

    def __str__(self):
        return (f"digits={''.join(map(str, self.digits))} exp={self.exponent} "
                f"sign={'-' if self.sign else '+'}")


_INPUT_LINE = re.compile(r"^\s*digits=(\d{1,4})\s+exp=([+-]?\d+)\s+sign=([+-])\s*$")


def parse_input_line(line: str) -> PanelInput:
    m = _INPUT_LINE.match(line)
    if not m:
        raise PanelError(f"cannot parse input line {line.strip()!r} (want digits=DDDD exp=E sign=+|-)")
    digits = tuple(int(c) for c in m.group(1).rjust(4, "0"))
    return PanelInput(digits, int(m.group(2)), int(m.group(3) == "-"))


class ScriptedInput:
    """Input provider that replays lines of an input script in order."""

    def __init__(self, lines: Iterable[str]):
        self.entries = [
            parse_input_line(ln) for ln in lines if ln.split("#", 1)[0].strip()
        ]
        self.used = 0

    def __call__(self) -> PanelInput:
        if self.used >= len(self.entries):
            raise PanelError("input script exhausted")
        entry = self.entries[self.used]
        self.used += 1
        return entry


@dataclass(frozen=True)
class DisplayResult:
    digits: tuple
    arrow: int
    sign: int

    def __str__(self):
        d = " ".join(map(str, self.digits))
        return f"{d} ×10^{self.arrow} {'-' if self.sign else '+'}"


# trace -------------------------------------------------------------------------

@dataclass
class TraceRecord:
    tape_pos: int
    instr: Instruction
    cycles: int
    total: int
    registers: str
    events: List[str] = field(default_factory=list)

    def line(self) -> str:
        ev = "; ".join(self.events) or "-"
        return f"{self.tape_pos}\t{self.instr}\t{self.cycles}\t{self.total}\t{self.registers}\t{ev}"


def register_summary(state: ProcessorState) -> str:
    f = str(state.word("F")) if state.f_loaded else "-"
    g = str(state.word("G")) if state.g_loaded else "-"
    return f"F={f} G={g}"


# machine -----------------------------------------------------------------------

class Machine:
    """The complete computer: processor, memory, tape and panels.

    ``input_provider()`` returns a :class:`PanelInput` (or an input-script line)
    for each READ.  Without one, READ halts the machine (``halted_for_io``)
    until :meth:`supply_input` is called.  ``output_sink(result)`` receives
    each DISP.
    """

    def __init__(
        self,
        tape: Union[bytes, Sequence[Instruction]] = (),
        *,
        mem_words: int = 64,
        mode: str = "full",
        strict_zero: bool = True,
        input_provider: Optional[Callable] = None,
        output_sink: Optional[Callable] = None,
        trace: str = "off",
        memory: Optional[MemoryUnit] = None,
        table: Optional[MicroprogramTable] = None,
    ):
        if mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if trace not in TRACE_MODES:
            raise ValueError(f"trace must be one of {TRACE_MODES}")
        self.tape = list(tape)
        self.pos = 0
        self.mode = mode
        self.strict_zero = strict_zero
        self.processor = ProcessorState()
        self.memory = memory if memory is not None else MemoryUnit(mem_words)
        self.input_provider = input_provider
        self.output_sink = output_sink
        self.trace_mode = trace
        self.cycles = 0
        self.halted_for_io = False
        self.interface = ZERO_WORD  # word buffer between memory and processor
        self.pending_input: Optional[PanelInput] = None
        self.outputs: List[DisplayResult] = []
        self.trace: List[TraceRecord] = []
        self.cycle_lines: List[str] = []
        self.sequencer = Sequencer(table, strict=strict_zero,
                                   on_cycle=self._on_cycle if trace == "cycle" else None)
        self._cycle_base = 0

    # ---- tape

    @property
    def finished(self) -> bool:
        return self.pos >= len(self.tape)

    def current_instruction(self) -> Instruction:
        item = self.tape[self.pos]
        if isinstance(item, Instruction):
            return item
        return decode(item, tape_pos=self.pos)

    def supply_input(self, entry: Union[PanelInput, str]) -> None:
        if isinstance(entry, str):
            entry = parse_input_line(entry)
        self.pending_input = entry
        self.halted_for_io = False

    # ---- execution

    def step(self) -> Optional[TraceRecord]:
        """Execute one instruction; returns its trace record (None if halted for input)."""
        if self.finished:
            raise IndexError("tape exhausted")
        start = self.cycles
        try:
            instr = self.current_instruction()
            record = TraceRecord(self.pos, instr, 0, start, "")
            cost = self._execute(instr, record)
        except Z1Error as err:
            done = self.sequencer.current.cycles if self.sequencer.current else 0
            raise err.locate(self.pos, self.cycles + done)
        finally:
            self.sequencer.current = None
        if cost is None:
            return None
        self.cycles += cost
        record.cycles, record.total = cost, self.cycles
        record.registers = register_summary(self.processor)
        if self.processor.flags:
            record.events.extend(f"FLAG {f}" for f in self.processor.flags)
            self.processor.flags.clear()
        self.pos += 1
        if self.trace_mode != "off":
            self.trace.append(record)
        return record

    def run(self, max_steps: Optional[int] = None) -> "Machine":
        """Run to the end of the tape, a halt for input, or ``max_steps`` instructions."""
        n = 0
        while not self.finished and (max_steps is None or n < max_steps):
            if self.step() is None:
                break
            n += 1
        return self

    def _execute(self, instr: Instruction, record: TraceRecord) -> Optional[int]:
        st = self.processor
        op = instr.op
        if op == "LOAD":
            if self.mode == "cpu-only":
                word = ZERO_WORD
                record.events.append(f"interface->{load_operand(st, word)} (memory off)")
            elif self.mode == "memory-only":
                self.interface = self.memory.read(instr.addr)
                record.events.append(f"mem[{instr.addr}]->interface")
            else:
                word = self.memory.read(instr.addr)
                record.events.append(f"mem[{instr.addr}]->{load_operand(st, word)}")
            self._cycle_line(instr, "-", "-")
            return 1
        if op == "STORE":
            if self.mode == "memory-only":
                word, src = self.interface, "interface"
            else:
                src = "F" if st.f_loaded else "G" if st.g_loaded else None
                if src is None:
                    raise RegisterEmpty("STORE with no value in F or G")
                word = st.word(src)
            if self.mode == "cpu-only":
                record.events.append(f"{src}->interface (memory off)")
            else:
                self.memory.write(instr.addr, word)
                record.events.append(f"{src}->mem[{instr.addr}] {word}")
            self._cycle_line(instr, "-", "-")
            return 1
        if self.mode == "memory-only":
            record.events.append("processor off")
            return 0
        self._cycle_base = self.cycles
        self._cycle_instr = instr
        if op == "READ":
            return self._read(record)
        if op == "DISP":
            return self._display(record)
        res = self.sequencer.execute(st, op)
        return res.cycles

    def _read(self, record):
        st = self.processor
        entry = self.pending_input
        if entry is None:
            if self.input_provider is None:
                self.halted_for_io = True
                return None
            entry = self.input_provider()
            if isinstance(entry, str):
                entry = parse_input_line(entry)
        self.pending_input = None
        st.Za, st.lever, st.sign_result = entry.digits, entry.exponent, entry.sign
        target = "F" if st.g_loaded else "G"
        res = self.sequencer.execute(st, "READ")
        record.events.append(f"input {entry} -> {target}")
        return res.cycles

    def _display(self, record):
        st = self.processor
        if not st.f_loaded:
            if not st.g_loaded:
                raise RegisterEmpty("DISP with no value in F or G")
            # show G through the F side without disturbing the register flags
            saved = (st.Af, st.Bf, st.sign_F)
            st.Af, st.Bf, st.sign_F = st.Ag, st.Bg, st.sign_G
            try:
                res = self.sequencer.execute(st, "DISP")
            finally:
                st.Af, st.Bf, st.sign_F = saved
            sign = st.sign_G
        else:
            res = self.sequencer.execute(st, "DISP")
            sign = st.sign_F
        # a flagged zero mantissa leaves the digit columns partly unset
        digits = tuple(st.digits) + (0,) * (4 - len(st.digits))
        out = DisplayResult(digits, st.arrow + 1, sign)
        self.outputs.append(out)
        if self.output_sink is not None:
            self.output_sink(out)
        record.events.append(f"display {out}")
        return res.cycles

    # ---- cycle trace

    def _cycle_line(self, instr, exp_id, mant_id):
        if self.trace_mode == "cycle":
            self.cycle_lines.append(
                f"{self.cycles + 1}\t{self.pos}\t{instr}\t-\t{exp_id}\t{mant_id}\t{compact_state(self.processor)}"
            )

    def _on_cycle(self, state, exp_id, mant_id):
        self._cycle_base += 1
        e = "-" if exp_id is None else exp_id
        m = "-" if mant_id is None else mant_id
        self.cycle_lines.append(
            f"{self._cycle_base}\t{self.pos}\t{self._cycle_instr}\t{state.Ph}\t{e}\t{m}\t"
            f"{compact_state(state)}"
        )

    def trace_text(self) -> str:
        if self.trace_mode == "cycle":
            return "".join(line + "\n" for line in self.cycle_lines)
        if self.trace_mode == "instr":
            return "".join(r.line() + "\n" for r in self.trace)
        return ""


def run(tape, input_provider=None, output_sink=None, mode="full", **kwargs) -> Machine:
    """Build a machine for ``tape`` and run it to completion."""
    m = Machine(tape, mode=mode, input_provider=input_provider, output_sink=output_sink, **kwargs)
    return m.run()


TRACE_HEADER = {
    "instr": "# pos\tinstruction\tcycles\ttotal\tregisters\tevents",
    "cycle": "# cycle\tpos\tinstruction\tphase\texp_row\tmant_row\tstate",
}
