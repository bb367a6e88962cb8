"""Assembler and disassembler for tape programs.

Source (``.z1s``): one instruction per line, ``;`` starts a comment, mnemonics
in any case.  Binary tape (``.z1p``): the magic ``Z1P1`` followed by one byte
per instruction.
"""

from typing import Iterable, List

from .errors import AssemblyError, IllegalInstruction
from .machine import Instruction, MNEMONICS, decode, encode

MAGIC = b"Z1P1"
ADDRESS_OPS = ("LOAD", "STORE")


def parse_line(text: str, line: int):
    """One source line to an Instruction, or None for blank/comment lines."""
    code = text.split(";", 1)[0].strip()
    if not code:
        return None
    parts = code.split()
    op = parts[0].upper()
    if op not in MNEMONICS:
        raise AssemblyError(f"unknown mnemonic {parts[0]!r}", line=line)
    args = parts[1:]
    if op in ADDRESS_OPS:
        if len(args) != 1:
            raise AssemblyError(f"{op} takes exactly one address", line=line)
        try:
            addr = int(args[0], 0)
        except ValueError:
            raise AssemblyError(f"bad address {args[0]!r}", line=line) from None
        if not 0 <= addr < 64:
            raise AssemblyError(f"address {addr} out of range 0..63", line=line)
        return Instruction(op, addr)
    if args:
        raise AssemblyError(f"{op} takes no operand", line=line)
    return Instruction(op)


def parse_source(src: str) -> List[Instruction]:
    out = []
    for n, text in enumerate(src.splitlines(), 1):
        instr = parse_line(text, n)
        if instr is not None:
            out.append(instr)
    return out


def assemble(src: str) -> bytes:
    """Source text to tape bytes (without the file magic)."""
    return bytes(encode(i) for i in parse_source(src))


def disassemble(tape: bytes) -> str:
    """Tape bytes to canonical source: uppercase, one instruction per line."""
    lines = []
    for pos, byte in enumerate(tape):
        try:
            lines.append(str(decode(byte, tape_pos=pos)))
        except IllegalInstruction as err:
            raise err.locate(pos, None)
    return "".join(line + "\n" for line in lines)


def canonicalize(src: str) -> str:
    return "".join(f"{i}\n" for i in parse_source(src))


def to_z1p(tape: bytes) -> bytes:
    return MAGIC + bytes(tape)


def from_z1p(data: bytes) -> bytes:
    if not data.startswith(MAGIC):
        raise IllegalInstruction("not a tape file: missing Z1P1 header")
    return data[len(MAGIC):]


def write_z1p(path, tape: bytes) -> None:
    with open(path, "wb") as fh:
        fh.write(to_z1p(tape))


def read_z1p(path) -> bytes:
    with open(path, "rb") as fh:
        return from_z1p(fh.read())


def decode_tape(tape: Iterable[int]) -> List[Instruction]:
    return [decode(b, tape_pos=i) for i, b in enumerate(tape)]
