"""Command-line interface: ``zuse-z1 asm|disasm|run|dump-microcode|dump-mem``."""

import argparse
import sys
from pathlib import Path

from . import asmtool
from .errors import Z1Error
from .machine import TRACE_HEADER, Machine, ScriptedInput, parse_input_line
from .memory import MemoryUnit
from .microcode import default_table
from .numerics import value_of


def _write_text(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def load_tape(path) -> bytes:
    """A .z1p tape, or source text which is assembled on the fly."""
    data = Path(path).read_bytes()
    if data.startswith(asmtool.MAGIC):
        return asmtool.from_z1p(data)
    return asmtool.assemble(data.decode())


def cmd_asm(args) -> int:
    src = Path(args.source).read_text()
    tape = asmtool.assemble(src)
    out = args.output or str(Path(args.source).with_suffix(".z1p"))
    asmtool.write_z1p(out, tape)
    return 0


def cmd_disasm(args) -> int:
    _write_text(args.output, asmtool.disassemble(asmtool.read_z1p(args.tape)))
    return 0


def _interactive_input():
    while True:
        sys.stderr.write("READ digits=DDDD exp=E sign=+|- > ")
        sys.stderr.flush()
        line = sys.stdin.readline()
        if not line:
            raise EOFError("no input for READ")
        try:
            return parse_input_line(line)
        except Z1Error as err:
            sys.stderr.write(f"{err}\n")


def cmd_run(args) -> int:
    tape = load_tape(args.tape)
    memory = MemoryUnit(args.mem_words)
    if args.load_mem:
        memory.load_text(Path(args.load_mem).read_text())
    if args.input_script:
        provider = ScriptedInput(Path(args.input_script).read_text().splitlines())
    else:
        provider = _interactive_input
    mode = "cpu-only" if args.cpu_only else "memory-only" if args.memory_only else "full"
    machine = Machine(
        tape, memory=memory, mode=mode, strict_zero=not args.permissive_zero,
        input_provider=provider, output_sink=lambda r: print(r, flush=True), trace=args.trace,
    )
    status = 0
    try:
        machine.run()
    except Z1Error as err:
        print(f"error: {err}", file=sys.stderr)
        status = 1
    if args.trace != "off":
        text = TRACE_HEADER[args.trace] + "\n" + machine.trace_text()
        if args.trace_file:
            Path(args.trace_file).write_text(text)
        else:
            sys.stderr.write(text)
    if args.dump_mem:
        _write_text(args.dump_mem, memory.dump())
    if status == 0:
        print(f"halt: {machine.pos} instructions, {machine.cycles} cycles")
    return status


def cmd_dump_microcode(args) -> int:
    _write_text(args.output, default_table().listing())
    return 0


def cmd_dump_mem(args) -> int:
    memory = MemoryUnit(args.mem_words)
    if args.load_mem:
        memory.load_text(Path(args.load_mem).read_text())
    lines = []
    for line, addr in zip(memory.dump().splitlines(), range(memory.capacity)):
        lines.append(f"{line}  # {float(value_of(memory.peek(addr))):.6g}")
    _write_text(args.output, "".join(ln + "\n" for ln in lines))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="zuse-z1", description="Emulator for a mechanical floating-point computer")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("asm", help="assemble a .z1s source into a .z1p tape")
    a.add_argument("source")
    a.add_argument("-o", "--output")
    a.set_defaults(func=cmd_asm)

    d = sub.add_parser("disasm", help="print the source of a .z1p tape")
    d.add_argument("tape")
    d.add_argument("-o", "--output")
    d.set_defaults(func=cmd_disasm)

    r = sub.add_parser("run", help="run a tape (.z1p or source)")
    r.add_argument("tape")
    r.add_argument("--mem-words", type=int, choices=(16, 64), default=64)
    mode = r.add_mutually_exclusive_group()
    mode.add_argument("--cpu-only", action="store_true", help="memory disconnected; LOAD delivers zero words")
    mode.add_argument("--memory-only", action="store_true", help="processor disconnected")
    zero = r.add_mutually_exclusive_group()
    zero.add_argument("--strict-zero", action="store_true", help="a zero mantissa is an error (default)")
    zero.add_argument("--permissive-zero", action="store_true", help="carry on and flag zero mantissas")
    r.add_argument("--trace", choices=("instr", "cycle", "off"), default="off")
    r.add_argument("--trace-file", help="write the trace here instead of stderr")
    r.add_argument("--dump-mem", metavar="PATH", help="write memory contents after the run ('-' = stdout)")
    r.add_argument("--load-mem", metavar="PATH", help="initial memory contents")
    r.add_argument("--input-script", metavar="PATH", help="answers for READ, one line each")
    r.set_defaults(func=cmd_run)

    m = sub.add_parser("dump-microcode", help="print the criterion table")
    m.add_argument("-o", "--output")
    m.set_defaults(func=cmd_dump_microcode)

    dm = sub.add_parser("dump-mem", help="show a memory file with decimal values")
    dm.add_argument("--load-mem", metavar="PATH")
    dm.add_argument("--mem-words", type=int, choices=(16, 64), default=64)
    dm.add_argument("-o", "--output")
    dm.set_defaults(func=cmd_dump_mem)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (Z1Error, OSError, EOFError, UnicodeDecodeError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
