"""Cycle-level emulator of a mechanical binary floating-point computer.

The machine reads its program from punched tape, keeps 64 words of 24 bits in
a mechanical memory, and computes with a microcoded processor built from two
adders (exponent and mantissa).  Modules, from the bottom up: ``numerics``
(number formats), ``alu`` (adder and shifters), ``mechlogic`` (relay level),
``memory``, ``datapath`` (registers and routing), ``microcode`` (criterion
table and sequencer), ``machine`` (tape, decoder, panels, trace),
``asmtool`` and ``cli``.
"""

from .errors import (
    AddressRangeError,
    AssemblyError,
    CircuitError,
    DatapathOverflow,
    ExponentOverflow,
    IllegalInstruction,
    PanelError,
    RangeError,
    RegisterEmpty,
    SequencerError,
    Z1Error,
    ZeroUnsupported,
)
from .numerics import Word24, pack, unpack, value_of
from .machine import DisplayResult, Instruction, Machine, PanelInput, decode, encode, run
from .microcode import run_add_sub, run_bin2dec, run_dec2bin, run_div, run_mul
from .asmtool import assemble, disassemble

__version__ = "0.1.0"

__all__ = [
    "AddressRangeError", "AssemblyError", "CircuitError", "DatapathOverflow",
    "ExponentOverflow", "IllegalInstruction", "PanelError", "RangeError",
    "RegisterEmpty", "SequencerError", "Z1Error", "ZeroUnsupported",
    "Word24", "pack", "unpack", "value_of",
    "DisplayResult", "Instruction", "Machine", "PanelInput", "decode", "encode", "run",
    "run_add_sub", "run_bin2dec", "run_dec2bin", "run_div", "run_mul",
    "assemble", "disassemble",
]
