"""Mechanical word memory: three 8-bit banks of 8 layers x 8 words."""

import re
from typing import Callable, Iterable, List, Optional

from .errors import AddressRangeError, RangeError
from .numerics import Word24

LAYERS = 8
WORDS_PER_LAYER = 8
BANKS = ("10a", "10b", "10c")  # sign+exponent, fraction high byte, fraction low byte


def decode_address(addr: int, capacity: int = 64) -> tuple:
    """6-bit address to (layer, word): high three bits pick the layer."""
    if not 0 <= addr < capacity:
        raise AddressRangeError(f"address {addr} outside 0..{capacity - 1}")
    return addr >> 3, addr & 7


def _split(w: Word24) -> tuple:
    bits = w.bits
    return (bits >> 16) & 0xFF, (bits >> 8) & 0xFF, bits & 0xFF


class MemoryUnit:
    """``capacity`` is 64 (reconstruction) or 16 (original machine).

    ``step_hook``, if set, is called as ``hook(stage, addr, snapshot)`` during a
    read with stage ``"sensed"`` (cell cleared) and then ``"restored"``.
    """

    def __init__(self, capacity: int = 64, step_hook: Optional[Callable] = None):
        if capacity not in (16, 64):
            raise ValueError("capacity must be 16 or 64 words")
        self.capacity = capacity
        self.step_hook = step_hook
        self.banks = [[[0] * WORDS_PER_LAYER for _ in range(LAYERS)] for _ in BANKS]
        self.cycles = 0

    def _cell(self, layer, word):
        return tuple(bank[layer][word] for bank in self.banks)

    def read(self, addr: int) -> Word24:
        layer, word = decode_address(addr, self.capacity)
        sensed = self._cell(layer, word)
        # sensing pushes the pins out of their positions; the cell is empty until restored
        for bank in self.banks:
            bank[layer][word] = 0
        if self.step_hook:
            self.step_hook("sensed", addr, self.snapshot())
        for bank, byte in zip(self.banks, sensed):
            bank[layer][word] = byte
        if self.step_hook:
            self.step_hook("restored", addr, self.snapshot())
        self.cycles += 1
        hi, mid, lo = sensed
        return Word24.from_bits((hi << 16) | (mid << 8) | lo)

    def write(self, addr: int, w: Word24) -> None:
        layer, word = decode_address(addr, self.capacity)
        for bank, byte in zip(self.banks, _split(w)):
            bank[layer][word] = byte
        self.cycles += 1

    def peek(self, addr: int) -> Word24:
        """Inspection without a machine cycle."""
        layer, word = decode_address(addr, self.capacity)
        hi, mid, lo = self._cell(layer, word)
        return Word24.from_bits((hi << 16) | (mid << 8) | lo)

    def snapshot(self) -> List[int]:
        """24-bit contents of every address, as a copy."""
        return [self.peek(a).bits for a in range(self.capacity)]

    def dump(self) -> str:
        return "".join(format_word_line(a, self.peek(a)) + "\n" for a in range(self.capacity))

    def load_text(self, text: str) -> None:
        for addr, w in parse_dump(text.splitlines()):
            layer, word = decode_address(addr, self.capacity)
            for bank, byte in zip(self.banks, _split(w)):
                bank[layer][word] = byte


def format_word_line(addr: int, w: Word24) -> str:
    exp = w.exponent & 0x7F
    return f"{addr:02d}: {w.sign} {exp:07b} {w.fraction >> 8:08b} {w.fraction & 0xFF:08b}"


_LINE = re.compile(r"^\s*(\d+)\s*:\s*([01])\s+([01]{7})\s+([01]{8})\s+([01]{8})\s*$")


def parse_dump(lines: Iterable[str]):
    for n, line in enumerate(lines, 1):
        line = line.split("#", 1)[0]
        if not line.strip():
            continue
        m = _LINE.match(line)
        if not m:
            raise RangeError(f"memory dump line {n}: cannot parse {line.strip()!r}")
        addr = int(m.group(1))
        bits = (int(m.group(2)) << 23) | (int(m.group(3), 2) << 16)
        bits |= (int(m.group(4), 2) << 8) | int(m.group(5), 2)
        yield addr, Word24.from_bits(bits)
