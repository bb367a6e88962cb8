import random

import pytest

from zuse_z1.errors import AddressRangeError, RangeError
from zuse_z1.memory import MemoryUnit, decode_address, format_word_line, parse_dump
from zuse_z1.numerics import Word24, pack


def rand_word(rng):
    return Word24(rng.getrandbits(1), rng.randint(-64, 63), rng.getrandbits(16))


def test_decode_address():
    assert decode_address(0) == (0, 0)
    assert decode_address(0b101011) == (5, 3)
    assert decode_address(63) == (7, 7)
    with pytest.raises(AddressRangeError):
        decode_address(64)
    with pytest.raises(AddressRangeError):
        decode_address(16, capacity=16)


def test_write_then_read_every_address():
    rng = random.Random(3)
    mem = MemoryUnit()
    words = {a: rand_word(rng) for a in range(64)}
    for a, w in words.items():
        mem.write(a, w)
    for a, w in words.items():
        assert mem.read(a) == w
        assert mem.read(a) == w  # the read restored the cell


def test_fresh_memory_reads_zero_word():
    assert MemoryUnit().read(7).bits == 0


def test_small_memory_rejects_high_addresses():
    mem = MemoryUnit(16)
    mem.write(15, pack(0, 1, 0))
    with pytest.raises(AddressRangeError):
        mem.write(16, pack(0, 1, 0))
    with pytest.raises(AddressRangeError):
        mem.read(40)
    with pytest.raises(ValueError):
        MemoryUnit(32)


def test_destructive_read_is_visible_to_the_hook():
    seen = []
    mem = MemoryUnit(step_hook=lambda stage, addr, snap: seen.append((stage, addr, snap[addr])))
    w = pack(1, -3, 0xBEEF)
    mem.write(9, w)
    assert mem.read(9) == w
    assert seen == [("sensed", 9, 0), ("restored", 9, w.bits)]


def test_cycle_counting():
    mem = MemoryUnit()
    mem.write(1, pack(0, 0, 1))
    mem.read(1)
    mem.peek(1)
    assert mem.cycles == 2


def test_banks_hold_the_three_bytes():
    mem = MemoryUnit()
    w = pack(1, 5, 0xA55A)
    mem.write(0o12, w)
    layer, word = 1, 2
    assert [bank[layer][word] for bank in mem.banks] == [w.bits >> 16, 0xA5, 0x5A]


def test_dump_text_round_trip():
    rng = random.Random(11)
    mem = MemoryUnit(16)
    for a in range(16):
        mem.write(a, rand_word(rng))
    text = mem.dump()
    assert len(text.splitlines()) == 16
    other = MemoryUnit(16)
    other.load_text(text)
    assert other.snapshot() == mem.snapshot()


def test_dump_line_format():
    assert format_word_line(3, pack(0, -1, 0x8001)) == "03: 0 1111111 10000000 00000001"


def test_parse_dump_errors_and_comments():
    assert list(parse_dump(["# header", "", "05: 1 0000001 00000000 00000011  # note"])) == [
        (5, pack(1, 1, 3))
    ]
    with pytest.raises(RangeError, match="line 1"):
        list(parse_dump(["5: 1 2 3"]))
