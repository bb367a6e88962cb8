from fractions import Fraction

import pytest

from conftest import word
from zuse_z1.errors import (
    AddressRangeError,
    IllegalInstruction,
    PanelError,
    RegisterEmpty,
    ZeroUnsupported,
)
from zuse_z1.machine import (
    DisplayResult,
    Instruction,
    Machine,
    PanelInput,
    ScriptedInput,
    decode,
    encode,
    parse_input_line,
    run,
    sign_unit,
)
from zuse_z1.memory import MemoryUnit
from zuse_z1.numerics import ZERO_WORD, value_of

L, S = (lambda a: Instruction("LOAD", a)), (lambda a: Instruction("STORE", a))
ADD, SUB, MUL, DIV, READ, DISP = (Instruction(op) for op in ("ADD", "SUB", "MUL", "DIV", "READ", "DISP"))


def machine_with(values, tape, **kw):
    mem = MemoryUnit(kw.pop("mem_words", 64))
    for addr, v in values.items():
        mem.write(addr, word(v))
    return Machine(tape, memory=mem, **kw)


@pytest.mark.parametrize("byte,text", [
    (0b11_000101, "LOAD 5"),
    (0b10_000000, "STORE 0"),
    (0b01_000010, "MUL"),
    (0b01_000000, "ADD"),
    (0b01_000101, "DISP"),
])
def test_decode_examples(byte, text):
    assert str(decode(byte)) == text
    assert encode(decode(byte)) == byte


@pytest.mark.parametrize("byte", [0, 0b00_111111, 0b01_000110, 0b01_001000, 0b01_111111])
def test_illegal_bytes(byte):
    with pytest.raises(IllegalInstruction):
        decode(byte, tape_pos=3)


def test_all_legal_bytes_round_trip():
    legal = 0
    for b in range(256):
        try:
            i = decode(b)
        except IllegalInstruction:
            continue
        legal += 1
        assert encode(i) == b
    assert legal == 64 + 64 + 6


def test_demo_program():
    m = machine_with({1: 1, 2: 1}, [L(1), L(2), ADD, DISP], trace="instr")
    m.run()
    assert m.outputs == [DisplayResult((2, 0, 0, 0), 1, 0)]
    assert [r.cycles for r in m.trace] == [1, 1, 5, m.trace[3].cycles]
    assert m.cycles == sum(r.cycles for r in m.trace)


def test_empty_tape():
    m = Machine([]).run()
    assert m.cycles == 0 and m.trace == [] and m.processor.f_loaded is False


def test_sub_and_div_take_f_minus_g():
    m = machine_with({0: 3, 1: 5}, [L(1), L(0), SUB, S(2), L(1), L(0), DIV, S(3)])
    m.run()
    assert value_of(m.memory.peek(2)) == 3 - 5
    q = value_of(m.memory.peek(3))
    assert abs(q - Fraction(3, 5)) < Fraction(1, 1 << 15)


def test_results_chain():
    # ((1 + 2) * 4) stored at 9
    m = machine_with({1: 1, 2: 2, 3: 4}, [L(1), L(2), ADD, L(3), MUL, S(9)]).run()
    assert value_of(m.memory.peek(9)) == 12


def test_third_load_overwrites_f():
    m = machine_with({1: 1, 2: 2, 3: 8}, [L(1), L(2), L(3), ADD, S(0)]).run()
    assert value_of(m.memory.peek(0)) == 9


def test_cycle_costs():
    m = machine_with({1: 3, 2: 5}, [L(1), L(2), MUL, L(2), DIV], trace="instr").run()
    assert [r.cycles for r in m.trace] == [1, 1, 20, 1, 21]
    assert m.cycles == 44


def test_sign_unit_examples():
    assert sign_unit("MUL", 0, 1) == 1
    assert sign_unit("ADD", 1, 1) == 1
    m = machine_with({1: 5, 2: 3}, [L(1), L(2), SUB, DISP]).run()
    assert m.outputs[0].sign == 1  # 3 - 5


def test_read_from_script_then_display():
    script = ScriptedInput(["digits=8743 exp=0 sign=+", "digits=0002 exp=0 sign=-"])
    m = Machine([READ, READ, MUL, DISP], input_provider=script).run()
    assert m.outputs == [DisplayResult((1, 7, 4, 8), 5, 1)]


def test_read_halts_without_provider():
    m = Machine([READ, DISP])
    m.run()
    assert m.halted_for_io and m.pos == 0 and m.cycles == 0
    m.supply_input("digits=12 exp=1 sign=+")
    m.run()
    assert not m.halted_for_io and m.outputs[0] == DisplayResult((1, 2, 0, 0), 3, 0)


def test_disp_shows_g_when_f_empty():
    m = machine_with({4: -0.5}, [L(4), DISP]).run()
    assert m.outputs == [DisplayResult((5, 0, 0, 0), 0, 1)]
    assert not m.processor.f_loaded


def test_cpu_only_loads_zero_words():
    m = machine_with({1: 7, 2: 9}, [L(1), L(2), ADD, DISP], mode="cpu-only").run()
    assert m.outputs == [DisplayResult((2, 0, 0, 0), 1, 0)]
    assert m.processor.word("F") == word(2)


def test_cpu_only_matches_full_without_loads():
    script = ["digits=0003 exp=0 sign=+", "digits=0004 exp=0 sign=+"]
    traces = []
    for mode in ("full", "cpu-only"):
        m = Machine([READ, READ, MUL, DISP], mode=mode, trace="instr",
                    input_provider=ScriptedInput(script)).run()
        traces.append(m.trace_text())
    assert traces[0] == traces[1]


def test_memory_only_mode():
    m = machine_with({1: 3}, [L(1), S(5), ADD, MUL, DISP], mode="memory-only", trace="instr").run()
    assert m.memory.peek(5) == word(3)
    assert [r.cycles for r in m.trace] == [1, 1, 0, 0, 0]
    assert m.outputs == []


def test_store_without_value():
    with pytest.raises(RegisterEmpty):
        Machine([S(0)]).run()


def test_errors_carry_tape_position_and_cycle():
    m = machine_with({1: 1.25}, [L(1), L(1), SUB])
    with pytest.raises(ZeroUnsupported) as info:
        m.run()
    assert info.value.tape_pos == 2
    assert info.value.cycle == 2 + 5
    with pytest.raises(IllegalInstruction) as info:
        Machine(bytes([0b11_000001, 0])).run()
    assert info.value.tape_pos == 1


def test_small_memory_address_error():
    with pytest.raises(AddressRangeError) as info:
        Machine([L(20)], mem_words=16).run()
    assert info.value.tape_pos == 0


def test_permissive_zero_continues_and_flags():
    m = machine_with({1: 1.25}, [L(1), L(1), SUB, DISP], strict_zero=False, trace="instr").run()
    assert m.pos == 4
    assert "FLAG zero-mantissa" in m.trace[2].events


def test_byte_tape_accepted():
    m = machine_with({1: 2, 2: 2}, bytes([0b11_000001, 0b11_000010, 0b01_000010, 0b01_000101])).run()
    assert m.outputs[0] == DisplayResult((4, 0, 0, 0), 1, 0)


def test_input_line_grammar():
    assert parse_input_line("digits=8743 exp=-2 sign=-") == PanelInput((8, 7, 4, 3), -2, 1)
    assert parse_input_line(" digits=5 exp=+3 sign=+ ") == PanelInput((0, 0, 0, 5), 3, 0)
    for bad in ("digits=12345 exp=0 sign=+", "digits=12 exp=0", "digits=ab exp=0 sign=+"):
        with pytest.raises(PanelError):
            parse_input_line(bad)
    with pytest.raises(PanelError):
        ScriptedInput([])()


def test_lever_range_enforced():
    m = Machine([READ], input_provider=lambda: "digits=1 exp=9 sign=+")
    with pytest.raises(PanelError):
        m.run()


def test_cycle_trace_counts_every_cycle():
    m = machine_with({1: 1, 2: 1}, [L(1), L(2), ADD, DISP], trace="cycle").run()
    lines = m.trace_text().splitlines()
    assert len(lines) == m.cycles
    assert [int(ln.split("\t")[0]) for ln in lines] == list(range(1, m.cycles + 1))


def test_run_helper_and_determinism():
    def once():
        mem = MemoryUnit()
        mem.write(1, word(1.5))
        mem.write(2, word(-2.25))
        return run([L(1), L(2), MUL, DISP], memory=mem, trace="cycle").trace_text()

    assert once() == once()


def test_zero_word_constant():
    assert value_of(ZERO_WORD) == 1
