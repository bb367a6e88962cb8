import itertools

import pytest

from zuse_z1.alu import BitVector, add_anticipating
from zuse_z1.errors import CircuitError
from zuse_z1.mechlogic import (
    MechCircuit,
    MechRelay,
    NEGATING,
    build_adder,
    build_adder_cell,
    build_gate,
    eval_relay,
    rotate90,
    run_adder,
)


@pytest.mark.parametrize("kind,fn", [
    ("AND", lambda x, y: x & y),
    ("OR", lambda x, y: x | y),
    ("XOR", lambda x, y: x ^ y),
])
def test_gate_truth_tables(kind, fn):
    g = build_gate(kind)
    for x, y in itertools.product((0, 1), repeat=2):
        assert g.evaluate({"x": x, "y": y})["out"] == fn(x, y)


def test_not_gate():
    g = build_gate("NOT")
    assert g.evaluate({"x": 0})["out"] == 1
    assert g.evaluate({"x": 1})["out"] == 0


def test_relay_polarity():
    r = MechRelay("r", "c", "o", "I")
    n = MechRelay("n", "c", "o", "I", polarity=NEGATING)
    assert [eval_relay(r, c, True) for c in (0, 1)] == [0, 1]
    assert [eval_relay(n, c, True) for c in (0, 1)] == [1, 0]
    assert eval_relay(n, 0, False) == 0
    assert r.initial_state == "open" and n.initial_state == "closed"


def test_motion_rotates_ninety_degrees():
    assert rotate90("N") == "E" and rotate90("W") == "N"
    g = build_gate("AND")
    actor_dir, moved = g.directions["a1"]
    assert moved == rotate90(actor_dir)
    # the chained relay inherits the direction of its actor plate
    assert g.directions["a2"][0] == moved


def test_control_must_settle_earlier():
    with pytest.raises(CircuitError, match="settles"):
        MechCircuit(["x"], [
            MechRelay("a", "x", "m", "I"),
            MechRelay("b", "m", "out", "I"),
        ], ["out"])


def test_plate_in_two_engagements_rejected():
    with pytest.raises(CircuitError, match="several engagements"):
        MechCircuit(["x"], [
            MechRelay("a", "x", "out", "I"),
            MechRelay("b", "x", "out", "II"),
        ], ["out"])


def test_dangling_output_and_input_drive():
    with pytest.raises(CircuitError):
        MechCircuit(["x"], [MechRelay("a", "x", "m", "I")], ["out"])
    with pytest.raises(CircuitError):
        MechCircuit(["x", "y"], [MechRelay("a", "x", "y", "I")], ["y"])


def test_relays_never_move_in_latch_engagement():
    with pytest.raises(CircuitError):
        MechCircuit(["x"], [MechRelay("a", "x", "o", "IV")], ["o"])


def test_missing_input_value():
    with pytest.raises(CircuitError):
        build_gate("AND").evaluate({"x": 1})


def test_single_cell_all_inputs():
    cell = build_adder_cell()
    for a, b, c in itertools.product((0, 1), repeat=3):
        out = run_adder(cell, 1, a, b, c)
        assert out["sum"] == (a + b + c) & 1
        assert out["carry_out"] == (a + b + c) >> 1


def test_worked_example_at_relay_level():
    out = run_adder(build_adder(5), 5, 0b10111, 0b00001)
    assert out["xor"] == 0b10110
    assert out["and"] == 0b00001
    assert out["carry"] & 0b11111 == 0b01110
    assert out["sum"] == 0b11000


def test_equivalence_with_alu_widths_1_to_6():
    for width in range(1, 7):
        circ = build_adder(width)
        for a in range(1 << width):
            for b in range(1 << width):
                out = run_adder(circ, width, a, b)
                t = add_anticipating(BitVector(a, width), BitVector(b, width))
                assert (out["sum"], out["carry_out"]) == (t.sum.value, t.carry_out)


def test_netlist_lines():
    text = build_adder(2).netlist()
    lines = text.splitlines()
    assert len(lines) == 1 + 2 * 10
    assert all(len(ln.split("\t")) == 5 for ln in lines)
    assert "cell1.g6\trelay/normal\tII\tp1,c1\tc2" in lines


def test_lane_evaluation_matches_single_runs():
    from zuse_z1.mechlogic import run_adder_exhaustive

    width = 3
    batch = run_adder_exhaustive(width)
    circ = build_adder(width)
    for k in range(1 << (2 * width)):
        a, b = k >> width, k & 7
        out = run_adder(circ, width, a, b)
        assert (out["sum"], out["carry_out"]) == (batch["sum"][k], batch["carry_out"][k])
