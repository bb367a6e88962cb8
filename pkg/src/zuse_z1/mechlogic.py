"""Mechanical relay logic at the level of plates and engagements.

A relay passes the motion of its actor to its actuated plate when its control
plate allows it.  The actor is either the cycling unit during one engagement
or another plate that is itself moving in that engagement; the second case is
how a carry travels along a chain of closed relays.  Plates driven by several
relays OR their motions.

One machine cycle is the four engagements in the order IV, I, II, III.
Operands are latched in IV.  A relay may only be controlled by a plate that
settled in an earlier engagement of the same cycle.
"""

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, List, Optional

from .errors import CircuitError

CYCLE_ORDER = ("IV", "I", "II", "III")
DIRECTIONS = "NESW"
ENGAGEMENT_DIRECTION = {"I": "N", "II": "E", "III": "S", "IV": "W"}

NORMAL = "normal"
NEGATING = "negating"


def rotate90(direction: str) -> str:
    return DIRECTIONS[(DIRECTIONS.index(direction) + 1) % 4]


@dataclass(frozen=True)
class MechRelay:
    id: str
    control: str
    actuated: str
    engagement: str
    actor: Optional[str] = None  # None: driven by the cycling unit
    polarity: str = NORMAL
    alternate: Optional[str] = None  # second actuated plate, moves when the first does not

    @property
    def initial_state(self) -> str:
        return "closed" if self.polarity == NEGATING else "open"

    @property
    def kind(self) -> str:
        k = "relay" if self.alternate is None else "switch2"
        return f"{k}/{self.polarity}"


def eval_relay(r: MechRelay, control: int, actor_active: bool) -> int:
    """Motion on the primary actuated plate."""
    passes = bool(control) != (r.polarity == NEGATING)
    return int(passes and actor_active)


def _alternate(r: MechRelay, control: int, actor_active: bool) -> int:
    return int(actor_active and not eval_relay(r, control, True))


@dataclass
class MechCircuit:
    inputs: List[str]
    relays: List[MechRelay]
    outputs: List[str]
    directions: Dict[str, tuple] = field(init=False, repr=False)

    def __post_init__(self):
        self._check()

    def _check(self):
        stage = {name: 0 for name in self.inputs}  # index into CYCLE_ORDER
        drivers = defaultdict(list)
        for r in self.relays:
            if r.engagement not in CYCLE_ORDER[1:]:
                raise CircuitError(f"{r.id}: relays move in engagements I-III, got {r.engagement}")
            for plate in filter(None, (r.actuated, r.alternate)):
                if plate in self.inputs:
                    raise CircuitError(f"{r.id}: drives input plate {plate}")
                drivers[plate].append(r)
        for plate, rs in drivers.items():
            engs = {r.engagement for r in rs}
            if len(engs) != 1:
                raise CircuitError(f"plate {plate} driven in several engagements {sorted(engs)}")
            stage[plate] = CYCLE_ORDER.index(engs.pop())
        for r in self.relays:
            here = CYCLE_ORDER.index(r.engagement)
            if r.control not in stage:
                raise CircuitError(f"{r.id}: control plate {r.control} has no source")
            if stage[r.control] >= here:
                raise CircuitError(
                    f"{r.id}: control {r.control} settles in engagement "
                    f"{CYCLE_ORDER[stage[r.control]]}, not before {r.engagement}"
                )
            if r.actor is not None:
                if r.actor not in stage:
                    raise CircuitError(f"{r.id}: actor plate {r.actor} has no source")
                if stage[r.actor] != here:
                    raise CircuitError(f"{r.id}: actor {r.actor} does not move in {r.engagement}")
        for name in self.outputs:
            if name not in stage:
                raise CircuitError(f"output {name} is never driven")
        self._order = self._topo(drivers)
        self._by_eng = defaultdict(list)
        for r in self._order:
            self._by_eng[r.engagement].append(r)
        self.directions = self._assign_directions(drivers)

    def _topo(self, drivers):
        order, state = [], {}

        def visit(r, path):
            if state.get(r.id) == 2:
                return
            if state.get(r.id) == 1:
                raise CircuitError(f"motion loop through {' -> '.join(path + [r.id])}")
            state[r.id] = 1
            if r.actor is not None:
                for d in drivers.get(r.actor, ()):
                    visit(d, path + [r.id])
            state[r.id] = 2
            order.append(r)

        for r in self.relays:
            visit(r, [])
        return order

    def _assign_directions(self, drivers):
        plate_dir, out = {}, {}
        for r in self._order:
            if r.actor is None:
                actor_dir = ENGAGEMENT_DIRECTION[r.engagement]
            else:
                actor_dir = plate_dir[r.actor]
            moved = rotate90(actor_dir)
            out[r.id] = (actor_dir, moved)
            for plate in filter(None, (r.actuated, r.alternate)):
                plate_dir.setdefault(plate, moved)
        return out

    def evaluate(self, values: Dict[str, int]) -> Dict[str, int]:
        """Run one full cycle; returns the settled value of every plate."""
        return self.evaluate_lanes({n: int(v) & 1 for n, v in values.items()}, 1)

    def evaluate_lanes(self, values: Dict[str, int], lanes: int) -> Dict[str, int]:
        """Evaluate ``lanes`` independent input sets at once.

        Every plate value is an integer whose bit k belongs to input set k, so
        each relay acts on all sets with a few bitwise operations.
        """
        missing = [n for n in self.inputs if n not in values]
        if missing:
            raise CircuitError(f"unlatched inputs: {missing}")
        full = (1 << lanes) - 1
        plates = {n: values[n] & full for n in self.inputs}
        for r in self.relays:
            for plate in filter(None, (r.actuated, r.alternate)):
                plates.setdefault(plate, 0)
        for eng in CYCLE_ORDER[1:]:
            for r in self._by_eng[eng]:
                active = full if r.actor is None else plates[r.actor]
                ctl = plates[r.control]
                passes = ctl ^ full if r.polarity == NEGATING else ctl
                plates[r.actuated] |= passes & active
                if r.alternate is not None:
                    plates[r.alternate] |= active & ~passes & full
        return plates

    def netlist(self) -> str:
        lines = []
        for r in self.relays:
            ins = r.control if r.actor is None else f"{r.control},{r.actor}"
            outs = r.actuated if r.alternate is None else f"{r.actuated},{r.alternate}"
            lines.append(f"{r.id}\t{r.kind}\t{r.engagement}\t{ins}\t{outs}")
        return "\n".join(lines) + "\n"


def build_gate(kind: str) -> MechCircuit:
    """Two-input (one for NOT) gate with inputs ``x``, ``y`` and output ``out``."""
    kind = kind.upper()
    if kind == "NOT":
        return MechCircuit(["x"], [MechRelay("n1", "x", "out", "I", polarity=NEGATING)], ["out"])
    if kind == "AND":
        relays = [
            MechRelay("a1", "x", "m", "I"),
            MechRelay("a2", "y", "out", "I", actor="m"),
        ]
    elif kind == "OR":
        relays = [MechRelay("o1", "x", "out", "I"), MechRelay("o2", "y", "out", "I")]
    elif kind == "XOR":
        relays = [
            MechRelay("x1", "x", "x1", "I", alternate="x0"),
            MechRelay("x2", "y", "out", "I", actor="x1", polarity=NEGATING),
            MechRelay("x3", "y", "out", "I", actor="x0"),
        ]
    else:
        raise ValueError(f"unknown gate kind {kind!r}")
    return MechCircuit(["x", "y"], relays, ["out"])


def _cell_relays(i: int) -> List[MechRelay]:
    a, b = f"a{i}", f"b{i}"
    p, g, c_in, c_out = f"p{i}", f"g{i}", f"c{i}", f"c{i + 1}"
    return [
        # engagement I: XOR and AND of the operand bits
        MechRelay(f"cell{i}.g1", a, f"a1_{i}", "I", alternate=f"a0_{i}"),
        MechRelay(f"cell{i}.g2", b, p, "I", actor=f"a1_{i}", polarity=NEGATING),
        MechRelay(f"cell{i}.g3", b, p, "I", actor=f"a0_{i}"),
        MechRelay(f"cell{i}.g4", b, g, "I", actor=f"a1_{i}"),
        # engagement II: generate, propagate along the XOR chain, lift p upward
        MechRelay(f"cell{i}.g5", g, c_out, "II"),
        MechRelay(f"cell{i}.g6", p, c_out, "II", actor=c_in),
        MechRelay(f"cell{i}.g7", p, f"pu{i}", "II"),
        # engagement III: final XOR with the incoming carry
        MechRelay(f"cell{i}.g8", f"pu{i}", f"p1_{i}", "III", alternate=f"p0_{i}"),
        MechRelay(f"cell{i}.g9a", c_in, f"e{i}", "III", actor=f"p1_{i}", polarity=NEGATING),
        MechRelay(f"cell{i}.g9b", c_in, f"e{i}", "III", actor=f"p0_{i}"),
    ]


def build_adder(width: int) -> MechCircuit:
    """Chain of ``width`` adder cells; inputs a<i>, b<i>, cin; outputs e<i> and c<width>."""
    if width < 1:
        raise ValueError("width must be at least 1")
    relays = [MechRelay("cin", "cin", "c0", "II")]
    for i in range(width):
        relays.extend(_cell_relays(i))
    inputs = [f"a{i}" for i in range(width)] + [f"b{i}" for i in range(width)] + ["cin"]
    outputs = [f"e{i}" for i in range(width)] + [f"c{width}"]
    return MechCircuit(inputs, relays, outputs)


def build_adder_cell() -> MechCircuit:
    return build_adder(1)


def run_adder_exhaustive(width: int) -> dict:
    """All 4^width operand pairs through one adder chain, one lane per pair.

    Lane k holds a = k >> width, b = k & (2^width - 1).  Returns per-lane
    ``sum`` and ``carry_out`` lists.
    """
    circuit = build_adder(width)
    lanes = 1 << (2 * width)
    full = (1 << lanes) - 1

    def column(j):
        # lanes whose index has bit j set: blocks of 2^j ones every 2^(j+1) lanes
        period = 1 << (j + 1)
        block = ((1 << (1 << j)) - 1) << (1 << j)
        return block * (full // ((1 << period) - 1))

    values = {"cin": 0}
    for i in range(width):
        values[f"a{i}"], values[f"b{i}"] = column(width + i), column(i)
    plates = circuit.evaluate_lanes(values, lanes)

    def bits(mask):
        return [int(ch) for ch in reversed(format(mask, f"0{lanes}b"))]

    sums = [0] * lanes
    for i in range(width):
        for k, bit in enumerate(bits(plates[f"e{i}"])):
            sums[k] |= bit << i
    return {"sum": sums, "carry_out": bits(plates[f"c{width}"])}


def run_adder(circuit: MechCircuit, width: int, a: int, b: int, carry_in: int = 0) -> dict:
    """Evaluate an adder chain on integers; returns xor/and/carry/sum words and carry-out."""
    values = {"cin": carry_in}
    for i in range(width):
        values[f"a{i}"] = (a >> i) & 1
        values[f"b{i}"] = (b >> i) & 1
    plates = circuit.evaluate(values)

    def word(prefix):
        return sum(plates[f"{prefix}{i}"] << i for i in range(width))

    return {
        "xor": word("p"),
        "and": word("g"),
        "carry": word("c"),
        "sum": word("e"),
        "carry_out": plates[f"c{width}"],
    }
