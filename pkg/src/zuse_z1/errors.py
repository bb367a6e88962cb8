"""Exception hierarchy shared by every part of the emulator."""


class Z1Error(Exception):
    """Base class. Machine-level errors carry ``tape_pos`` and ``cycle`` once known."""

    def __init__(self, message, *, tape_pos=None, cycle=None):
        super().__init__(message)
        self.message = message
        self.tape_pos = tape_pos
        self.cycle = cycle

    def locate(self, tape_pos, cycle):
        if self.tape_pos is None:
            self.tape_pos = tape_pos
        if self.cycle is None:
            self.cycle = cycle
        return self

    def __str__(self):
        where = []
        if self.tape_pos is not None:
            where.append(f"tape position {self.tape_pos}")
        if self.cycle is not None:
            where.append(f"cycle {self.cycle}")
        if where:
            return f"{self.message} ({', '.join(where)})"
        return self.message


class RangeError(Z1Error, ValueError):
    """A field value does not fit its format."""


class ZeroUnsupported(Z1Error):
    """A mantissa became zero; the Z1 has no representation for it."""


class ExponentOverflow(Z1Error):
    """7-bit two's-complement exponent arithmetic left [-64, 63]."""


class DatapathOverflow(Z1Error):
    """A shifter pushed a set bit past the top mantissa position."""


class AddressRangeError(Z1Error, IndexError):
    pass


class IllegalInstruction(Z1Error):
    pass


class SequencerError(Z1Error):
    """The criterion table matched zero or several rows where exactly one was expected."""


class PanelError(Z1Error, ValueError):
    """Invalid operator input (digit outside 0..9, lever outside its range)."""


class RegisterEmpty(Z1Error):
    """An operation needed an operand register that was never loaded."""


class AssemblyError(Z1Error):
    def __init__(self, message, *, line=None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class CircuitError(Z1Error):
    """Invalid mechanical circuit (schedule violation, dangling plate, loop)."""
