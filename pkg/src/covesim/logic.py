"""Four-state logic values, fixed-width vectors and multi-driver resolution.

A :class:`LogicVector` stores its bits as three integer masks (known value,
unknown ``X`` and high-impedance ``Z``), so bitwise operations on a 32-bit bus
cost a handful of integer operations instead of a loop over scalars.  Bit
index 0 is the least significant bit; text renders most-significant first.

>>> v = LogicVector.parse("4'b10XZ")
>>> v[3], v[0]
(<LogicScalar.ONE: '1'>, <LogicScalar.Z: 'z'>)
>>> str(v)
'10xz'
>>> (LogicVector.from_int(7, 32) + LogicVector.from_int(5, 32)).to_unsigned()
12
"""

from __future__ import annotations

import enum
import re
from typing import Iterable, Sequence, Union

from covesim.errors import LiteralError, NonCleanError, RangeError, ResolutionError, WidthError


class LogicScalar(enum.Enum):
    ZERO = "0"
    ONE = "1"
    X = "x"
    Z = "z"

    @classmethod
    def from_char(cls, char: str) -> "LogicScalar":
        try:
            return _CHAR_TO_SCALAR[char]
        except KeyError:
            raise LiteralError(f"not a logic character: {char!r}") from None

    def __str__(self) -> str:
        return self.value


# U (uninitialized) and W (weak unknown) from 9-state logic collapse onto X.
_CHAR_TO_SCALAR = {
    "0": LogicScalar.ZERO,
    "1": LogicScalar.ONE,
    "x": LogicScalar.X,
    "X": LogicScalar.X,
    "z": LogicScalar.Z,
    "Z": LogicScalar.Z,
    "u": LogicScalar.X,
    "U": LogicScalar.X,
    "w": LogicScalar.X,
    "W": LogicScalar.X,
}


class DriveStrength(enum.Enum):
    HIGH_IMPEDANCE = 0
    PULL_UP = 1
    STRONG = 2


class BitOp(enum.Enum):
    AND = "and"
    OR = "or"
    XOR = "xor"
    NOT = "not"
    NAND = "nand"
    NOR = "nor"


class ArithOp(enum.Enum):
    ADD = "add"
    SUB = "sub"


ValueLike = Union["LogicVector", int, str]


class LogicVector:
    """Immutable fixed-width vector of 4-state scalars."""

    __slots__ = ("width", "_val", "_x", "_z")

    def __init__(self, width: int, val: int = 0, x: int = 0, z: int = 0):
        if width < 1:
            raise WidthError(f"width must be positive, got {width}")
        mask = (1 << width) - 1
        x &= mask
        z &= mask & ~x
        self.width = width
        self._x = x
        self._z = z
        self._val = val & mask & ~(x | z)

    # construction

    @classmethod
    def from_int(cls, value: int, width: int) -> "LogicVector":
        """Unsigned value, or a negative value stored as two's complement."""
        if value < 0:
            return cls.from_signed(value, width)
        if value >> width:
            raise RangeError(f"{value} does not fit in {width} bits")
        return cls(width, value)

    @classmethod
    def from_signed(cls, value: int, width: int) -> "LogicVector":
        lo, hi = -(1 << (width - 1)), (1 << (width - 1)) - 1
        if not lo <= value <= hi:
            raise RangeError(f"{value} not representable as {width}-bit two's complement")
        return cls(width, value & ((1 << width) - 1))

    @classmethod
    def from_bits(cls, bits: Sequence[LogicScalar]) -> "LogicVector":
        """Build from scalars, index 0 = least significant."""
        val = x = z = 0
        for i, bit in enumerate(bits):
            if bit is LogicScalar.ONE:
                val |= 1 << i
            elif bit is LogicScalar.X:
                x |= 1 << i
            elif bit is LogicScalar.Z:
                z |= 1 << i
        return cls(len(bits), val, x, z)

    @classmethod
    def from_string(cls, text: str) -> "LogicVector":
        """Plain bit string, most significant first (``"10xz"``)."""
        text = text.replace("_", "")
        if not text:
            raise LiteralError("empty bit string")
        return cls.from_bits([LogicScalar.from_char(c) for c in reversed(text)])

    @classmethod
    def parse(cls, text: str) -> "LogicVector":
        """Parse a sized literal such as ``32'hDEAD_BEEF`` or ``4'b10XZ``."""
        m = _LITERAL_RE.fullmatch(text.strip())
        if m is None:
            raise LiteralError(f"malformed vector literal: {text!r}")
        width = int(m.group("width"))
        base = m.group("base").lower()
        digits = m.group("digits").replace("_", "")
        if width < 1:
            raise LiteralError(f"literal width must be positive: {text!r}")
        if not digits:
            raise LiteralError(f"literal has no digits: {text!r}")
        if base == "d":
            if not digits.isdigit():
                raise LiteralError(f"X/Z digits are not allowed in decimal literals: {text!r}")
            return cls.from_int(int(digits), width)
        per_digit = 1 if base == "b" else 4
        bits = []
        for ch in reversed(digits):
            low = ch.lower()
            if low in "xzuw":
                bits.extend([LogicScalar.from_char(low)] * per_digit)
                continue
            try:
                n = int(ch, 2 if base == "b" else 16)
            except ValueError:
                raise LiteralError(f"bad digit {ch!r} in {text!r}") from None
            bits.extend(LogicScalar.ONE if (n >> i) & 1 else LogicScalar.ZERO for i in range(per_digit))
        if len(bits) < width:
            # an unknown leading digit extends, as in Verilog
            fill = bits[-1] if bits[-1] in (LogicScalar.X, LogicScalar.Z) else LogicScalar.ZERO
            bits.extend([fill] * (width - len(bits)))
        elif len(bits) > width:
            if any(b is not LogicScalar.ZERO for b in bits[width:]):
                raise RangeError(f"literal {text!r} does not fit in {width} bits")
            bits = bits[:width]
        return cls.from_bits(bits)

    @classmethod
    def all_x(cls, width: int) -> "LogicVector":
        return cls(width, x=(1 << width) - 1)

    @classmethod
    def all_z(cls, width: int) -> "LogicVector":
        return cls(width, z=(1 << width) - 1)

    @classmethod
    def coerce(cls, value: ValueLike, width: int) -> "LogicVector":
        """Turn an int, literal string or vector into a vector of ``width`` bits."""
        if isinstance(value, LogicVector):
            if value.width != width:
                raise WidthError(f"expected {width} bits, got {value.width}")
            return value
        if isinstance(value, bool):
            value = int(value)
        if isinstance(value, int):
            return cls.from_int(value, width)
        if isinstance(value, LogicScalar):
            return cls.coerce(cls.from_bits([value]), width)
        if isinstance(value, str):
            vec = cls.parse(value) if "'" in value else cls.from_string(value)
            return cls.coerce(vec, width)
        raise TypeError(f"cannot build a logic vector from {type(value).__name__}")

    # inspection

    @property
    def mask(self) -> int:
        return (1 << self.width) - 1

    @property
    def bits(self) -> tuple:
        return tuple(self[i] for i in range(self.width))

    @property
    def is_clean(self) -> bool:
        return not (self._x | self._z)

    @property
    def has_x(self) -> bool:
        return bool(self._x)

    @property
    def has_z(self) -> bool:
        return bool(self._z)

    @property
    def unknown_mask(self) -> int:
        return self._x | self._z

    def __len__(self) -> int:
        return self.width

    def __getitem__(self, index: int) -> LogicScalar:
        if index < 0:
            index += self.width
        if not 0 <= index < self.width:
            raise IndexError(index)
        bit = 1 << index
        if self._x & bit:
            return LogicScalar.X
        if self._z & bit:
            return LogicScalar.Z
        return LogicScalar.ONE if self._val & bit else LogicScalar.ZERO

    def to_unsigned(self) -> int:
        if not self.is_clean:
            raise NonCleanError(f"vector {self.to_literal()} contains X/Z bits")
        return self._val

    def to_signed(self) -> int:
        val = self.to_unsigned()
        if val >> (self.width - 1):
            val -= 1 << self.width
        return val

    __int__ = to_unsigned
    __index__ = to_unsigned

    def __eq__(self, other: object) -> bool:
        if isinstance(other, LogicVector):
            return (self.width, self._val, self._x, self._z) == (other.width, other._val, other._x, other._z)
        if isinstance(other, int) and not isinstance(other, bool):
            return self.is_clean and self._val == other
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.width, self._val, self._x, self._z))

    def __str__(self) -> str:
        return "".join(str(self[i]) for i in reversed(range(self.width)))

    def __repr__(self) -> str:
        return f"LogicVector({self.to_literal()!r})"

    def to_literal(self, base: str = "h") -> str:
        """Render as ``<width>'<base><digits>``; hex digits with mixed unknowns show ``x``."""
        if base == "b":
            return f"{self.width}'b{self}"
        if base == "d":
            return f"{self.width}'d{self.to_unsigned()}"
        if base != "h":
            raise ValueError(f"unknown base {base!r}")
        digits = []
        for lo in range(0, self.width, 4):
            n = min(4, self.width - lo)
            m = ((1 << n) - 1) << lo
            if self._z & m == m:
                digits.append("z")
            elif (self._x | self._z) & m:
                digits.append("x")
            else:
                digits.append(format((self._val & m) >> lo, "x"))
        return f"{self.width}'h{''.join(reversed(digits))}"

    # operators

    def __and__(self, other: "LogicVector") -> "LogicVector":
        return bitwise(BitOp.AND, self, other)

    def __or__(self, other: "LogicVector") -> "LogicVector":
        return bitwise(BitOp.OR, self, other)

    def __xor__(self, other: "LogicVector") -> "LogicVector":
        return bitwise(BitOp.XOR, self, other)

    def __invert__(self) -> "LogicVector":
        return bitwise(BitOp.NOT, self)

    def __add__(self, other: "LogicVector") -> "LogicVector":
        return arith(ArithOp.ADD, self, other)

    def __sub__(self, other: "LogicVector") -> "LogicVector":
        return arith(ArithOp.SUB, self, other)


_LITERAL_RE = re.compile(r"(?P<width>\d+)'(?P<base>[bBhHdD])(?P<digits>[0-9a-fA-FxXzZuUwW_]*)")


def _check_widths(lhs: LogicVector, rhs: LogicVector) -> None:
    if lhs.width != rhs.width:
        raise WidthError(f"operand widths differ: {lhs.width} vs {rhs.width}")


def bitwise(op: BitOp, lhs: LogicVector, rhs: LogicVector | None = None) -> LogicVector:
    """Per-bit gate with X propagation; Z inputs behave as X and outputs are never Z."""
    width = lhs.width
    mask = lhs.mask
    lu = lhs._x | lhs._z
    if op is BitOp.NOT:
        if rhs is not None:
            raise TypeError("NOT takes a single operand")
        return LogicVector(width, ~lhs._val, lu)
    if rhs is None:
        raise TypeError(f"{op.name} needs two operands")
    _check_widths(lhs, rhs)
    ru = rhs._x | rhs._z
    l1, r1 = lhs._val, rhs._val
    l0, r0 = ~(l1 | lu) & mask, ~(r1 | ru) & mask
    if op in (BitOp.AND, BitOp.NAND):
        zero = l0 | r0
        one = l1 & r1
    elif op in (BitOp.OR, BitOp.NOR):
        one = l1 | r1
        zero = l0 & r0
    elif op is BitOp.XOR:
        known = ~(lu | ru) & mask
        one = (l1 ^ r1) & known
        zero = known & ~one
    else:
        raise ValueError(f"unsupported gate {op}")
    unknown = mask & ~(zero | one)
    if op in (BitOp.NAND, BitOp.NOR):
        one = zero
    return LogicVector(width, one, unknown)


def arith(op: ArithOp, lhs: LogicVector, rhs: LogicVector) -> LogicVector:
    """Two's-complement add/sub modulo 2**width; any X/Z operand bit yields all-X."""
    _check_widths(lhs, rhs)
    if not (lhs.is_clean and rhs.is_clean):
        return LogicVector.all_x(lhs.width)
    if op is ArithOp.ADD:
        return LogicVector(lhs.width, lhs._val + rhs._val)
    if op is ArithOp.SUB:
        return LogicVector(lhs.width, lhs._val - rhs._val)
    raise ValueError(f"unsupported arithmetic op {op}")


def to_signed(value: LogicVector) -> int:
    return value.to_signed()


def from_signed(value: int, width: int) -> LogicVector:
    return LogicVector.from_signed(value, width)


def resolve(drivers: Iterable[tuple[LogicScalar, DriveStrength]]) -> LogicScalar:
    """Resolve one wire from (value, strength) contributions.

    Strong drivers win over pull-ups, which win over released drivers.  Any
    strong X, or strong 0 against strong 1, resolves to X.
    """
    strong = set()
    pulls = set()
    seen = False
    for value, strength in drivers:
        seen = True
        if strength is DriveStrength.STRONG:
            if value is not LogicScalar.Z:
                strong.add(value)
        elif strength is DriveStrength.PULL_UP:
            if value is not LogicScalar.Z:
                pulls.add(value)
    if not seen:
        raise ResolutionError("no drivers to resolve")
    for level in (strong, pulls):
        if not level:
            continue
        if LogicScalar.X in level or len(level) > 1:
            return LogicScalar.X
        return next(iter(level))
    return LogicScalar.Z


def resolve_vectors(width: int, strong: Iterable[LogicVector], pull_up_mask: int = 0) -> LogicVector:
    """Bit-parallel :func:`resolve` over strong contributions plus a pull-up mask."""
    d0 = d1 = dx = 0
    mask = (1 << width) - 1
    for v in strong:
        u = v._x | v._z
        dx |= v._x
        d1 |= v._val
        d0 |= ~(v._val | u) & mask
    x = dx | (d0 & d1)
    one = d1 & ~x
    undriven = mask & ~(d0 | d1 | dx)
    one |= undriven & pull_up_mask
    z = undriven & ~pull_up_mask
    return LogicVector(width, one, x, z)
