"""Reference models, written without reusing the design models."""

from __future__ import annotations

from decimal import ROUND_HALF_UP, Context, Decimal

_M32 = 0xFFFFFFFF

# opcode order: ADD, SUB, NOT, AND, OR, XOR, NAND, NOR
_ALU_OPS = (
    lambda a, b: a + b,
    lambda a, b: a - b,
    lambda a, b: ~a,
    lambda a, b: a & b,
    lambda a, b: a | b,
    lambda a, b: a ^ b,
    lambda a, b: ~(a & b),
    lambda a, b: ~(a | b),
)


def alu_ref(a: int, b: int, op: int) -> int:
    """Expected 32-bit result for signed or unsigned operands."""
    return _ALU_OPS[op](a & _M32, b & _M32) & _M32


_DEC = Context(prec=1200, rounding=ROUND_HALF_UP)


def adc_ref(volts: float) -> int:
    """Ideal 16-bit code over [-10 V, 10 V] with half-up rounding, in decimal arithmetic."""
    v = Decimal(volts)
    if v <= -10:
        return 0
    if v >= 10:
        return 65535
    scaled = _DEC.divide(_DEC.multiply(_DEC.add(v, Decimal(10)), Decimal(65535)), Decimal(20))
    return int(scaled.quantize(Decimal(1), rounding=ROUND_HALF_UP, context=_DEC))


class ShadowEeprom:
    """Behavioral memory image updated from master intent."""

    def __init__(self, image=None, size: int = 32, page_size: int = 8, page_wrap: bool = True):
        self.size = size
        self.page_size = page_size
        self.page_wrap = page_wrap
        self.memory = list(image) if image is not None else [0] * size

    def write(self, addr: int, data, protected: bool = False) -> None:
        if protected:
            return
        start = addr % self.size
        for i, byte in enumerate(data):
            if self.page_wrap:
                page = start // self.page_size * self.page_size
                loc = page + (start - page + i) % self.page_size
            else:
                loc = (start + i) % self.size
            self.memory[loc] = byte & 0xFF

    def read(self, addr: int, count: int = 1) -> list[int]:
        return [self.memory[(addr + i) % self.size] for i in range(count)]
