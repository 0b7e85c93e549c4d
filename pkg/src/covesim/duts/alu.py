"""32-bit combinational ALU with eight operations."""

from __future__ import annotations

import enum

from covesim.logic import LogicVector
from covesim.sim import Edge, Simulator

WIDTH = 32
MASK = (1 << WIDTH) - 1


class AluOp(enum.IntEnum):
    ADD = 0
    SUB = 1
    NOT = 2
    AND = 3
    OR = 4
    XOR = 5
    NAND = 6
    NOR = 7


_ALL_X = LogicVector.all_x(WIDTH)


def alu_eval(a, b, op) -> LogicVector:
    """Result bus for one operation; any X/Z in an operand that is used gives all-X."""
    a = LogicVector.coerce(a, WIDTH)
    b = LogicVector.coerce(b, WIDTH)
    op = LogicVector.coerce(op, 3)
    if not op.is_clean or not a.is_clean:
        return _ALL_X
    code = op._val
    if code == AluOp.NOT:
        return LogicVector(WIDTH, ~a._val & MASK)
    if not b.is_clean:
        return _ALL_X
    x, y = a._val, b._val
    if code == AluOp.ADD:
        r = x + y
    elif code == AluOp.SUB:
        r = x - y
    elif code == AluOp.AND:
        r = x & y
    elif code == AluOp.OR:
        r = x | y
    elif code == AluOp.XOR:
        r = x ^ y
    elif code == AluOp.NAND:
        r = ~(x & y)
    else:
        r = ~(x | y)
    return LogicVector(WIDTH, r & MASK)


class AluDesign:
    """Ports ``a``, ``b``, ``op``, ``clk`` and ``r`` under ``prefix``.

    The result is re-evaluated whenever an input changes, so ``r`` follows the
    inputs one delta later and ``clk`` only paces the testbench.
    """

    writer = "alu"

    def __init__(self, sim: Simulator, prefix: str = "alu"):
        self.sim = sim
        self.a = sim.signal(f"{prefix}.a", WIDTH)
        self.b = sim.signal(f"{prefix}.b", WIDTH)
        self.op = sim.signal(f"{prefix}.op", 3)
        self.clk = sim.signal(f"{prefix}.clk")
        self.r = sim.signal(f"{prefix}.r", WIDTH)
        sim.spawn(self._process(), name=f"{prefix}.comb", background=True)

    async def _process(self):
        a, b, op, r = self.a, self.b, self.op, self.r
        sensitivity = Edge(a, b, op)
        while True:
            r.drive(alu_eval(a.value, b.value, op.value), self.writer)
            await sensitivity
