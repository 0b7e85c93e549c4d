"""ALU testbench: random operands each clock, checked against ``alu_ref``."""

from __future__ import annotations

from covesim.crv import RandomVar, randomize
from covesim.duts.alu import AluDesign
from covesim.sim import Clock, FallingEdge, RisingEdge
from covesim.tb.refmodels import alu_ref
from covesim.tb.registry import register_test
from covesim.tb.scoreboard import Scoreboard

CLOCK_PERIOD_NS = 20
DEFAULT_TRANSACTIONS = 20_000
STIMULUS = (
    RandomVar.range("a", -100, 100),
    RandomVar.range("b", -100, 100),
    RandomVar.range("op", 0, 7, signed=False),
)


class AluEnv:
    def __init__(self, sim, coverage, options):
        self.sim = sim
        self.coverage = coverage
        self.dut = AluDesign(sim)
        self.scoreboard = Scoreboard(sim, "alu")
        self.initialize = options.initialize
        self.transactions = 0
        sim.spawn(Clock(self.dut.clk, CLOCK_PERIOD_NS, "ns").start(), name="alu.clock", background=True)

    def finish(self, report) -> None:
        pass


@register_test("alu", transactions=DEFAULT_TRANSACTIONS, tags=("random",))
async def alu_random(env: AluEnv, rng, transactions: int):
    """Transaction 0 checks the initial operands; later ones drive on the rising edge."""
    dut, sb, cov = env.dut, env.scoreboard, env.coverage
    a = b = op = 0
    if env.initialize:
        dut.a.value = a
        dut.b.value = b
        dut.op.value = op
    rising, falling = RisingEdge(dut.clk), FallingEdge(dut.clk)
    for i in range(transactions):
        if i:
            await rising
            draw = randomize(STIMULUS, None, rng)
            a, b, op = draw["a"], draw["b"], draw["op"]
            dut.a.value = a
            dut.b.value = b
            dut.op.value = op
        sb.expect(alu_ref(a, b, op))
        await falling
        cov.sample({"a": a, "b": b, "op": op})
        env.transactions += 1
        sb.check(dut.r.value, a=dut.a.value, b=dut.b.value, op=dut.op.value)
