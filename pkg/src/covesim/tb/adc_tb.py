"""ADC testbench: uniform random voltages, checked against ``adc_ref``."""

from __future__ import annotations

from covesim.duts.adc import V_MAX, V_MIN, AdcDesign
from covesim.sim import Timer
from covesim.tb.refmodels import adc_ref
from covesim.tb.registry import register_test
from covesim.tb.scoreboard import Scoreboard

DEFAULT_TRANSACTIONS = 210
SETTLE_NS = 10


class AdcEnv:
    def __init__(self, sim, coverage, options):
        self.sim = sim
        self.coverage = coverage
        self.dut = AdcDesign(sim)
        self.scoreboard = Scoreboard(sim, "adc")
        self.transactions = 0

    def finish(self, report) -> None:
        pass


@register_test("adc", transactions=DEFAULT_TRANSACTIONS, tags=("random",))
async def adc_ramp_random(env: AdcEnv, rng, transactions: int):
    dut, sb, cov = env.dut, env.scoreboard, env.coverage
    wait = Timer(SETTLE_NS, "ns")
    for _ in range(transactions):
        volts = rng.uniform(V_MIN, V_MAX)
        dut.analog_in.value = volts
        sb.expect(adc_ref(volts))
        await wait
        code = dut.digital_out.value
        if code.is_clean:
            cov.sample({"analog_in_tb": code.to_unsigned()})
        env.transactions += 1
        sb.check(code, volts=volts)
