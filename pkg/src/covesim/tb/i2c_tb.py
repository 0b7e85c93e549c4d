"""I2C testbench: the three memory tests plus a randomized soak."""

from __future__ import annotations

from covesim.crv import ConstraintSet, RandomVar, randomize
from covesim.duts.i2c import ADDRESS_PREFIX, MEM_SIZE, I2cSlaveDesign, dump_memory_hex, i2c_pullup_wrapper
from covesim.errors import TestFailure
from covesim.sim import Timer, format_time
from covesim.tb.i2c_bfm import I2cMasterBfm
from covesim.tb.refmodels import ShadowEeprom
from covesim.tb.registry import register_test
from covesim.tb.scoreboard import Scoreboard

ADDRESS_PINS = (0, 0, 0)  # A2, A1, A0


class I2cEnv:
    """Slave, master BFM and a shadow memory compared with the slave at every STOP."""

    def __init__(self, sim, coverage, options):
        self.sim = sim
        self.coverage = coverage
        self.config = options.i2c
        self.dut = I2cSlaveDesign(sim, config=self.config, memory=options.mem_preload)
        if options.pull_ups:
            i2c_pullup_wrapper(self.dut)
        a2, a1, a0 = ADDRESS_PINS
        for pin, level in ((self.dut.a2, a2), (self.dut.a1, a1), (self.dut.a0, a0), (self.dut.wp, 0)):
            pin.drive(level, "tb")
        self.wp_level = 0
        address = (ADDRESS_PREFIX << 3) | (a2 << 2) | (a1 << 1) | a0
        self.bfm = I2cMasterBfm(
            self.dut.sda, self.dut.scl, device_address=address, bit_period=options.bit_period, coverage=coverage
        )
        self.shadow = ShadowEeprom(
            self.dut.memory, size=MEM_SIZE, page_size=self.config.page_size, page_wrap=self.config.page_wrap
        )
        self.scoreboard = Scoreboard(sim, "i2c")
        self.stop_checks = 0
        self.incoherent: list = []
        self.transactions = 0
        self.mem_dump = options.mem_dump
        self.dut.stop_hooks.append(self._on_stop)

    def _on_stop(self, slave) -> None:
        self.stop_checks += 1
        if list(slave.memory) != self.shadow.memory:
            diff = [i for i, (a, b) in enumerate(zip(slave.memory, self.shadow.memory)) if a != b]
            self.incoherent.append((self.sim.now, diff))

    def _verify_coherent(self) -> None:
        if self.incoherent:
            when, diff = self.incoherent[0]
            raise TestFailure(f"slave memory differs from shadow at {format_time(when)} (addresses {diff})")

    async def set_wp(self, level: int) -> None:
        self.dut.wp.drive(level, "tb")
        self.wp_level = level
        await Timer(self.bfm.bit_period)

    async def write(self, addr: int, data, *, check: bool = True) -> list[bool]:
        self.shadow.write(addr, data, protected=bool(self.wp_level))
        acks = await self.bfm.page_write(addr, data, check=check)
        self.transactions += 1
        self._verify_coherent()
        return acks

    async def read(self, addr: int, count: int = 1) -> list[int]:
        expected = self.shadow.read(addr, count)
        got = await self.bfm.sequential_read(addr, count)
        self.transactions += 1
        self._verify_coherent()
        sb = self.scoreboard
        for i, (e, g) in enumerate(zip(expected, got)):
            sb.expect(e)
            sb.check(g, addr=(addr + i) % MEM_SIZE)
        return got

    def finish(self, report) -> None:
        if self.mem_dump is not None:
            dump_memory_hex(self.dut.memory, self.mem_dump)


def _byte(rng) -> int:
    return rng.randint(0, 0xFF)


@register_test("i2c", transactions=4, tags=("memory",))
async def i2c_byte_write_random_read(env: I2cEnv, rng, transactions: int):
    for _ in range(transactions):
        addr = rng.randint(0, MEM_SIZE - 1)
        await env.write(addr, [_byte(rng)])
        await env.read(addr)
    # directed write-protect transfer: data byte must be refused, memory kept
    addr = rng.randint(0, MEM_SIZE - 1)
    data = env.shadow.read(addr)[0] ^ 0xFF
    await env.set_wp(1)
    acks = await env.write(addr, [data], check=False)
    await env.set_wp(0)
    expected = [True, True, env.config.wp_mode == "ignore"]
    if acks != expected:
        raise TestFailure(f"write-protected transfer acks {acks}, expected {expected}")
    await env.read(addr)


@register_test("i2c", transactions=2, tags=("memory",))
async def i2c_page_write_random_read(env: I2cEnv, rng, transactions: int):
    size = env.config.page_size
    for _ in range(transactions):
        page = rng.randint(0, MEM_SIZE // size - 1) * size
        await env.write(page, [_byte(rng) for _ in range(size)])
        for _ in range(4):
            await env.read(page + rng.randint(0, size - 1))


@register_test("i2c", transactions=1, tags=("memory",))
async def i2c_page_write_sequential_read(env: I2cEnv, rng, transactions: int):
    size = env.config.page_size
    for _ in range(transactions):
        for page in range(0, MEM_SIZE, size):
            await env.write(page, [_byte(rng) for _ in range(size)])
        await env.read(0, MEM_SIZE)


SOAK_OPS = RandomVar.choice("op", ["byte_write", "page_write", "random_read", "sequential_read", "protected_write"])
SOAK_MIX = ConstraintSet().set_weight(
    SOAK_OPS, {"byte_write": 3, "page_write": 2, "random_read": 3, "sequential_read": 2, "protected_write": 1}
)


async def i2c_soak(env: I2cEnv, rng, transactions: int):
    """Random mix of memory operations; coherence is checked at every STOP."""
    size = env.config.page_size
    for _ in range(transactions):
        op = randomize([SOAK_OPS], SOAK_MIX, rng)["op"]
        addr = rng.randint(0, MEM_SIZE - 1)
        if op == "byte_write":
            await env.write(addr, [_byte(rng)])
        elif op == "page_write":
            await env.write(addr, [_byte(rng) for _ in range(rng.randint(1, size))])
        elif op == "random_read":
            await env.read(addr)
        elif op == "sequential_read":
            await env.read(addr, rng.randint(1, MEM_SIZE))
        else:
            await env.set_wp(1)
            await env.write(addr, [_byte(rng)], check=False)
            await env.set_wp(0)
