import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from covesim.duts import (
    AdcDesign,
    AluDesign,
    AluOp,
    I2cConfig,
    I2cSlaveDesign,
    SlaveState,
    adc_convert,
    alu_eval,
    bits_to_real,
    dump_memory_hex,
    i2c_pullup_wrapper,
    load_memory_hex,
    real_to_bits,
)
from covesim.errors import ConversionError
from covesim.logic import LogicVector
from covesim.sim import Delta, Simulator, Timer
from covesim.tb.i2c_bfm import I2cMasterBfm

M32 = 2**32


def _oracle(a, b, op):
    # two's-complement arithmetic on Python ints, bitwise ops via binary strings
    if op == 0:
        return (a + b) % M32
    if op == 1:
        return (a - b) % M32
    sa, sb = format(a, "032b"), format(b, "032b")
    table = {
        2: lambda x, y: "1" if x == "0" else "0",
        3: lambda x, y: "1" if x == y == "1" else "0",
        4: lambda x, y: "1" if "1" in (x, y) else "0",
        5: lambda x, y: "1" if x != y else "0",
        6: lambda x, y: "0" if x == y == "1" else "1",
        7: lambda x, y: "0" if "1" in (x, y) else "1",
    }
    return int("".join(table[op](x, y) for x, y in zip(sa, sb)), 2)


@pytest.mark.parametrize(
    "a,b,op,expected",
    [
        (7, 5, AluOp.SUB, 2),
        (3, 4, AluOp.ADD, 7),
        (0xFFFFFFFF, 1, AluOp.ADD, 0),
        (0, 1, AluOp.SUB, 0xFFFFFFFF),
        (0, 0x1234, AluOp.NOT, 0xFFFFFFFF),
        (0xAAAAAAAA, 0x55555555, AluOp.AND, 0),
        (0xAAAAAAAA, 0x55555555, AluOp.OR, 0xFFFFFFFF),
        (0xAAAAAAAA, 0x55555555, AluOp.XOR, 0xFFFFFFFF),
        (0xAAAAAAAA, 0x55555555, AluOp.NAND, 0xFFFFFFFF),
        (0xAAAAAAAA, 0x55555555, AluOp.NOR, 0),
        (-1, -1, AluOp.ADD, 0xFFFFFFFE),
    ],
)
def test_alu_examples(a, b, op, expected):
    assert alu_eval(a, b, op) == expected


def test_alu_matches_oracle_on_random_triples():
    gen = random.Random(2024)
    for _ in range(100_000):
        a, b, op = gen.getrandbits(32), gen.getrandbits(32), gen.randrange(8)
        assert alu_eval(a, b, op).to_unsigned() == _oracle(a, b, op)


def test_alu_unknown_operands():
    x = LogicVector.parse("32'h0000000x")
    assert alu_eval(x, 1, AluOp.AND) == LogicVector.all_x(32)
    assert alu_eval(1, x, AluOp.ADD) == LogicVector.all_x(32)
    assert alu_eval(0, x, AluOp.NOT) == 0xFFFFFFFF
    assert alu_eval(1, 2, "3'bx01") == LogicVector.all_x(32)
    assert str(alu_eval(LogicVector.all_z(32), 0, 0)) == "x" * 32


def test_alu_design_is_combinational():
    sim = Simulator()
    dut = AluDesign(sim)
    seen = []

    async def body():
        dut.a.value = 10
        dut.b.value = 3
        dut.op.value = AluOp.SUB
        await Delta()
        await Delta()
        seen.append(dut.r.value.to_unsigned())
        dut.op.value = AluOp.OR
        await Timer(1)
        seen.append(dut.r.value.to_unsigned())

    sim.spawn(body())
    sim.run()
    assert seen == [7, 11]


# I2C


def _i2c(body, *, pull_ups=True, config=None, memory=None, pins=(0, 0, 0), wp=0):
    sim = Simulator(horizon=10**12)
    dut = I2cSlaveDesign(sim, config=config, memory=memory)
    if pull_ups:
        i2c_pullup_wrapper(dut)
    for pin, level in zip((dut.a2, dut.a1, dut.a0), pins):
        pin.drive(level, "tb")
    dut.wp.drive(wp, "tb")
    bfm = I2cMasterBfm(dut.sda, dut.scl)
    result = {}

    async def main():
        result["value"] = await body(sim, dut, bfm)

    sim.spawn(main(), name="main", test=True)
    report = sim.run()
    return report, dut, result.get("value"), sim


def test_byte_write_then_random_read():
    async def body(sim, dut, bfm):
        acks = await bfm.byte_write(5, 0xA7)
        return acks, await bfm.random_read(5)

    report, dut, (acks, value), _ = _i2c(body)
    assert report.passed, report.tasks[0].message
    assert acks == [True, True, True]
    assert value == 0xA7 and dut.memory[5] == 0xA7
    assert dut.state is SlaveState.IDLE


def test_page_write_then_sequential_read():
    async def body(sim, dut, bfm):
        await bfm.page_write(0, list(range(1, 9)))
        return await bfm.sequential_read(0, 8)

    report, dut, value, _ = _i2c(body)
    assert value == list(range(1, 9))


@pytest.mark.parametrize(
    "page_wrap,locations",
    [(True, [6, 7, 0, 1]), (False, [6, 7, 8, 9])],
)
def test_page_write_wrap(page_wrap, locations):
    async def body(sim, dut, bfm):
        await bfm.page_write(6, [0x11, 0x22, 0x33, 0x44])

    _, dut, _, _ = _i2c(body, config=I2cConfig(page_wrap=page_wrap))
    assert [dut.memory[i] for i in locations] == [0x11, 0x22, 0x33, 0x44]
    assert sum(1 for b in dut.memory if b) == 4


def test_sequential_read_wraps_through_all_addresses():
    image = bytes((7 * i + 3) & 0xFF for i in range(32))

    async def body(sim, dut, bfm):
        walks = []
        for start in range(32):
            walks.append(await bfm.sequential_read(start, 33 if start == 31 else 2))
        return walks

    _, _, walks, _ = _i2c(body, memory=image)
    for start, walk in enumerate(walks):
        expected = [image[(start + i) % 32] for i in range(len(walk))]
        assert walk == expected
    assert walks[31][:2] == [image[31], image[0]]


def test_write_protect_nacks_data_and_keeps_memory():
    image = bytes(range(32))

    async def body(sim, dut, bfm):
        acks = await bfm.byte_write(9, 0xEE, check=False)
        return acks, await bfm.random_read(9)

    report, dut, (acks, value), _ = _i2c(body, memory=image, wp=1)
    assert acks == [True, True, False]
    assert value == 9 and bytes(dut.memory) == image


def test_write_protect_ignore_mode_acks():
    async def body(sim, dut, bfm):
        return await bfm.byte_write(9, 0xEE, check=False)

    _, dut, acks, _ = _i2c(body, wp=1, config=I2cConfig(wp_mode="ignore"))
    assert acks == [True, True, True] and dut.memory[9] == 0


def test_wrong_device_address_is_not_acked():
    async def body(sim, dut, bfm):
        return await bfm.byte_write(1, 2, check=False)

    _, dut, acks, _ = _i2c(body, pins=(0, 0, 1))
    assert acks == [False, False, False]
    assert not any(dut.memory)


def test_matching_select_pins():
    async def body(sim, dut, bfm):
        bfm.device_address = 0b1010101
        await bfm.start()
        ack = await bfm.write_byte(0b1010101 << 1)
        await bfm.stop()
        return ack

    _, _, ack, _ = _i2c(body, pins=(1, 0, 1))
    assert ack is True


def test_nack_fails_checked_transfer():
    async def body(sim, dut, bfm):
        await bfm.byte_write(1, 2)

    report, _, _, _ = _i2c(body, pins=(1, 1, 1))
    assert not report.passed
    assert "byte 0" in report.tasks[0].message


def test_start_leaves_idle_and_stop_returns():
    async def body(sim, dut, bfm):
        states = [dut.state]
        await bfm.start()
        states.append(dut.state)
        await bfm.stop()
        states.append(dut.state)
        return states

    _, _, states, _ = _i2c(body)
    assert states == [SlaveState.IDLE, SlaveState.ADDR, SlaveState.IDLE]


def test_truncated_byte_raises_diagnostic():
    async def body(sim, dut, bfm):
        await bfm.start()
        for bit in (1, 0, 1, 0):
            await bfm._write_bit(bit)
        await bfm.stop()
        return await bfm.random_read(0)

    report, dut, value, sim = _i2c(body)
    assert report.passed
    assert dut.violations == 1
    # STOP setup clocks in one more bit after the four data bits
    assert any("STOP after 5 bits" in msg for _, _, msg in sim.diagnostics)
    assert value == 0


def test_slave_never_drives_one():
    sim = Simulator()
    dut = i2c_pullup_wrapper(I2cSlaveDesign(sim, memory=bytes([0xFF, 0x00] * 16)))
    for pin in (dut.a0, dut.a1, dut.a2, dut.wp):
        pin.drive(0, "tb")
    bfm = I2cMasterBfm(dut.sda, dut.scl)
    bad = []
    slave_drives = set()

    def hook(s):
        for sig in (dut.sda, dut.scl):
            value = sig.drivers.get(dut.writer)
            if value is not None:
                slave_drives.add(str(value))
                if value == 1:
                    bad.append((s.now, sig.name))

    sim.on_settle(hook)

    async def body():
        await bfm.page_write(3, [0xFF, 0x00, 0x5A])
        await bfm.sequential_read(0, 32)

    sim.spawn(body())
    sim.run()
    assert bad == []
    assert slave_drives == {"0", "z"}


def test_pull_up_wrapper_bus_levels():
    sim = Simulator()
    dut = i2c_pullup_wrapper(I2cSlaveDesign(sim))
    levels = []

    async def body():
        levels.append((str(dut.sda.value), str(dut.scl.value)))
        dut.sda.drive(0, dut.writer)
        await Delta()
        levels.append((str(dut.sda.value), str(dut.scl.value)))
        dut.sda.release(dut.writer)
        dut.sda.release("master")
        await Delta()
        levels.append((str(dut.sda.value), str(dut.scl.value)))

    sim.spawn(body())
    sim.run()
    assert levels == [("1", "1"), ("0", "1"), ("1", "1")]


def test_unwrapped_bus_floats():
    sim = Simulator()
    dut = I2cSlaveDesign(sim)
    levels = []

    async def body():
        await Timer(10)
        levels.append((str(dut.sda.value), str(dut.scl.value)))

    sim.spawn(body())
    sim.run()
    assert levels == [("z", "z")]


@settings(max_examples=15, deadline=None)
@given(
    ops=st.lists(
        st.tuples(st.booleans(), st.integers(0, 31), st.integers(0, 255)),
        min_size=1,
        max_size=12,
    )
)
def test_reads_return_last_written_value(ops):
    async def body(sim, dut, bfm):
        last = {}
        for is_write, addr, data in ops:
            if is_write:
                await bfm.byte_write(addr, data)
                last[addr] = data
            else:
                got = await bfm.random_read(addr)
                assert got == last.get(addr, 0)
        return last

    report, dut, last, _ = _i2c(body)
    assert report.passed, report.tasks[0].message
    for addr, data in last.items():
        assert dut.memory[addr] == data


def test_memory_hex_round_trip(tmp_path):
    image = bytes(range(0, 256, 8))
    path = tmp_path / "mem.hex"
    dump_memory_hex(image, path)
    text = path.read_text()
    assert text.splitlines()[:3] == ["00", "08", "10"] and len(text.splitlines()) == 32
    assert load_memory_hex(path) == image


@pytest.mark.parametrize("content", ["00\n" * 31, "zz\n" + "00\n" * 31, "100\n" + "00\n" * 31])
def test_memory_hex_errors(tmp_path, content):
    path = tmp_path / "bad.hex"
    path.write_text(content)
    with pytest.raises(ValueError):
        load_memory_hex(path)


def test_bad_i2c_config():
    with pytest.raises(ValueError):
        I2cConfig(wp_mode="sometimes")
    with pytest.raises(ValueError):
        I2cConfig(page_size=5)


# ADC


@pytest.mark.parametrize(
    "volts,code",
    [(-10.0, 0), (10.0, 65535), (0.0, 32768), (11.0, 65535), (-1e9, 0), (math.inf, 65535), (-math.inf, 0)],
)
def test_adc_examples(volts, code):
    assert adc_convert(volts) == code


def test_adc_midpoint_rounding_independent():
    # 0 V sits at 65535 / 2 = 32767.5, which rounds up
    assert 65535 / 2 == 32767.5
    assert adc_convert(0.0) == 32767 + 1
    # one code step is 20/65535 V; just below a half step stays on the lower code
    step = 20 / 65535
    assert adc_convert(-10.0 + 0.49 * step) == 0
    assert adc_convert(-10.0 + 0.51 * step) == 1


def test_adc_nan():
    with pytest.raises(ConversionError):
        adc_convert(float("nan"))


@settings(max_examples=300)
@given(st.floats(-12, 12), st.floats(-12, 12))
def test_adc_monotone(v1, v2):
    lo, hi = sorted((v1, v2))
    c1, c2 = adc_convert(lo), adc_convert(hi)
    assert 0 <= c1 <= c2 <= 65535


def test_real_to_bits_examples():
    assert real_to_bits(1.0) == 0x3FF0_0000_0000_0000
    assert real_to_bits(0.0) == 0
    assert real_to_bits(-2.0) == 0xC000_0000_0000_0000
    gen = random.Random(9)
    for _ in range(1000):
        v = gen.uniform(-10, 10)
        assert bits_to_real(real_to_bits(v)) == v


def test_adc_design_converts_through_wrapper():
    sim = Simulator()
    dut = AdcDesign(sim)
    out = []

    async def body():
        for v in (0.0, -10.0, 10.0, 2.5):
            dut.analog_in.value = v
            await Timer(10, "ns")
            out.append((dut.analog_input.value.to_unsigned(), dut.digital_out.value.to_unsigned()))

    sim.spawn(body())
    sim.run()
    assert [o[1] for o in out] == [32768, 0, 65535, adc_convert(2.5)]
    assert out[3][0] == real_to_bits(2.5)
