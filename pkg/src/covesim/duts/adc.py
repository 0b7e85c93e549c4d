"""16-bit ADC: ideal clamping quantizer behind a real-to-bits wrapper."""

from __future__ import annotations

import math
import struct
from fractions import Fraction

from covesim.errors import ConversionError
from covesim.logic import LogicVector
from covesim.sim import Edge, Simulator

V_MIN = -10.0
V_MAX = 10.0
BITS = 16
FULL_SCALE = (1 << BITS) - 1


def real_to_bits(value: float) -> int:
    """IEEE-754 binary64 pattern of ``value``."""
    return struct.unpack("<Q", struct.pack("<d", value))[0]


def bits_to_real(bits: int) -> float:
    return struct.unpack("<d", struct.pack("<Q", bits))[0]


def adc_convert(volts: float, v_min: float = V_MIN, v_max: float = V_MAX) -> int:
    """Output code for ``volts``; out-of-range inputs clamp, ties round up."""
    if math.isnan(volts):
        raise ConversionError("ADC input is NaN")
    if volts <= v_min:
        return 0
    if volts >= v_max:
        return FULL_SCALE
    lo = Fraction(v_min)
    scaled = (Fraction(volts) - lo) / (Fraction(v_max) - lo) * FULL_SCALE
    return math.floor(scaled + Fraction(1, 2))


class AdcDesign:
    """``analog_in`` (real volts) feeds ``analog_input`` (its 64-bit pattern), which the core converts to ``digital_out``."""

    def __init__(self, sim: Simulator, prefix: str = "adc", initial: float = 0.0):
        self.sim = sim
        self.analog_in = sim.real_signal(f"{prefix}.analog_in", initial)
        self.analog_input = sim.signal(f"{prefix}.analog_input", 64)
        self.digital_out = sim.signal(f"{prefix}.digital_out", BITS)
        self.conversions = 0
        sim.spawn(self._wrapper(), name=f"{prefix}.realtobits", background=True)
        sim.spawn(self._core(), name=f"{prefix}.core", background=True)

    async def _wrapper(self):
        src, dst = self.analog_in, self.analog_input
        sensitivity = Edge(src)
        while True:
            dst.drive(LogicVector(64, real_to_bits(src.value)), "wrapper")
            await sensitivity

    async def _core(self):
        src, dst = self.analog_input, self.digital_out
        sensitivity = Edge(src)
        while True:
            await sensitivity
            pattern = src.value
            if pattern.is_clean:
                dst.drive(adc_convert(bits_to_real(pattern._val)), "adc")
                self.conversions += 1
            else:
                dst.drive(LogicVector.all_x(BITS), "adc")
