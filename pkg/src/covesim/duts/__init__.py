"""Executable models of the three designs under test."""

from covesim.duts.adc import AdcDesign, adc_convert, bits_to_real, real_to_bits
from covesim.duts.alu import AluDesign, AluOp, alu_eval
from covesim.duts.i2c import (
    I2cConfig,
    I2cSlaveDesign,
    SlaveState,
    dump_memory_hex,
    i2c_pullup_wrapper,
    load_memory_hex,
)

__all__ = [
    "AdcDesign",
    "AluDesign",
    "AluOp",
    "I2cConfig",
    "I2cSlaveDesign",
    "SlaveState",
    "adc_convert",
    "alu_eval",
    "bits_to_real",
    "dump_memory_hex",
    "i2c_pullup_wrapper",
    "load_memory_hex",
    "real_to_bits",
]
