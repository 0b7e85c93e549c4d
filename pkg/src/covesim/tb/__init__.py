"""Testbenches, reference models and the I2C master BFM."""

from covesim.tb.i2c_bfm import I2cMasterBfm
from covesim.tb.refmodels import ShadowEeprom, adc_ref, alu_ref
from covesim.tb.registry import REGISTRY, Registry, TestCase, discover, register_test
from covesim.tb.runner import (
    RunOptions,
    export_coverage,
    run_adc_test,
    run_alu_test,
    run_cases,
    run_design,
    run_i2c_soak,
    run_i2c_tests,
)
from covesim.tb.scoreboard import Scoreboard

__all__ = [
    "REGISTRY",
    "I2cMasterBfm",
    "Registry",
    "RunOptions",
    "Scoreboard",
    "ShadowEeprom",
    "TestCase",
    "adc_ref",
    "alu_ref",
    "discover",
    "export_coverage",
    "register_test",
    "run_adc_test",
    "run_alu_test",
    "run_cases",
    "run_design",
    "run_i2c_soak",
    "run_i2c_tests",
]
