"""Build a kernel for one design, run its tests and collect the report."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from covesim.coverage import builtin_model, load_model, load_model_file
from covesim.crv import Rng, derive_seed
from covesim.duts.i2c import I2cConfig
from covesim.errors import RegistryError
from covesim.sim import Join, RunReport, Simulator
from covesim.tb.adc_tb import AdcEnv
from covesim.tb.alu_tb import AluEnv
from covesim.tb.i2c_bfm import DEFAULT_BIT_PERIOD
from covesim.tb.i2c_tb import I2cEnv, i2c_soak
from covesim.tb.registry import REGISTRY, TestCase

ENVIRONMENTS = {"alu": AluEnv, "i2c": I2cEnv, "adc": AdcEnv}


@dataclass
class RunOptions:
    """Knobs shared by every design; design-specific ones are ignored elsewhere."""

    seed: int = 1
    transactions: int | None = None
    vcd: str | Path | None = None
    cov_out: str | Path | None = None
    coverage_model: str | Path | None = None
    fail_fast: bool = False
    horizon: int | None = None
    initialize: bool = True  # alu: drive the operands before the first compare
    pull_ups: bool = True  # i2c: include the bus pull-up wrapper
    i2c: I2cConfig = field(default_factory=I2cConfig)
    bit_period: int = DEFAULT_BIT_PERIOD
    mem_preload: bytes | None = None
    mem_dump: str | Path | None = None


async def _after(previous, body):
    if previous is not None:
        await Join(previous)
    return await body


def _coverage_db(design: str, options: RunOptions):
    if options.coverage_model is not None:
        db = load_model_file(options.coverage_model)
    else:
        db = load_model(builtin_model(design))
    db.seed = options.seed
    return db


def run_cases(design: str, cases: list[TestCase], options: RunOptions | None = None):
    """Run ``cases`` one after another in a single kernel; returns ``(report, env)``."""
    options = options or RunOptions()
    if design not in ENVIRONMENTS:
        raise RegistryError(f"unknown design {design!r}")
    if not cases:
        raise RegistryError(f"no tests selected for {design}")
    if options.transactions is not None and options.transactions < 1:
        raise ValueError("transactions must be at least 1")
    sim = Simulator(horizon=options.horizon, fail_fast=options.fail_fast)
    db = _coverage_db(design, options)
    env = ENVIRONMENTS[design](sim, db, options)
    if options.vcd is not None:
        sim.dump_vcd(options.vcd)
    previous = None
    for tc in cases:
        n = options.transactions if options.transactions is not None else tc.default_transactions
        rng = Rng(derive_seed(options.seed, tc.name))
        previous = sim.spawn(_after(previous, tc.body(env, rng, n)), name=tc.name, test=True)
    report = sim.run()
    report.coverage = db
    report.seed = options.seed
    report.design = design
    report.transactions = env.transactions
    env.finish(report)
    if options.cov_out is not None:
        export_coverage(db, options.cov_out)
    return report, env


def export_coverage(db, path) -> tuple[Path, Path]:
    """Write the YAML report at ``path`` and the text table next to it."""
    path = Path(path)
    text_path = path.with_suffix(".txt")
    db.export_report("yaml", path)
    db.export_report("text", text_path)
    return path, text_path


def run_design(design: str, options: RunOptions | None = None, pattern: str | None = None) -> RunReport:
    return run_cases(design, REGISTRY.discover(pattern, design=design), options)[0]


def _with(options, **overrides) -> RunOptions:
    options = options or RunOptions()
    for key, value in overrides.items():
        setattr(options, key, value)
    return options


def run_alu_test(transactions: int = 20_000, seed: int = 1, options: RunOptions | None = None, **overrides) -> RunReport:
    return run_design("alu", _with(options, transactions=transactions, seed=seed, **overrides))


def run_adc_test(transactions: int = 210, seed: int = 1, options: RunOptions | None = None, **overrides) -> RunReport:
    return run_design("adc", _with(options, transactions=transactions, seed=seed, **overrides))


def run_i2c_tests(seed: int = 1, options: RunOptions | None = None, pattern: str | None = None, **overrides) -> RunReport:
    return run_design("i2c", _with(options, seed=seed, **overrides), pattern)


def run_i2c_soak(operations: int = 1000, seed: int = 1, options: RunOptions | None = None, **overrides):
    """Random operation mix outside the registered tests; returns ``(report, env)``."""
    options = _with(options, transactions=operations, seed=seed, **overrides)
    return run_cases("i2c", [TestCase("i2c_soak", "i2c", i2c_soak, operations)], options)
