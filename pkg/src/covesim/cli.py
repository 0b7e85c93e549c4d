"""Command-line runner: test selection, seeding, reports and benchmarks.

Exit status is 0 when every selected test passes, 1 when any test fails and
2 for usage, configuration or infrastructure errors.
"""

from __future__ import annotations

import argparse
import csv
import logging
import statistics
import sys
from dataclasses import dataclass
from pathlib import Path

from covesim.coverage import format_percent
from covesim.crv import U64
from covesim.duts.i2c import WP_MODES, I2cConfig, load_memory_hex
from covesim.errors import ConfigError, CovesimError
from covesim.sim import configure_logging, format_time, parse_time
from covesim.tb import REGISTRY, RunOptions, run_cases

DESIGNS = ("alu", "i2c", "adc")
DEFAULT_LADDERS = {"alu": (20_000, 40_000, 60_000), "adc": (210, 410, 610)}
MIN_REPEATS = 3
CSV_FIELDS = ("design", "transactions", "run_index", "wall_seconds", "events")


@dataclass
class RunConfig:
    """Validated settings for one invocation; field names double as config-file keys."""

    toplevel: str | None = None
    test: str | None = None
    transactions: int | None = None
    seed: int = 1
    cov_out: Path | None = None
    vcd: Path | None = None
    bench: bool = False
    bench_out: Path = Path("bench.csv")
    repeats: int = 5
    ladder: tuple | None = None
    fail_fast: bool = False
    horizon: int | None = None
    coverage_model: Path | None = None
    mem_preload: Path | None = None
    mem_dump: Path | None = None
    alu_initialize: bool = True
    i2c_pull_ups: bool = True
    i2c_wp_mode: str = "nack"
    i2c_page_wrap: bool = True
    i2c_bit_rate: int = 400_000
    log_level: str = "WARNING"

    def __post_init__(self):
        if self.toplevel is not None and self.toplevel not in DESIGNS:
            raise ConfigError(f"toplevel must be one of {', '.join(DESIGNS)}, got {self.toplevel!r}")
        if self.transactions is not None and self.transactions < 1:
            raise ConfigError("transactions must be at least 1")
        if not 0 <= self.seed <= U64:
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        if self.repeats < MIN_REPEATS:
            raise ConfigError(f"repeats must be at least {MIN_REPEATS}, got {self.repeats}")
        if self.ladder is not None:
            if not self.ladder or any(n < 1 for n in self.ladder):
                raise ConfigError("ladder needs positive transaction counts")
            if any(b <= a for a, b in zip(self.ladder, self.ladder[1:])):
                raise ConfigError(f"ladder must be strictly increasing, got {list(self.ladder)}")
        if self.i2c_wp_mode not in WP_MODES:
            raise ConfigError(f"i2c_wp_mode must be one of {', '.join(WP_MODES)}")
        if self.i2c_bit_rate <= 0 or 10**12 % (4 * self.i2c_bit_rate):
            raise ConfigError(f"i2c_bit_rate {self.i2c_bit_rate} Hz does not give a whole quarter-bit in ps")
        if self.log_level.upper() not in ("DEBUG", "INFO", "WARNING", "ERROR"):
            raise ConfigError(f"unknown log level {self.log_level!r}")
        if not self.bench and self.toplevel is None:
            raise ConfigError("no design selected: pass --toplevel or set 'toplevel' in the config file")

    def run_options(self) -> RunOptions:
        return RunOptions(
            seed=self.seed,
            transactions=self.transactions,
            vcd=self.vcd,
            cov_out=self.cov_out,
            coverage_model=self.coverage_model,
            fail_fast=self.fail_fast,
            horizon=self.horizon,
            initialize=self.alu_initialize,
            pull_ups=self.i2c_pull_ups,
            i2c=I2cConfig(page_wrap=self.i2c_page_wrap, wp_mode=self.i2c_wp_mode),
            bit_period=10**12 // self.i2c_bit_rate,
            mem_preload=load_memory_hex(self.mem_preload) if self.mem_preload else None,
            mem_dump=self.mem_dump,
        )


# config values


def _to_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError("expected a boolean (true/false)")


def _to_int(text: str) -> int:
    return int(text.replace("_", ""), 0)


def _to_ladder(text: str) -> tuple:
    return tuple(_to_int(part) for part in text.split(",") if part.strip())


_CONVERTERS = {
    "toplevel": str,
    "test": str,
    "transactions": _to_int,
    "seed": _to_int,
    "cov_out": Path,
    "vcd": Path,
    "bench": _to_bool,
    "bench_out": Path,
    "repeats": _to_int,
    "ladder": _to_ladder,
    "fail_fast": _to_bool,
    "horizon": parse_time,
    "coverage_model": Path,
    "mem_preload": Path,
    "mem_dump": Path,
    "alu_initialize": _to_bool,
    "i2c_pull_ups": _to_bool,
    "i2c_wp_mode": str,
    "i2c_page_wrap": _to_bool,
    "i2c_bit_rate": _to_int,
    "log_level": str,
}

_EXPECTED = {
    _to_int: "an integer",
    _to_bool: "a boolean",
    _to_ladder: "a comma-separated list of integers",
    parse_time: "a time such as '20ns'",
}


def read_config_file(path) -> dict:
    """Parse ``key = value`` lines (``#`` starts a comment) into typed values."""
    values = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc.strerror}") from None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        if key.lower() == "sim":
            raise ConfigError(
                f"{path}:{lineno}: unknown key 'sim': the simulation kernel is built in, "
                "so there is no external simulator to select"
            )
        convert = _CONVERTERS.get(key)
        if convert is None:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            values[key] = convert(value)
        except ValueError:
            raise ConfigError(
                f"{path}:{lineno}: bad value for {key!r}: expected {_EXPECTED.get(convert, 'text')}, got {value!r}"
            ) from None
    return values


def parse_config(config_file=None, overrides: dict | None = None) -> RunConfig:
    """Defaults, then the config file, then ``overrides`` (entries set to None are ignored)."""
    values = read_config_file(config_file) if config_file is not None else {}
    for key, value in (overrides or {}).items():
        if key not in _CONVERTERS:
            raise ConfigError(f"unknown setting {key!r}")
        if value is not None:
            values[key] = value
    return RunConfig(**values)


# argument parsing


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="covesim",
        description="Run the ALU, I2C or ADC testbench, or the transactions-vs-runtime benchmark.",
    )
    p.add_argument("--toplevel", choices=DESIGNS, help="design under test")
    p.add_argument("--test", metavar="GLOB", help="only run tests whose name matches GLOB")
    p.add_argument("--transactions", type=int, metavar="N", help="transactions per test (default: per test)")
    p.add_argument("--seed", type=int, metavar="U64", help="master seed (default 1)")
    p.add_argument("--cov-out", type=Path, metavar="PATH", help="coverage YAML path; a .txt table is written alongside")
    p.add_argument("--vcd", type=Path, metavar="PATH", help="write a value change dump")
    p.add_argument("--bench", action="store_true", default=None, help="run the benchmark ladder instead of tests")
    p.add_argument("--bench-out", type=Path, metavar="PATH", help="benchmark CSV path (default bench.csv)")
    p.add_argument("--repeats", type=int, metavar="N", help=f"benchmark repeats per rung (>= {MIN_REPEATS}, default 5)")
    p.add_argument("--ladder", type=_to_ladder, metavar="N,N,...", help="benchmark transaction counts")
    p.add_argument("--config", type=Path, metavar="FILE", help="key = value settings file")
    p.add_argument("--fail-fast", action="store_true", default=None, help="stop at the first failing test")
    p.add_argument("--horizon", type=parse_time, metavar="TIME", help="simulated time limit, e.g. 5ms")
    p.add_argument("--coverage-model", type=Path, metavar="FILE", help="load a coverage model instead of the built-in one")
    p.add_argument("--mem-preload", type=Path, metavar="FILE", help="I2C memory image to load (32 hex lines)")
    p.add_argument("--mem-dump", type=Path, metavar="FILE", help="write the final I2C memory image")
    p.add_argument("--log-level", metavar="LEVEL", help="diagnostic level on stderr (default WARNING)")
    return p


def _overrides(args) -> dict:
    out = {}
    for key in _CONVERTERS:
        if hasattr(args, key):
            out[key] = getattr(args, key)
    return out


# running


def _summary(report, cov_path) -> str:
    cov = report.coverage
    rows = [("test", "result", "sim time", "wall (s)", "coverage")]
    for t in report.tests:
        wall = f"{t.wall_finished:.3f}" if t.wall_finished is not None else "-"
        sim_time = format_time(t.finished_at) if t.finished_at is not None else "-"
        rows.append((t.name, t.state.name if not t.passed else "PASS", sim_time, wall, format_percent(cov.percent()) + "%"))
    widths = [max(len(r[i]) for r in rows) for i in range(5)]
    lines = [f"covesim  design={report.design}  seed={report.seed}  transactions={report.transactions}"]
    for r in rows:
        lines.append("  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip())
    failed = [t for t in report.tests if not t.passed]
    for t in failed:
        lines.append(f"  {t.name}: {t.message or 'did not finish'}")
    lines.append(f"total coverage {format_percent(cov.percent())}%  ->  {cov_path}")
    lines.append("PASS" if report.passed else f"FAIL ({len(failed)} of {len(report.tests)} tests)")
    return "\n".join(lines)


def run_tests(cfg: RunConfig, out=None) -> int:
    out = out or sys.stdout
    cases = REGISTRY.discover(cfg.test, design=cfg.toplevel)
    if not cases:
        raise ConfigError(f"no {cfg.toplevel} test matches {cfg.test!r}")
    if cfg.cov_out is None:
        cfg.cov_out = Path(f"{cfg.toplevel}_coverage.yaml")
    report, _ = run_cases(cfg.toplevel, cases, cfg.run_options())
    print(_summary(report, cfg.cov_out), file=out)
    return 0 if report.passed else 1


@dataclass
class BenchRecord:
    design: str
    transactions: int
    run_index: int
    wall_seconds: float
    events: int
    sim_time: int


def bench(designs, ladders: dict, repeats: int, base: RunConfig | None = None) -> list[BenchRecord]:
    """Run every rung ``repeats`` times; wall time covers the kernel run only."""
    if repeats < MIN_REPEATS:
        raise ConfigError(f"repeats must be at least {MIN_REPEATS}")
    base = base or RunConfig(bench=True)
    records = []
    for design in designs:
        cases = REGISTRY.discover(base.test, design=design)
        for n in ladders[design]:
            for i in range(repeats):
                options = base.run_options()
                options.transactions = n
                options.vcd = options.cov_out = options.mem_dump = None
                report, _ = run_cases(design, cases, options)
                if not report.passed:
                    raise CovesimError(f"benchmark run {design}/{n}/{i} failed")
                records.append(BenchRecord(design, n, i, report.wall_seconds, report.events, report.sim_time))
    return records


def write_bench_csv(records, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_FIELDS)
        for r in records:
            writer.writerow((r.design, r.transactions, r.run_index, f"{r.wall_seconds:.6f}", r.events))


def bench_medians(records) -> dict:
    groups: dict = {}
    for r in records:
        groups.setdefault((r.design, r.transactions), []).append(r.wall_seconds)
    return {key: statistics.median(v) for key, v in groups.items()}


def run_bench(cfg: RunConfig, out=None) -> int:
    out = out or sys.stdout
    designs = [cfg.toplevel] if cfg.toplevel else list(DEFAULT_LADDERS)
    ladders = {}
    for design in designs:
        ladder = cfg.ladder or DEFAULT_LADDERS.get(design)
        if ladder is None:
            raise ConfigError(f"no default benchmark ladder for {design}; pass --ladder")
        ladders[design] = ladder
    records = bench(designs, ladders, cfg.repeats, cfg)
    write_bench_csv(records, cfg.bench_out)
    print(f"benchmark  seed={cfg.seed}  repeats={cfg.repeats}  ->  {cfg.bench_out}", file=out)
    print(f"{'design':<8}{'transactions':>14}{'median wall (s)':>18}", file=out)
    for (design, n), median in bench_medians(records).items():
        print(f"{design:<8}{n:>14}{median:>18.4f}", file=out)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = parse_config(args.config, _overrides(args))
        configure_logging(getattr(logging, cfg.log_level.upper()))
        if cfg.bench:
            return run_bench(cfg)
        return run_tests(cfg)
    except (CovesimError, OSError, ValueError) as exc:
        print(f"covesim: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
