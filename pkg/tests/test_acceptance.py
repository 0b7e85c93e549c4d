"""End-to-end acceptance checks; each prints one PASS/FAIL line."""

import contextlib
import subprocess
import sys
import time
from fractions import Fraction
from pathlib import Path

import pytest
import yaml

from covesim.cli import DEFAULT_LADDERS, bench, bench_medians, main
from covesim.coverage import CoverageDb, format_percent
from covesim.errors import BinExplosionError
from covesim.sim import TaskState
from covesim.tb import run_alu_test, run_i2c_soak, run_i2c_tests

TESTS = Path(__file__).parent


@pytest.fixture
def criterion(capsys):
    @contextlib.contextmanager
    def check(number, title):
        start = time.perf_counter()
        try:
            yield
        except BaseException as exc:
            with capsys.disabled():
                print(f"\nACCEPTANCE {number} FAIL  {title}: {type(exc).__name__}: {exc}")
            raise
        with capsys.disabled():
            print(f"\nACCEPTANCE {number} PASS  {title} ({time.perf_counter() - start:.1f} s)")

    return check


def _cli_yaml(tmp_path, name, *args):
    out = tmp_path / f"{name}.yaml"
    code = main([*args, "--cov-out", str(out)])
    return code, yaml.safe_load(out.read_text())


def _item(data, name):
    return next(i for i in data["items"] if i["name"] == name)


@pytest.mark.slow
def test_1_alu_coverage_closure(tmp_path, criterion):
    with criterion(1, "ALU 20000 transactions reach 100.00% on every seed tried"):
        for seed in (1, 7, 99, 2**64 - 1):
            start = time.perf_counter()
            code, data = _cli_yaml(tmp_path, f"alu{seed}", "--toplevel", "alu", "--transactions", "20000", "--seed", str(seed))
            elapsed = time.perf_counter() - start
            assert code == 0
            assert format(data["footer"]["total_percent"], ".2f") == "100.00"
            assert [i["name"] for i in data["items"]] == ["a", "b", "op", "aXb", "aXop", "bXop", "aXbXop"]
            assert all(i["percent"] == 100.0 for i in data["items"])
            assert elapsed < 30


def test_2_adc_coverage_closure(tmp_path, criterion):
    with criterion(2, "ADC 210 transactions reach analog_in_tb 100.00%"):
        for seed in (1, 7, 99):
            start = time.perf_counter()
            code, data = _cli_yaml(tmp_path, f"adc{seed}", "--toplevel", "adc", "--transactions", "210", "--seed", str(seed))
            assert time.perf_counter() - start < 5
            assert code == 0
            assert _item(data, "analog_in_tb")["percent"] == 100.0


def test_3_i2c_structural_coverage(tmp_path, criterion):
    with criterion(3, "I2C condition items 50.00%, repeated start and addresses 100.00%, data = covered/16"):
        for seed in (1, 7, 99):
            code, data = _cli_yaml(tmp_path, f"i2c{seed}", "--toplevel", "i2c", "--seed", str(seed))
            assert code == 0
            for name in ("c_start", "c_stop", "c_write", "c_read", "c_ack", "c_nack"):
                item = _item(data, name)
                assert item["percent"] == 50.0
                assert [b["covered"] for b in item["bins"]] == [True, False]
            assert _item(data, "c_repeated_start")["percent"] == 100.0
            assert _item(data, "c_mem_addr")["percent"] == 100.0
            mem_data = _item(data, "c_mem_data")
            covered = sum(b["covered"] for b in mem_data["bins"])
            assert len(mem_data["bins"]) == 16 and covered > 0
            assert format(mem_data["percent"], ".2f") == format_percent(Fraction(100 * covered, 16))
        report = run_i2c_tests(seed=1)
        db = report.coverage
        assert db.percent("c_mem_data") == Fraction(100 * db["c_mem_data"].covered_count(), 16)


@pytest.mark.slow
def test_4_scoreboard_soundness(criterion):
    with criterion(4, "10^5 ALU transactions and 10^3 I2C operations without a mismatch"):
        start = time.perf_counter()
        alu = run_alu_test(100_000, seed=4)
        assert alu.passed and alu.transactions == 100_000
        soak, env = run_i2c_soak(1000, seed=4)
        assert soak.passed, soak.tests[0].message
        assert env.stop_checks >= 1000 and env.incoherent == []
        assert env.scoreboard.mismatches == [] and env.scoreboard.pending == 0
        assert time.perf_counter() - start < 60


def test_5_regressions(criterion):
    with criterion(5, "uninitialized ALU, 32-bit auto bins and missing pull-ups fail as expected"):
        alu = run_alu_test(1000, initialize=False)
        first = alu.test("alu_random")
        assert first.state is TaskState.FAILED
        assert "transaction 0 at 20 ns" in first.message and "32'hxxxxxxxx" in first.message
        with pytest.raises(BinExplosionError):
            CoverageDb().define_auto_point("a", 32, signed=True)
        i2c = run_i2c_tests(pull_ups=False)
        failure = i2c.tests[0]
        assert failure.state is TaskState.FAILED
        assert "bus not idle" in failure.message and "SDA=z" in failure.message


def test_6_determinism(tmp_path, criterion):
    with criterion(6, "same config and seed give byte-identical coverage YAML and VCD"):
        for design, extra in (("alu", ["--transactions", "2000"]), ("i2c", []), ("adc", ["--transactions", "210"])):
            outputs = []
            for run in ("first", "second"):
                cov, vcd = tmp_path / f"{design}_{run}.yaml", tmp_path / f"{design}_{run}.vcd"
                code = main(["--toplevel", design, "--seed", "42", *extra, "--cov-out", str(cov), "--vcd", str(vcd)])
                assert code == 0
                outputs.append((cov.read_bytes(), vcd.read_bytes()))
            assert outputs[0] == outputs[1]
            assert len(outputs[0][1]) > 1000


@pytest.mark.slow
def test_7_benchmark_shape(tmp_path, criterion):
    with criterion(7, "median wall time strictly increases along the ALU and ADC ladders"):
        start = time.perf_counter()
        records = bench(["alu", "adc"], DEFAULT_LADDERS, repeats=5)
        assert len(records) == 2 * 3 * 5
        medians = bench_medians(records)
        for design, ladder in DEFAULT_LADDERS.items():
            series = [medians[(design, n)] for n in ladder]
            assert all(a < b for a, b in zip(series, series[1:])), (design, series)
        assert time.perf_counter() - start < 300


def test_8_oracle_suites(criterion):
    with criterion(8, "truth-table, bin-matcher and constraint-soundness suites pass"):
        proc = subprocess.run(
            [
                sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider",
                str(TESTS / "test_logic.py"),
                str(TESTS / "test_coverage.py"),
                str(TESTS / "test_crv.py"),
            ],
            capture_output=True,
            text=True,
            timeout=600,
        )
        assert proc.returncode == 0, proc.stdout[-2000:]
        assert " failed" not in proc.stdout
