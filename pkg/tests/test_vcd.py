import pytest

from covesim.sim import Clock, Delta, Simulator, Timer
from covesim.vcd import vcd_identifier

NS = 1000


def parse_vcd(text):
    """Minimal independent reader: returns (timescale, vars by id, list of (time, id, value))."""
    tokens = text.split()
    i = 0
    timescale = None
    variables = {}
    scope = []
    changes = []
    now = None
    while i < len(tokens):
        tok = tokens[i]
        if tok == "$timescale":
            timescale = tokens[i + 1]
            i += 3
        elif tok == "$scope":
            scope.append(tokens[i + 2])
            i += 4
        elif tok == "$upscope":
            scope.pop()
            i += 2
        elif tok == "$var":
            kind, width, vid, name = tokens[i + 1 : i + 5]
            variables[vid] = (".".join(scope + [name]), kind, int(width))
            i = tokens.index("$end", i) + 1
        elif tok in ("$version",):
            i = tokens.index("$end", i) + 1
        elif tok in ("$enddefinitions", "$dumpvars"):
            i += 1 if tok == "$dumpvars" else 2
        elif tok == "$end":
            i += 1
        elif tok.startswith("#"):
            now = int(tok[1:])
            i += 1
        elif tok[0] in "br":
            changes.append((now, tokens[i + 1], tok[1:]))
            i += 2
        else:
            changes.append((now, tok[1:], tok[0]))
            i += 1
    return timescale, variables, changes


def _clock_design(path, until=100 * NS):
    sim = Simulator()
    clk = sim.signal("top.clk")
    sim.spawn(Clock(clk, 20, "ns").start(), background=True)
    sim.dump_vcd(path)
    sim.run(until=until)


def test_clock_vcd_has_ten_toggles(tmp_path):
    path = tmp_path / "clk.vcd"
    _clock_design(path)
    timescale, variables, changes = parse_vcd(path.read_text())
    assert timescale == "1ps"
    assert [v[0] for v in variables.values()] == ["top.clk"]
    initial = [c for c in changes if c[0] == 0]
    toggles = [c for c in changes if c[0] > 0]
    assert initial == [(0, vcd_identifier(0), "0")]
    assert len(toggles) == 10
    assert [t for t, _, _ in toggles] == list(range(10 * NS, 101 * NS, 10 * NS))


def test_vcd_is_byte_identical_across_runs(tmp_path):
    a, b = tmp_path / "a.vcd", tmp_path / "b.vcd"
    _clock_design(a, until=500 * NS)
    _clock_design(b, until=500 * NS)
    assert a.read_bytes() == b.read_bytes()


def test_empty_design_vcd(tmp_path):
    sim = Simulator()
    path = tmp_path / "empty.vcd"
    sim.dump_vcd(path)

    async def body():
        await Timer(10)

    sim.spawn(body())
    sim.run()
    text = path.read_text()
    assert "$enddefinitions $end" in text
    assert "$var" not in text
    timescale, variables, changes = parse_vcd(text)
    assert variables == {} and changes == []


def test_vcd_renders_x_z_and_vectors_and_reals(tmp_path):
    sim = Simulator()
    s = sim.signal("dut.s")
    bus = sim.signal("dut.bus", 4)
    r = sim.real_signal("tb.vin")
    path = tmp_path / "xz.vcd"
    sim.dump_vcd(path)

    async def body():
        s.value = "x"
        bus.value = "4'b10xz"
        await Timer(5)
        s.value = "z"
        r.value = 1.25
        await Timer(5)

    sim.spawn(body())
    sim.run()
    text = path.read_text()
    _, variables, changes = parse_vcd(text)
    names = {vid: v[0] for vid, v in variables.items()}
    by_name = [(t, names[vid], val) for t, vid, val in changes]
    assert (0, "dut.s", "x") in by_name
    assert (0, "dut.bus", "10xz") in by_name
    assert (5, "dut.s", "z") in by_name
    assert (5, "tb.vin", "1.25") in by_name
    assert "$var real 64" in text
    assert "$scope module tb $end" in text


def test_vcd_skips_glitches_within_a_time_step(tmp_path):
    sim = Simulator()
    s = sim.signal("s")
    path = tmp_path / "g.vcd"
    sim.dump_vcd(path)

    async def body():
        s.value = 0
        await Timer(5)
        s.value = 1
        await Delta()
        s.value = 0
        await Timer(5)

    sim.spawn(body())
    sim.run()
    _, _, changes = parse_vcd(path.read_text())
    assert [c for c in changes if c[0] and c[0] > 0] == []


def test_vcd_unwritable_path(tmp_path):
    sim = Simulator()
    with pytest.raises(OSError):
        sim.dump_vcd(tmp_path / "missing_dir" / "x.vcd")


def test_identifiers_unique():
    ids = {vcd_identifier(i) for i in range(20_000)}
    assert len(ids) == 20_000
    assert all(" " not in i and i.isprintable() for i in ids)
