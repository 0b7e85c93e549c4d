"""Functional coverage: coverpoints with explicit bins, crosses, reports.

Percentages are kept as exact fractions and only rounded (half-to-even, two
decimals) when rendered.

Coverage models can be written in a small declarative format::

    version 1
    point op label op bins all=[0:7]
    point sign bins neg=[-128:-1], zero=0, pos={1 2 3}@2
    cross opXsign = op x sign

``name=value`` is a single-value bin, ``[lo:hi]`` an inclusive range, ``{...}``
an explicit value list, ``@n`` a per-bin hit threshold.  An indented line
continues the bin list of the previous ``point`` line.
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import yaml

from covesim.errors import BinExplosionError, CoverageDefinitionError, UnknownNameError

DEFAULT_BIN_CAP = 10**6
MODEL_VERSION = 1


@dataclass
class CoverBin:
    """One bucket; ``kind`` is ``value``, ``range`` or ``set`` (None for bins reloaded from a report)."""

    name: str
    kind: str | None
    spec: object = None
    at_least: int = 1
    hits: int = 0

    def __post_init__(self):
        if self.at_least < 1:
            raise CoverageDefinitionError(f"bin {self.name}: at_least must be >= 1")
        if self.kind == "range":
            lo, hi = self.spec
            if lo > hi:
                raise CoverageDefinitionError(f"bin {self.name}: empty range [{lo}:{hi}]")
        elif self.kind == "set":
            self.spec = frozenset(self.spec)
            if not self.spec:
                raise CoverageDefinitionError(f"bin {self.name}: empty value list")

    @property
    def covered(self) -> bool:
        return self.hits >= self.at_least

    def matches(self, value) -> bool:
        kind = self.kind
        if kind == "value":
            return value == self.spec
        if kind == "range":
            return self.spec[0] <= value <= self.spec[1]
        if kind == "set":
            return value in self.spec
        return False

    def describe(self) -> str:
        if self.kind == "value":
            return str(self.spec)
        if self.kind == "range":
            return f"[{self.spec[0]}:{self.spec[1]}]"
        if self.kind == "set":
            return "{" + " ".join(str(v) for v in sorted(self.spec)) + "}"
        return "?"


def value_bin(name: str, value, at_least: int = 1) -> CoverBin:
    return CoverBin(name, "value", value, at_least)


def range_bin(name: str, lo: int, hi: int, at_least: int = 1) -> CoverBin:
    return CoverBin(name, "range", (lo, hi), at_least)


def set_bin(name: str, values: Iterable, at_least: int = 1) -> CoverBin:
    return CoverBin(name, "set", values, at_least)


def split_bins(prefix: str, lo: int, hi: int, count: int) -> list[CoverBin]:
    """``count`` contiguous range bins covering ``[lo, hi]``, remainder spread over the last bins."""
    size = hi - lo + 1
    if count < 1 or count > size:
        raise CoverageDefinitionError(f"cannot split [{lo}:{hi}] into {count} bins")
    base, extra = divmod(size, count)
    bins, start = [], lo
    for i in range(count):
        width = base + (1 if i >= count - extra else 0)
        bins.append(range_bin(f"{prefix}{i}", start, start + width - 1))
        start += width
    return bins


class CoverPoint:
    kind = "point"

    def __init__(self, name: str, bins: Sequence[CoverBin], *, label: str | None = None, weight: int = 1):
        if not bins:
            raise CoverageDefinitionError(f"coverpoint {name} has no bins")
        names = [b.name for b in bins]
        if len(set(names)) != len(names):
            raise CoverageDefinitionError(f"coverpoint {name} has duplicate bin names")
        if weight < 0:
            raise CoverageDefinitionError(f"coverpoint {name}: negative weight")
        self.name = name
        self.label = label or name
        self.bins = list(bins)
        self.weight = weight
        self.unbinned = 0

    def __repr__(self) -> str:
        return f"<CoverPoint {self.name} {len(self.bins)} bins>"

    @property
    def bin_count(self) -> int:
        return len(self.bins)

    def _sample(self, value) -> int | None:
        first = None
        for i, b in enumerate(self.bins):
            if b.matches(value):
                b.hits += 1
                if first is None:
                    first = i
        if first is None:
            self.unbinned += 1
        return first

    def covered_count(self) -> int:
        return sum(1 for b in self.bins if b.covered)

    def percent(self) -> Fraction:
        return Fraction(100 * self.covered_count(), len(self.bins))


class CoverCross:
    """Cartesian product of member-point bins; hit counts stored sparsely."""

    kind = "cross"

    def __init__(self, name: str, points: Sequence[CoverPoint], *, weight: int = 1, at_least: int = 1):
        if len(points) < 2:
            raise CoverageDefinitionError(f"cross {name} needs at least two coverpoints")
        self.name = name
        self.points = list(points)
        self.weight = weight
        self.at_least = at_least
        self.hits: dict[tuple, int] = {}

    def __repr__(self) -> str:
        return f"<CoverCross {self.name} {self.bin_count} bins>"

    @property
    def bin_count(self) -> int:
        return math.prod(p.bin_count for p in self.points)

    def _sample(self, key: tuple) -> None:
        self.hits[key] = self.hits.get(key, 0) + 1

    def covered_count(self) -> int:
        return sum(1 for n in self.hits.values() if n >= self.at_least)

    def percent(self) -> Fraction:
        return Fraction(100 * self.covered_count(), self.bin_count)

    @property
    def bins(self) -> list[CoverBin]:
        out = []
        for key in itertools.product(*(range(p.bin_count) for p in self.points)):
            name = " x ".join(p.bins[i].name for p, i in zip(self.points, key))
            out.append(CoverBin(name, None, key, self.at_least, self.hits.get(key, 0)))
        return out


class _SnapshotItem:
    """A report item reloaded from YAML: names and counts only."""

    def __init__(self, name, kind, bins):
        self.name = name
        self.kind = kind
        self.bins = bins
        self.weight = 1

    @property
    def bin_count(self):
        return len(self.bins)

    def covered_count(self):
        return sum(1 for b in self.bins if b.covered)

    def percent(self):
        return Fraction(100 * self.covered_count(), len(self.bins))


def format_percent(p: Fraction) -> str:
    hundredths = round(Fraction(p) * 100)  # exact, ties to even
    return f"{hundredths // 100}.{hundredths % 100:02d}"


def _percent_number(p: Fraction) -> float:
    return float(format_percent(p))


class CoverageDb:
    """Named coverpoints and crosses in definition order."""

    def __init__(self, *, bin_cap: int = DEFAULT_BIN_CAP, seed: int | None = None):
        self.bin_cap = bin_cap
        self.seed = seed
        self.samples = 0
        self.items: dict[str, CoverPoint | CoverCross | _SnapshotItem] = {}
        self._by_label: dict[str, list[CoverPoint]] = {}
        self._crosses: list[CoverCross] = []
        self._snapshot_total: Fraction | None = None

    def __contains__(self, name: str) -> bool:
        return name in self.items

    def __getitem__(self, name: str):
        try:
            return self.items[name]
        except KeyError:
            raise UnknownNameError(f"no coverage item {name!r}") from None

    def _check_name(self, name: str) -> None:
        if name in self.items:
            raise CoverageDefinitionError(f"coverage item {name!r} already defined")

    def define_point(self, name: str, bins: Sequence[CoverBin], *, label: str | None = None, weight: int = 1) -> CoverPoint:
        self._check_name(name)
        if len(bins) > self.bin_cap:
            raise BinExplosionError(f"coverpoint {name}: {len(bins)} bins exceed the cap of {self.bin_cap}")
        point = CoverPoint(name, bins, label=label, weight=weight)
        self.items[name] = point
        self._by_label.setdefault(point.label, []).append(point)
        return point

    def define_auto_point(self, name: str, width: int, *, signed: bool = False, label: str | None = None) -> CoverPoint:
        """One bin per representable value; refused when that exceeds the bin cap."""
        count = 1 << width
        if count > self.bin_cap:
            raise BinExplosionError(
                f"auto bins for {name}: {width}-bit variable needs {count} bins, cap is {self.bin_cap}"
            )
        lo = -(1 << (width - 1)) if signed else 0
        return self.define_point(name, [value_bin(str(v), v) for v in range(lo, lo + count)], label=label)

    def define_cross(self, name: str, point_names: Sequence[str], *, weight: int = 1, at_least: int = 1) -> CoverCross:
        self._check_name(name)
        points = []
        for pname in point_names:
            item = self.items.get(pname)
            if not isinstance(item, CoverPoint):
                raise UnknownNameError(f"cross {name}: no coverpoint named {pname!r}")
            points.append(item)
        if len(set(point_names)) != len(point_names):
            raise CoverageDefinitionError(f"cross {name} repeats a coverpoint")
        product = math.prod(p.bin_count for p in points)
        if product > self.bin_cap:
            raise BinExplosionError(f"cross {name}: {product} bins exceed the cap of {self.bin_cap}")
        cross = CoverCross(name, points, weight=weight, at_least=at_least)
        self.items[name] = cross
        self._crosses.append(cross)
        return cross

    def sample(self, values: Mapping[str, int]) -> None:
        """Sample every point whose label is in ``values``; crosses need all their members."""
        by_label = self._by_label
        for label in values:
            if label not in by_label:
                raise UnknownNameError(f"no coverpoint samples label {label!r}")
        self.samples += 1
        matched = {}
        for label, value in values.items():
            for point in by_label[label]:
                matched[point.name] = point._sample(value)
        for cross in self._crosses:
            key = []
            for p in cross.points:
                idx = matched.get(p.name)
                if idx is None:
                    break
                key.append(idx)
            else:
                cross._sample(tuple(key))

    def percent(self, item: str | None = None) -> Fraction:
        if item is not None:
            return self[item].percent()
        if self._snapshot_total is not None:
            return self._snapshot_total
        total_weight = sum(i.weight for i in self.items.values())
        if not total_weight:
            return Fraction(0)
        return sum((i.percent() * i.weight for i in self.items.values()), Fraction(0)) / total_weight

    coverage_percent = percent

    def render_percent(self, item: str | None = None) -> str:
        return format_percent(self.percent(item))

    # reports

    def to_dict(self) -> dict:
        items = []
        for item in self.items.values():
            items.append(
                {
                    "name": item.name,
                    "kind": item.kind,
                    "bins": [
                        {"name": b.name, "hits": b.hits, "at_least": b.at_least, "covered": b.covered}
                        for b in item.bins
                    ],
                    "percent": _percent_number(item.percent()),
                }
            )
        return {
            "items": items,
            "footer": {
                "total_percent": _percent_number(self.percent()),
                "samples": self.samples,
                "seed": self.seed,
            },
        }

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False, default_flow_style=False, width=1000)

    def to_text(self) -> str:
        rows = [("item", "kind", "bins", "covered", "percent")]
        detail = []
        for item in self.items.values():
            rows.append((item.name, item.kind, str(item.bin_count), str(item.covered_count()), format_percent(item.percent())))
        name_w = max([len(r[0]) for r in rows] + [5])
        lines = [f"coverage report  seed={self.seed}  samples={self.samples}"]
        for r in rows:
            lines.append(f"{r[0]:<{name_w}}  {r[1]:<5}  {r[2]:>7}  {r[3]:>7}  {r[4]:>7}")
        lines.append(f"{'TOTAL':<{name_w}}  {'':<5}  {'':>7}  {'':>7}  {format_percent(self.percent()):>7}")
        for item in self.items.values():
            if item.kind != "point":
                continue
            detail.append(f"{item.name}:" + (f"  (unbinned {item.unbinned})" if getattr(item, "unbinned", 0) else ""))
            bw = max(len(b.name) for b in item.bins)
            for b in item.bins:
                mark = "covered" if b.covered else "-"
                detail.append(f"  {b.name:<{bw}}  {b.describe():<26}  hits={b.hits:<8} {mark}")
        return "\n".join(lines + [""] + detail) + "\n"

    def export_report(self, fmt: str, path) -> None:
        fmt = fmt.lower()
        if fmt == "yaml":
            text = self.to_yaml()
        elif fmt == "text":
            text = self.to_text()
        else:
            raise ValueError(f"unknown report format {fmt!r}")
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)

    @classmethod
    def from_yaml(cls, text: str) -> "CoverageDb":
        """Rebuild a read-only snapshot from an exported YAML report."""
        data = yaml.safe_load(text)
        footer = data["footer"]
        db = cls(seed=footer["seed"])
        db.samples = footer["samples"]
        for entry in data["items"]:
            bins = [CoverBin(b["name"], None, None, b["at_least"], b["hits"]) for b in entry["bins"]]
            db.items[entry["name"]] = _SnapshotItem(entry["name"], entry["kind"], bins)
        db._snapshot_total = Fraction(str(footer["total_percent"]))
        return db


# model files

_INT = r"[-+]?(?:0[xX][0-9a-fA-F_]+|0[bB][01_]+|\d[\d_]*)"
_BIN_RE = re.compile(
    rf"\s*(?P<name>[A-Za-z_][\w.]*)\s*=\s*"
    rf"(?:(?P<value>{_INT}|True|False)|\[\s*(?P<lo>{_INT})\s*:\s*(?P<hi>{_INT})\s*\]|\{{(?P<set>[^}}]*)\}})"
    rf"\s*(?:@\s*(?P<at>\d+))?\s*"
)


def _int(text: str) -> int:
    if text == "True":
        return 1
    if text == "False":
        return 0
    return int(text, 0)


def _parse_bins(text: str, lineno: int) -> list[CoverBin]:
    bins = []
    for chunk in _split_top_level(text):
        m = _BIN_RE.fullmatch(chunk)
        if m is None:
            raise CoverageDefinitionError(f"line {lineno}: bad bin definition {chunk.strip()!r}")
        at = int(m.group("at") or 1)
        name = m.group("name")
        if m.group("value") is not None:
            bins.append(value_bin(name, _int(m.group("value")), at))
        elif m.group("lo") is not None:
            bins.append(range_bin(name, _int(m.group("lo")), _int(m.group("hi")), at))
        else:
            bins.append(set_bin(name, [_int(v) for v in m.group("set").split()], at))
    return bins


def _split_top_level(text: str) -> list[str]:
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch in "[{":
            depth += 1
        elif ch in "]}":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    if "".join(cur).strip():
        parts.append("".join(cur))
    return [p for p in parts if p.strip()]


def _logical_lines(text: str):
    current, start = None, 0
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        if line[0].isspace() and current is not None:
            current += " " + line.strip()
            continue
        if current is not None:
            yield start, current
        current, start = line.strip(), lineno
    if current is not None:
        yield start, current


def load_model(text: str, db: CoverageDb | None = None) -> CoverageDb:
    """Define the points and crosses described by a model file's text."""
    db = db if db is not None else CoverageDb()
    version_seen = False
    for lineno, line in _logical_lines(text):
        words = line.split()
        head = words[0]
        if head == "version":
            if len(words) != 2 or words[1] != str(MODEL_VERSION):
                raise CoverageDefinitionError(f"line {lineno}: unsupported model version {line!r}")
            version_seen = True
        elif head == "point":
            _parse_point(db, line, lineno)
        elif head == "cross":
            m = re.fullmatch(r"cross\s+(\S+)\s*=\s*(.+?)(?:\s+weight\s+(\d+))?", line)
            if m is None:
                raise CoverageDefinitionError(f"line {lineno}: bad cross definition {line!r}")
            members = [p.strip() for p in re.split(r"\s+x\s+", m.group(2))]
            db.define_cross(m.group(1), members, weight=int(m.group(3) or 1))
        else:
            raise CoverageDefinitionError(f"line {lineno}: unknown directive {head!r}")
    if not version_seen:
        raise CoverageDefinitionError("model file has no 'version' line")
    return db


def _parse_point(db: CoverageDb, line: str, lineno: int) -> None:
    words = line.split(None, 2)
    if len(words) < 3:
        raise CoverageDefinitionError(f"line {lineno}: point needs a name and bins")
    name, rest = words[1], words[2]
    options = {}
    while True:
        m = re.match(r"(label|weight)\s+(\S+)\s+", rest)
        if not m:
            break
        options[m.group(1)] = m.group(2)
        rest = rest[m.end():]
    label = options.get("label")
    weight = int(options.get("weight", 1))
    m = re.fullmatch(r"auto\s+(\d+)(\s+signed)?", rest.strip())
    if m:
        db.define_auto_point(name, int(m.group(1)), signed=bool(m.group(2)), label=label)
        return
    m = re.match(r"bins\s+", rest)
    if not m:
        raise CoverageDefinitionError(f"line {lineno}: expected 'bins' or 'auto' in {line!r}")
    db.define_point(name, _parse_bins(rest[m.end():], lineno), label=label, weight=weight)


def builtin_model(design: str) -> str:
    try:
        return resources.files("covesim.models").joinpath(f"{design}.cov").read_text(encoding="utf-8")
    except FileNotFoundError:
        raise UnknownNameError(f"no built-in coverage model for {design!r}") from None


def load_model_file(path, db: CoverageDb | None = None) -> CoverageDb:
    return load_model(Path(path).read_text(encoding="utf-8"), db)
