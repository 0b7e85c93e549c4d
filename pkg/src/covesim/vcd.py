"""IEEE 1364 value change dump output for the simulation kernel."""

from __future__ import annotations

import string

_ID_CHARS = string.printable[:94]  # the 94 printable non-space ASCII characters


def vcd_identifier(index: int) -> str:
    chars = []
    while True:
        index, rem = divmod(index, len(_ID_CHARS))
        chars.append(_ID_CHARS[rem])
        if index == 0:
            break
        index -= 1
    return "".join(chars)


def format_value(signal, value) -> str:
    if signal.is_real:
        return f"r{value!r} "
    if signal.width == 1:
        return str(value)
    return f"b{value} "


class VcdWriter:
    """Streams declarations and per-time-step value changes to a file.

    Timestamps are written only for time steps in which at least one signal
    ended the step with a different value than last dumped, so delta glitches
    never reach the file.
    """

    def __init__(self, path):
        self.path = path
        self._fh = open(path, "w", encoding="ascii", newline="\n")
        self._ids = {}
        self._last = {}
        self._started = False
        self._last_time = None

    def write_header(self, signals) -> None:
        fh = self._fh
        fh.write("$version covesim $end\n")
        fh.write("$timescale 1ps $end\n")
        tree: dict = {}
        for index, sig in enumerate(signals):
            self._ids[sig] = vcd_identifier(index)
            *scopes, leaf = sig.name.split(".")
            node = tree
            for scope in scopes:
                node = node.setdefault(scope, {})
            node[(leaf,)] = sig
        self._write_scope(tree)
        fh.write("$enddefinitions $end\n")

    def _write_scope(self, node) -> None:
        for key, child in node.items():
            if isinstance(key, tuple):
                sig = child
                vid = self._ids[sig]
                if sig.is_real:
                    self._fh.write(f"$var real 64 {vid} {key[0]} $end\n")
                elif sig.width == 1:
                    self._fh.write(f"$var wire 1 {vid} {key[0]} $end\n")
                else:
                    self._fh.write(f"$var wire {sig.width} {vid} {key[0]} [{sig.width - 1}:0] $end\n")
            else:
                self._fh.write(f"$scope module {key} $end\n")
                self._write_scope(child)
                self._fh.write("$upscope $end\n")

    def dump_step(self, time: int, changed) -> None:
        """Record the end-of-step values; ``changed`` is ignored on the first call."""
        fh = self._fh
        if not self._started:
            self._started = True
            self._last_time = time
            fh.write(f"#{time}\n$dumpvars\n")
            for sig, vid in self._ids.items():
                value = sig.value
                self._last[sig] = value
                fh.write(f"{format_value(sig, value)}{vid}\n")
            fh.write("$end\n")
            return
        lines = []
        for sig in changed:
            vid = self._ids.get(sig)
            if vid is None:
                continue
            value = sig.value
            if _same(self._last[sig], value):
                continue
            self._last[sig] = value
            lines.append(f"{format_value(sig, value)}{vid}\n")
        if lines:
            self._last_time = time
            fh.write(f"#{time}\n")
            fh.writelines(lines)

    def close(self, end_time: int | None = None) -> None:
        if self._fh.closed:
            return
        if end_time is not None and self._last_time is not None and end_time > self._last_time:
            self._fh.write(f"#{end_time}\n")
        self._fh.close()


def _same(a, b) -> bool:
    if isinstance(a, float):
        return a == b or (a != a and b != b)
    return a == b
