"""In-order scoreboard comparing DUT responses with predicted values."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Any, Callable

from covesim.errors import TestFailure
from covesim.sim import format_time


@dataclass
class Mismatch:
    index: int
    time: int
    expected: Any
    actual: Any
    context: dict


def _render(value) -> str:
    to_literal = getattr(value, "to_literal", None)
    if to_literal is not None:
        return to_literal("h")
    if isinstance(value, int) and not isinstance(value, bool):
        return f"{value} (0x{value:x})"
    return repr(value)


class Scoreboard:
    """Each expected value is consumed by exactly one :meth:`check`."""

    def __init__(self, sim, name: str = "scoreboard", compare: Callable[[Any, Any], bool] | None = None, raise_on_mismatch: bool = True):
        self.sim = sim
        self.name = name
        self.compare = compare or (lambda actual, expected: actual == expected)
        self.raise_on_mismatch = raise_on_mismatch
        self.expected: deque = deque()
        self.mismatches: list[Mismatch] = []
        self.checked = 0

    def expect(self, value) -> None:
        self.expected.append(value)

    @property
    def pending(self) -> int:
        return len(self.expected)

    def check(self, actual, **context) -> bool:
        if not self.expected:
            raise TestFailure(f"{self.name}: DUT response {_render(actual)} with nothing expected")
        expected = self.expected.popleft()
        index = self.checked
        self.checked += 1
        if self.compare(actual, expected):
            return True
        record = Mismatch(index, self.sim.now, expected, actual, context)
        self.mismatches.append(record)
        if self.raise_on_mismatch:
            detail = ", ".join(f"{k}={_render(v)}" for k, v in context.items())
            raise TestFailure(
                f"{self.name}: transaction {index} at {format_time(self.sim.now)}: "
                f"expected {_render(expected)}, got {_render(actual)}" + (f" [{detail}]" if detail else "")
            )
        return False
