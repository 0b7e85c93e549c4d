"""Deterministic discrete-event kernel with delta cycles and coroutine tasks.

Tasks are ``async`` functions that suspend on triggers::

    async def stimulus(dut):
        await RisingEdge(dut.clk)
        dut.a.value = 5        # visible to readers after the next settle
        await Timer(10, "ns")

Scheduling order is (time, delta, FIFO).  All writes issued during a delta are
applied together when the delta settles; tasks whose edge triggers fire run
in the following delta.  Time is an integer count of picoseconds.
"""

from __future__ import annotations

import enum
import heapq
import logging
import re
import time as _walltime
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Coroutine

from covesim.errors import KernelClosedError, OscillationError, UnknownNameError, WidthError
from covesim.logic import LogicVector, ValueLike, resolve_vectors
from covesim.vcd import VcdWriter

logger = logging.getLogger("covesim")

UNITS = {
    "ps": 1,
    "ns": 1_000,
    "us": 1_000_000,
    "ms": 1_000_000_000,
    "s": 1_000_000_000_000,
}

DEFAULT_WRITER = "tb"


def to_ps(amount, units: str = "ps") -> int:
    """Convert a time amount to an exact integer number of picoseconds."""
    try:
        factor = UNITS[units]
    except KeyError:
        raise ValueError(f"unknown time unit {units!r}; expected one of {', '.join(UNITS)}") from None
    ps = Fraction(str(amount)) * factor if isinstance(amount, float) else Fraction(amount) * factor
    if ps.denominator != 1:
        raise ValueError(f"{amount} {units} is not a whole number of picoseconds")
    if ps < 0:
        raise ValueError("time must be non-negative")
    return int(ps)


_TIME_RE = re.compile(r"\s*(\d+(?:\.\d+)?)\s*([a-z]*)\s*")


def parse_time(text: str | int) -> int:
    """Parse ``"20ns"``, ``"2.5 us"`` or a bare picosecond count."""
    if isinstance(text, int):
        return to_ps(text)
    m = _TIME_RE.fullmatch(text)
    if not m:
        raise ValueError(f"cannot parse time {text!r}")
    return to_ps(Fraction(m.group(1)), m.group(2) or "ps")


def format_time(ps: int) -> str:
    for unit in ("s", "ms", "us", "ns"):
        if ps % UNITS[unit] == 0 and ps >= UNITS[unit]:
            return f"{ps // UNITS[unit]} {unit}"
    return f"{ps} ps"


class EdgeKind(enum.Enum):
    RISING = "rising"
    FALLING = "falling"
    ANY = "any"


class TaskState(enum.Enum):
    READY = "READY"
    WAITING = "WAITING"
    DONE = "DONE"
    FAILED = "FAILED"


# signals


class Signal:
    """A named net whose value is the resolution of every writer's contribution."""

    is_real = False
    __slots__ = ("name", "width", "_sim", "_cur", "_drivers", "_pull", "_waiters")

    def __init__(self, sim: "Simulator", name: str, width: int, pull_up: bool = False):
        self.name = name
        self.width = width
        self._sim = sim
        self._drivers: dict[str, LogicVector] = {}
        self._pull = (1 << width) - 1 if pull_up else 0
        self._waiters: list = []
        self._cur = self._resolve()

    def __repr__(self) -> str:
        return f"<Signal {self.name}[{self.width}] = {self._cur.to_literal('b')}>"

    @property
    def value(self) -> LogicVector:
        return self._cur

    @value.setter
    def value(self, value: ValueLike) -> None:
        self.drive(value, DEFAULT_WRITER)

    @property
    def drivers(self) -> dict:
        return dict(self._drivers)

    @property
    def pull_up(self) -> bool:
        return bool(self._pull)

    def drive(self, value: ValueLike, writer: str = DEFAULT_WRITER) -> None:
        self._sim._schedule_write(self, writer, LogicVector.coerce(value, self.width))

    def release(self, writer: str = DEFAULT_WRITER) -> None:
        self._sim._schedule_write(self, writer, LogicVector.all_z(self.width))

    def set_pull_up(self, enabled: bool = True) -> None:
        self._pull = (1 << self.width) - 1 if enabled else 0
        self._sim._touch(self)

    def _resolve(self) -> LogicVector:
        drivers = self._drivers
        if not self._pull and len(drivers) == 1:
            for v in drivers.values():
                return v
        result = resolve_vectors(self.width, drivers.values(), self._pull)
        if len(drivers) > 1 and result.has_x and not any(v.has_x for v in drivers.values()):
            self._sim._diag(logging.WARNING, f"driver conflict on {self.name}: {self._describe_drivers()}")
        return result

    def _describe_drivers(self) -> str:
        return ", ".join(f"{w}={v.to_literal('b')}" for w, v in self._drivers.items())


class RealSignal:
    """A real-valued net (single logical driver, last write wins)."""

    is_real = True
    width = 64
    __slots__ = ("name", "_sim", "_cur", "_drivers", "_waiters")

    def __init__(self, sim: "Simulator", name: str, initial: float = 0.0):
        self.name = name
        self._sim = sim
        self._cur = float(initial)
        self._drivers: dict[str, float] = {}
        self._waiters: list = []

    def __repr__(self) -> str:
        return f"<RealSignal {self.name} = {self._cur!r}>"

    @property
    def value(self) -> float:
        return self._cur

    @value.setter
    def value(self, value: float) -> None:
        self.drive(value)

    def drive(self, value: float, writer: str = DEFAULT_WRITER) -> None:
        self._sim._schedule_write(self, writer, float(value))

    def _resolve(self) -> float:
        if not self._drivers:
            return self._cur
        return next(reversed(self._drivers.values()))


def _lsb(v: LogicVector):
    if v.unknown_mask & 1:
        return None
    return v._val & 1


# triggers


class Trigger:
    def __await__(self):
        return (yield self)

    def _arm(self, sim: "Simulator", task: "TaskHandle") -> None:
        raise NotImplementedError


class Timer(Trigger):
    __slots__ = ("delay",)

    def __init__(self, amount, units: str = "ps"):
        self.delay = to_ps(amount, units)

    def __repr__(self) -> str:
        return f"Timer({format_time(self.delay)})"

    def _arm(self, sim, task):
        if self.delay == 0:
            sim._ready.append(task)
        else:
            sim._push_timer(sim.now + self.delay, task)


class Delta(Trigger):
    """Resume in the next delta cycle of the current time step."""

    def _arm(self, sim, task):
        sim._ready.append(task)


class _EdgeWait:
    __slots__ = ("task", "kind", "fired", "trigger")

    def __init__(self, task, kind, trigger):
        self.task = task
        self.kind = kind
        self.trigger = trigger
        self.fired = False


class Edge(Trigger):
    """Resume on a value change of any of ``signals`` (or rising/falling of bit 0)."""

    __slots__ = ("signals", "kind")

    def __init__(self, *signals, kind: EdgeKind = EdgeKind.ANY):
        if not signals:
            raise ValueError("Edge needs at least one signal")
        self.signals = signals
        self.kind = kind

    def __repr__(self) -> str:
        names = ", ".join(getattr(s, "name", str(s)) for s in self.signals)
        return f"Edge({names}, {self.kind.value})"

    def _arm(self, sim, task):
        signals = [sim._lookup(sig) for sig in self.signals]
        if self.kind is not EdgeKind.ANY:
            for sig in signals:
                if sig.is_real:
                    raise TypeError(f"{self.kind.value} edge is undefined on real signal {sig.name}")
        wait = _EdgeWait(task, self.kind, self)
        for sig in signals:
            waiters = sig._waiters
            if len(waiters) > 16:
                # waits already satisfied through another signal of the same Edge
                waiters[:] = [w for w in waiters if not w.fired]
            waiters.append(wait)


def RisingEdge(signal) -> Edge:
    return Edge(signal, kind=EdgeKind.RISING)


def FallingEdge(signal) -> Edge:
    return Edge(signal, kind=EdgeKind.FALLING)


class Join(Trigger):
    __slots__ = ("handle",)

    def __init__(self, handle: "TaskHandle"):
        self.handle = handle

    def _arm(self, sim, task):
        if self.handle.done:
            sim._ready.append(task)
        else:
            self.handle._joiners.append(task)


class TaskHandle:
    """A spawned coroutine and its lifecycle state."""

    def __init__(self, sim: "Simulator", task_id: int, coro: Coroutine, name: str, background: bool, test: bool):
        self.id = task_id
        self.name = name
        self.background = background
        self.test = test
        self.state = TaskState.READY
        self.message: str | None = None
        self.result: Any = None
        self.finished_at: int | None = None
        self.wall_finished: float | None = None
        self._sim = sim
        self._coro = coro
        self._send: Any = None
        self._throw: BaseException | None = None
        self._joiners: list = []

    def __repr__(self) -> str:
        return f"<Task {self.id} {self.name} {self.state.value}>"

    def __await__(self):
        return Join(self).__await__()

    @property
    def done(self) -> bool:
        return self.state in (TaskState.DONE, TaskState.FAILED)

    def join(self) -> Join:
        return Join(self)


# reporting


@dataclass
class TaskSummary:
    name: str
    state: TaskState
    message: str | None = None
    finished_at: int | None = None
    test: bool = False
    wall_finished: float | None = None  # seconds into run() when the task ended

    @property
    def passed(self) -> bool:
        return self.state is TaskState.DONE


@dataclass
class RunReport:
    """Outcome of one :meth:`Simulator.run`."""

    tasks: list[TaskSummary] = field(default_factory=list)
    wall_seconds: float = 0.0
    events: int = 0
    sim_time: int = 0
    starved: list[str] = field(default_factory=list)
    transactions: int = 0
    coverage: Any = None
    seed: int | None = None
    design: str | None = None

    @property
    def tests(self) -> list[TaskSummary]:
        return [t for t in self.tasks if t.test]

    @property
    def passed(self) -> bool:
        tests = self.tests or self.tasks
        return bool(tests) and all(t.passed for t in tests)

    def test(self, name: str) -> TaskSummary:
        for t in self.tasks:
            if t.name == name:
                return t
        raise UnknownNameError(name)


class _SimTimeAdapter(logging.LoggerAdapter):
    def process(self, msg, kwargs):
        kwargs.setdefault("extra", {})["simtime"] = self.extra["sim"].now
        return msg, kwargs


class Simulator:
    """One simulation instance: signals, tasks, the event queue and reports.

    ``horizon`` bounds simulated time (ps); ``delta_limit`` caps delta cycles per
    time step; ``x_edges`` makes X/Z->1 count as a rising edge (and X/Z->0 as
    falling).  A kernel instance is confined to the thread that created it.
    """

    def __init__(
        self,
        *,
        horizon: int | None = None,
        delta_limit: int = 1000,
        x_edges: bool = False,
        fail_fast: bool = False,
    ):
        self.now = 0
        self.delta = 0
        self.horizon = horizon
        self.delta_limit = delta_limit
        self.x_edges = x_edges
        self.fail_fast = fail_fast
        self.events = 0
        self.diagnostics: list = []
        self.log = _SimTimeAdapter(logger, {"sim": self})
        self._signals: dict[str, Signal | RealSignal] = {}
        self._tasks: list[TaskHandle] = []
        self._ready: deque = deque()
        self._timers: list = []
        self._seq = 0
        self._pending: list = []
        self._touched: dict = {}
        self._step_changes: dict = {}
        self._settle_hooks: list = []
        self._live_foreground = 0
        self._had_foreground = False
        self._failed_test = False
        self._closed = False
        self._running = False
        self._vcd: VcdWriter | None = None
        self._wall_start = 0.0

    # construction

    def signal(self, name: str, width: int = 1, *, pull_up: bool = False) -> Signal:
        self._check_new_name(name)
        if width < 1:
            raise WidthError(f"signal {name} needs a positive width")
        sig = Signal(self, name, width, pull_up)
        self._signals[name] = sig
        return sig

    def real_signal(self, name: str, initial: float = 0.0) -> RealSignal:
        self._check_new_name(name)
        sig = RealSignal(self, name, initial)
        self._signals[name] = sig
        return sig

    def _check_new_name(self, name: str) -> None:
        if self._running or self._closed:
            raise KernelClosedError("signals must be created before run()")
        if name in self._signals:
            raise ValueError(f"duplicate signal name {name!r}")
        if not name or any(not part for part in name.split(".")):
            raise ValueError(f"bad hierarchical name {name!r}")

    @property
    def signals(self) -> dict:
        return dict(self._signals)

    def signal_by_name(self, name: str):
        try:
            return self._signals[name]
        except KeyError:
            raise UnknownNameError(f"no signal named {name!r}") from None

    def _lookup(self, signal):
        return self.signal_by_name(signal) if isinstance(signal, str) else signal

    def write(self, signal, value, writer: str = DEFAULT_WRITER) -> None:
        self._lookup(signal).drive(value, writer)

    def release(self, signal, writer: str = DEFAULT_WRITER) -> None:
        self._lookup(signal).release(writer)

    def read(self, signal):
        return self._lookup(signal).value

    def on_settle(self, hook) -> None:
        """Call ``hook(sim)`` after every delta settle."""
        self._settle_hooks.append(hook)

    def dump_vcd(self, path) -> None:
        if self._running or self._closed:
            raise KernelClosedError("dump_vcd() must be called before run()")
        self._vcd = VcdWriter(path)

    # tasks

    def spawn(self, coro: Coroutine, *, name: str | None = None, background: bool = False, test: bool = False) -> TaskHandle:
        """Schedule ``coro`` to start in the next delta; same-time tasks run in spawn order."""
        if self._closed:
            if hasattr(coro, "close"):
                coro.close()
            raise KernelClosedError("cannot spawn after the run has completed")
        handle = TaskHandle(self, len(self._tasks), coro, name or getattr(coro, "__name__", "task"), background, test)
        self._tasks.append(handle)
        if not background:
            self._live_foreground += 1
            self._had_foreground = True
        self._ready.append(handle)
        return handle

    start_soon = spawn

    @property
    def tasks(self) -> list[TaskHandle]:
        return list(self._tasks)

    def _step(self, task: TaskHandle) -> None:
        if task.done:
            return
        self.events += 1
        task.state = TaskState.READY
        try:
            if task._throw is not None:
                exc, task._throw = task._throw, None
                trigger = task._coro.throw(exc)
            else:
                send, task._send = task._send, None
                trigger = task._coro.send(send)
        except StopIteration as stop:
            self._finish(task, TaskState.DONE, result=stop.value)
            return
        except Exception as exc:  # task failures are reported, never propagated
            message = f"{type(exc).__name__}: {exc}"
            self._finish(task, TaskState.FAILED, message=message)
            self._diag(logging.ERROR, f"task {task.name} failed: {message}")
            return
        task.state = TaskState.WAITING
        if not isinstance(trigger, Trigger):
            task._throw = TypeError(f"task awaited a non-trigger object {trigger!r}")
            self._ready.append(task)
            return
        try:
            trigger._arm(self, task)
        except Exception as exc:
            task._throw = exc
            self._ready.append(task)

    def _finish(self, task, state, *, result=None, message=None) -> None:
        task.state = state
        task.result = result
        task.message = message
        task.finished_at = self.now
        task.wall_finished = _walltime.perf_counter() - self._wall_start
        if not task.background:
            self._live_foreground -= 1
        if state is TaskState.FAILED and task.test:
            self._failed_test = True
        for joiner in task._joiners:
            self._ready.append(joiner)
        task._joiners.clear()

    def _push_timer(self, when: int, task) -> None:
        self._seq += 1
        heapq.heappush(self._timers, (when, self._seq, task))

    # writes and settling

    def _schedule_write(self, sig, writer, value) -> None:
        if self._closed:
            raise KernelClosedError("the run has completed")
        self._pending.append((sig, writer, value))

    def _touch(self, sig) -> None:
        if self._running:
            self._touched[sig] = None
        else:
            sig._cur = sig._resolve()

    def _settle(self) -> None:
        touched = self._touched
        for sig, writer, value in self._pending:
            drivers = sig._drivers
            drivers.pop(writer, None)
            drivers[writer] = value
            touched[sig] = None
        self._pending.clear()
        if touched:
            self._touched = {}
            for sig in touched:
                new = sig._resolve()
                old = sig._cur
                if new == old or (sig.is_real and new != new and old != old):
                    continue
                sig._cur = new
                self._step_changes[sig] = None
                if sig._waiters:
                    self._fire(sig, old, new)
        for hook in self._settle_hooks:
            hook(self)

    def _fire(self, sig, old, new) -> None:
        if sig.is_real:
            rising = falling = False
        else:
            o, n = _lsb(old), _lsb(new)
            if self.x_edges:
                rising = n == 1 and o != 1
                falling = n == 0 and o != 0
            else:
                rising = o == 0 and n == 1
                falling = o == 1 and n == 0
        keep = []
        ready = self._ready
        for wait in sig._waiters:
            if wait.fired:
                continue
            kind = wait.kind
            if kind is EdgeKind.ANY or (kind is EdgeKind.RISING and rising) or (kind is EdgeKind.FALLING and falling):
                wait.fired = True
                wait.task._send = wait.trigger
                ready.append(wait.task)
            else:
                keep.append(wait)
        sig._waiters = keep

    def _diag(self, level: int, message: str) -> None:
        self.diagnostics.append((logging.getLevelName(level), self.now, message))
        self.log.log(level, message)

    # main loop

    def run(self, until: int | None = None) -> RunReport:
        """Run until ``until`` (ps, inclusive), the horizon, or until every foreground task is done."""
        if self._closed:
            raise KernelClosedError("a kernel can only be run once")
        if not self._tasks:
            raise ValueError("run() needs at least one spawned task")
        stop = self.horizon if until is None else (until if self.horizon is None else min(until, self.horizon))
        if stop is None and not self._had_foreground:
            raise ValueError("only background tasks spawned and no time limit given")
        self._running = True
        if self._vcd is not None:
            self._vcd.write_header(list(self._signals.values()))
        started = self._wall_start = _walltime.perf_counter()
        try:
            self._loop(stop)
        finally:
            elapsed = _walltime.perf_counter() - started
            self._running = False
            self._closed = True
            if self._vcd is not None:
                self._vcd.close(self.now)
        return self._report(elapsed)

    def _loop(self, stop: int | None) -> None:
        ready = self._ready
        timers = self._timers
        while True:
            delta = 0
            while ready or self._pending or self._touched:
                if delta >= self.delta_limit:
                    raise OscillationError(
                        f"no fixed point after {self.delta_limit} delta cycles at {self.now} ps"
                    )
                self.delta = delta
                for _ in range(len(ready)):
                    self._step(ready.popleft())
                    if self.fail_fast and self._failed_test:
                        ready.clear()
                        break
                self._settle()
                delta += 1
            if self._vcd is not None:
                self._vcd.dump_step(self.now, self._step_changes)
            self._step_changes.clear()
            if self.fail_fast and self._failed_test:
                return
            if self._had_foreground and self._live_foreground == 0:
                return
            if not timers:
                if stop is not None:
                    self.now = stop
                return
            when = timers[0][0]
            if stop is not None and when > stop:
                self.now = stop
                return
            self.now = when
            while timers and timers[0][0] == when:
                ready.append(heapq.heappop(timers)[2])

    def _report(self, elapsed: float) -> RunReport:
        starved = [t.name for t in self._tasks if not t.background and not t.done]
        if starved:
            self._diag(logging.WARNING, f"run ended with starved tasks: {', '.join(starved)}")
        for t in self._tasks:
            if not t.done:
                t._coro.close()
        summaries = [
            TaskSummary(t.name, t.state, t.message, t.finished_at, t.test, t.wall_finished)
            for t in self._tasks
            if not t.background
        ]
        return RunReport(
            tasks=summaries,
            wall_seconds=max(elapsed, 1e-9),
            events=self.events,
            sim_time=self.now,
            starved=starved,
        )


class Clock:
    """Free-running clock driver: starts low, 50% duty (low half gets the odd ps)."""

    def __init__(self, signal: Signal, period, units: str = "ns", writer: str = "clock"):
        self.signal = signal
        self.period = to_ps(period, units)
        if self.period < 2:
            raise ValueError("clock period must be at least 2 ps")
        self.high = self.period // 2
        self.low = self.period - self.high
        self.writer = writer

    async def start(self, start_high: bool = False):
        sig, writer = self.signal, self.writer
        t_low, t_high = Timer(self.low), Timer(self.high)
        level = 1 if start_high else 0
        while True:
            sig.drive(level, writer)
            await (t_high if level else t_low)
            level ^= 1


def configure_logging(level: int = logging.WARNING, stream=None) -> None:
    """Emit ``LEVEL time=<ps> msg`` lines on standard error."""
    handler = logging.StreamHandler(stream)
    handler.setFormatter(logging.Formatter("%(levelname)s time=%(simtime)s %(message)s"))
    handler.addFilter(_default_simtime)
    logger.handlers[:] = [handler]
    logger.setLevel(level)
    logger.propagate = False


def _default_simtime(record) -> bool:
    if not hasattr(record, "simtime"):
        record.simtime = "-"
    return True


def await_edge(signal, kind: EdgeKind = EdgeKind.ANY) -> Edge:
    return Edge(signal, kind=kind)


def await_time(amount, units: str = "ps") -> Timer:
    return Timer(amount, units)


def await_delta() -> Delta:
    return Delta()


__all__ = [
    "Clock",
    "Delta",
    "Edge",
    "EdgeKind",
    "FallingEdge",
    "Join",
    "RealSignal",
    "RisingEdge",
    "RunReport",
    "Signal",
    "Simulator",
    "TaskHandle",
    "TaskState",
    "Timer",
    "await_delta",
    "await_edge",
    "await_time",
    "configure_logging",
    "format_time",
    "parse_time",
    "to_ps",
]
