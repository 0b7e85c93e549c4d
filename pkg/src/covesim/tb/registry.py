"""Test registry: named test bodies grouped by design."""

from __future__ import annotations

import fnmatch
from dataclasses import dataclass, field
from typing import Callable

from covesim.errors import RegistryError

DESIGNS = ("alu", "i2c", "adc")


@dataclass(frozen=True)
class TestCase:
    """``body(env, rng, transactions)`` returns the coroutine run as the test task."""

    __test__ = False

    name: str
    design: str
    body: Callable
    default_transactions: int | None = None
    tags: tuple = field(default_factory=tuple)


class Registry:
    def __init__(self):
        self._tests: dict[str, TestCase] = {}

    def __len__(self) -> int:
        return len(self._tests)

    def __contains__(self, name: str) -> bool:
        return name in self._tests

    def register(self, tc: TestCase) -> TestCase:
        if tc.name in self._tests:
            raise RegistryError(f"test {tc.name!r} is already registered")
        if tc.design not in DESIGNS:
            raise RegistryError(f"test {tc.name!r}: unknown design {tc.design!r}")
        self._tests[tc.name] = tc
        return tc

    def discover(self, pattern: str | None = None, *, design: str | None = None, tag: str | None = None) -> list[TestCase]:
        """Registered tests in registration order, optionally filtered by name glob, design and tag."""
        out = []
        for tc in self._tests.values():
            if design is not None and tc.design != design:
                continue
            if pattern is not None and not fnmatch.fnmatchcase(tc.name, pattern):
                continue
            if tag is not None and tag not in tc.tags:
                continue
            out.append(tc)
        return out

    def get(self, name: str) -> TestCase:
        try:
            return self._tests[name]
        except KeyError:
            raise RegistryError(f"no test named {name!r}") from None


REGISTRY = Registry()


def _target(registry: Registry | None) -> Registry:
    return REGISTRY if registry is None else registry


def register_test(design: str, *, name: str | None = None, transactions: int | None = None, tags=(), registry: Registry | None = None):
    """Decorator form of :meth:`Registry.register`."""

    def wrap(body):
        tc = TestCase(name or body.__name__, design, body, transactions, tuple(tags))
        _target(registry).register(tc)
        return body

    return wrap


def register_test_case(tc: TestCase, registry: Registry | None = None) -> TestCase:
    return _target(registry).register(tc)


def discover(pattern: str | None = None, **filters) -> list[TestCase]:
    return REGISTRY.discover(pattern, **filters)
