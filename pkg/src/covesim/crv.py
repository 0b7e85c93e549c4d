"""Seeded constrained randomization by rejection sampling.

The generator is CPython's MT19937 (``random.Random``) driven only through
``getrandbits``, whose output for a given integer seed is stable across
platforms and Python versions.  Bounded integers and floats are derived from
raw bits here rather than through ``randrange``/``uniform`` so the mapping is
pinned by this module, not by the interpreter.

>>> rng = Rng(7)
>>> x = RandomVar.range("x", 0, 15)
>>> y = RandomVar.range("y", 0, 15)
>>> cs = ConstraintSet().add("sum", lambda s: s["x"] + s["y"] == 30)
>>> randomize([x, y], cs, rng)
{'x': 15, 'y': 15}
"""

from __future__ import annotations

import bisect
import hashlib
import itertools
import random
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping, Sequence

from covesim.errors import UnsatisfiableError, WeightError

U64 = (1 << 64) - 1


def name_hash(name: str) -> int:
    """64-bit BLAKE2b digest of a test name, used to derive per-test seeds."""
    return int.from_bytes(hashlib.blake2b(name.encode("utf-8"), digest_size=8).digest(), "big")


def derive_seed(seed: int, name: str) -> int:
    return (seed ^ name_hash(name)) & U64


class Rng:
    """Reproducible random source; ``draws`` counts raw bit requests."""

    def __init__(self, seed: int):
        if not 0 <= seed <= U64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
        self.seed = seed
        self.draws = 0
        self._gen = random.Random(seed)

    def __repr__(self) -> str:
        return f"Rng(seed={self.seed}, draws={self.draws})"

    def fork(self, name: str) -> "Rng":
        return Rng(derive_seed(self.seed, name))

    def bits(self, k: int) -> int:
        self.draws += 1
        return self._gen.getrandbits(k)

    def below(self, n: int) -> int:
        """Uniform integer in ``[0, n)``."""
        if n <= 0:
            raise ValueError("upper bound must be positive")
        if n == 1:
            return 0
        k = (n - 1).bit_length()
        while True:
            r = self.bits(k)
            if r < n:
                return r

    def randint(self, lo: int, hi: int) -> int:
        if lo > hi:
            raise ValueError(f"empty range [{lo}, {hi}]")
        return lo + self.below(hi - lo + 1)

    def random(self) -> float:
        """Uniform float in ``[0, 1)`` with 53 random bits."""
        return self.bits(53) / (1 << 53)

    def uniform(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.random()

    def choice(self, values: Sequence):
        return values[self.below(len(values))]

    def weighted(self, values: Sequence, weights: Sequence[float]):
        if all(isinstance(w, int) for w in weights):
            cumulative = list(itertools.accumulate(weights))
            pick = self.below(cumulative[-1])
            return values[bisect.bisect_right(cumulative, pick)]
        cumulative = list(itertools.accumulate(float(w) for w in weights))
        pick = self.random() * cumulative[-1]
        index = min(bisect.bisect_right(cumulative, pick), len(values) - 1)
        while weights[index] == 0:
            index -= 1
        return values[index]


@dataclass
class RandomVar:
    """A named random variable over an integer interval or an explicit value list."""

    name: str
    lo: int | None = None
    hi: int | None = None
    values: tuple | None = None
    signed: bool = True

    def __post_init__(self):
        if self.values is not None:
            self.values = tuple(self.values)
            if not self.values:
                raise ValueError(f"{self.name}: value list is empty")
        elif self.lo is None or self.hi is None:
            raise ValueError(f"{self.name}: needs either lo/hi or values")
        elif self.lo > self.hi:
            raise ValueError(f"{self.name}: lo {self.lo} > hi {self.hi}")

    @classmethod
    def range(cls, name: str, lo: int, hi: int, signed: bool = True) -> "RandomVar":
        return cls(name, lo=lo, hi=hi, signed=signed)

    @classmethod
    def choice(cls, name: str, values: Sequence) -> "RandomVar":
        return cls(name, values=tuple(values))

    def __contains__(self, value) -> bool:
        if self.values is not None:
            return value in self.values
        return isinstance(value, int) and self.lo <= value <= self.hi

    def draw(self, rng: Rng):
        if self.values is not None:
            return rng.choice(self.values)
        return rng.randint(self.lo, self.hi)


Predicate = Callable[[Mapping[str, Any]], bool]


@dataclass
class ConstraintSet:
    predicates: list[tuple[str, Predicate]] = field(default_factory=list)
    weights: dict[str, tuple[tuple, tuple]] = field(default_factory=dict)

    def add(self, name: str, predicate: Predicate) -> "ConstraintSet":
        self.predicates.append((name, predicate))
        return self

    def set_weight(self, var: RandomVar, weights: Mapping[Any, float]) -> "ConstraintSet":
        """Make ``var``'s proposal proportional to ``weights``; unlisted values get weight 0."""
        if not weights:
            raise WeightError(f"{var.name}: empty weight map")
        for value, w in weights.items():
            if value not in var:
                raise WeightError(f"{var.name}: weighted value {value!r} is outside the domain")
            if w < 0:
                raise WeightError(f"{var.name}: negative weight {w} for {value!r}")
        if not any(w > 0 for w in weights.values()):
            raise WeightError(f"{var.name}: all weights are zero")
        self.weights[var.name] = (tuple(weights), tuple(weights.values()))
        return self

    def violated(self, assignment: Mapping[str, Any]) -> list[str]:
        return [name for name, pred in self.predicates if not pred(assignment)]


def randomize(
    variables: Sequence[RandomVar],
    cs: ConstraintSet | None,
    rng: Rng,
    *,
    max_attempts: int = 10_000,
) -> dict:
    """Draw one assignment that satisfies every predicate in ``cs``."""
    if not variables:
        raise ValueError("randomize needs at least one variable")
    weights = cs.weights if cs is not None else {}
    predicates = cs.predicates if cs is not None else ()
    for _ in range(max_attempts):
        assignment = {}
        for var in variables:
            w = weights.get(var.name)
            assignment[var.name] = rng.weighted(*w) if w else var.draw(rng)
        if all(pred(assignment) for _, pred in predicates):
            return assignment
    unsat = _provably_unsat(variables, weights, predicates)
    verdict = _VERDICTS[unsat]
    raise UnsatisfiableError(
        f"no assignment of {', '.join(v.name for v in variables)} satisfied the constraints "
        f"in {max_attempts} attempts ({verdict})",
        attempts=max_attempts,
        unsat=unsat,
    )


ENUMERATION_LIMIT = 1 << 16

_VERDICTS = {
    True: "constraints are unsatisfiable",
    False: "solutions exist but acceptance is low",
    None: "search space too large to enumerate",
}


def _provably_unsat(variables, weights, predicates):
    """Enumerate small joint domains: True = no solution, False = solutions exist, None = too big."""
    domains = []
    size = 1
    for var in variables:
        if var.name in weights:
            values, w = weights[var.name]
            domain = [v for v, wt in zip(values, w) if wt > 0]
        elif var.values is not None:
            domain = list(var.values)
        else:
            if var.hi - var.lo + 1 > ENUMERATION_LIMIT:
                return None
            domain = range(var.lo, var.hi + 1)
        size *= len(domain)
        if size > ENUMERATION_LIMIT:
            return None
        domains.append(domain)
    names = [v.name for v in variables]
    for combo in itertools.product(*domains):
        assignment = dict(zip(names, combo))
        if all(pred(assignment) for _, pred in predicates):
            return False
    return True
