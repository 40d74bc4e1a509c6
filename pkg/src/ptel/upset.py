"""Ultimately periodic subsets of the naturals.

A set is stored as a finite stem followed by a loop repeated forever.  The
constructor normalizes (shortest loop, shortest stem), so ``==`` is set
equality.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd
from typing import Iterable


def _min_period(bits: tuple[bool, ...]) -> tuple[bool, ...]:
    n = len(bits)
    for d in range(1, n + 1):
        if n % d == 0 and all(bits[i] == bits[i % d] for i in range(n)):
            return bits[:d]
    return bits


@dataclass(frozen=True)
class UPSet:
    stem: tuple[bool, ...]
    loop: tuple[bool, ...]

    def __init__(self, stem: Iterable[bool] = (), loop: Iterable[bool] = (False,)):
        stem = tuple(bool(b) for b in stem)
        loop = _min_period(tuple(bool(b) for b in loop))
        if not loop:
            raise ValueError("loop must be non-empty")
        while stem and stem[-1] == loop[-1]:
            loop = (stem[-1],) + loop[:-1]
            stem = stem[:-1]
        object.__setattr__(self, "stem", stem)
        object.__setattr__(self, "loop", loop)

    @classmethod
    def empty(cls) -> "UPSet":
        return cls((), (False,))

    @classmethod
    def full(cls) -> "UPSet":
        return cls((), (True,))

    @classmethod
    def from_members(cls, members: Iterable[int]) -> "UPSet":
        """A finite set."""
        members = set(members)
        top = max(members, default=-1)
        return cls([n in members for n in range(top + 1)], (False,))

    def __contains__(self, n: int) -> bool:
        s = len(self.stem)
        if n < s:
            return self.stem[n]
        return self.loop[(n - s) % len(self.loop)]

    def unroll(self, stem_len: int, loop_len: int) -> list[bool]:
        """Membership bits for 0..stem_len+loop_len-1; valid as a (stem, loop)
        presentation when stem_len >= len(stem) and len(loop) divides loop_len."""
        return [n in self for n in range(stem_len + loop_len)]

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.stem), len(self.loop)

    def is_full(self) -> bool:
        return all(self.stem) and all(self.loop)

    def is_empty(self) -> bool:
        return not any(self.stem) and not any(self.loop)

    def first_member(self) -> int | None:
        for n in range(len(self.stem) + len(self.loop)):
            if n in self:
                return n
        return None

    def first_nonmember(self) -> int | None:
        for n in range(len(self.stem) + len(self.loop)):
            if n not in self:
                return n
        return None

    def __repr__(self):
        bits = lambda xs: "".join("1" if b else "0" for b in xs)  # noqa: E731
        return f"UPSet({bits(self.stem)}|{bits(self.loop)})"


def _lcm(a: int, b: int) -> int:
    return a * b // gcd(a, b)


def align(*sets: UPSet) -> tuple[int, int]:
    """A common (stem, loop) shape for all operands."""
    s = max(len(a.stem) for a in sets)
    period = 1
    for a in sets:
        period = _lcm(period, len(a.loop))
    return s, period


def up_complement(a: UPSet) -> UPSet:
    return UPSet([not b for b in a.stem], [not b for b in a.loop])


def _pointwise(fn, *sets: UPSet) -> UPSet:
    s, period = align(*sets)
    cols = [x.unroll(s, period) for x in sets]
    bits = [fn(*vals) for vals in zip(*cols)]
    return UPSet(bits[:s], bits[s:])


def up_and(a: UPSet, b: UPSet) -> UPSet:
    return _pointwise(lambda x, y: x and y, a, b)


def up_or(a: UPSet, b: UPSet) -> UPSet:
    return _pointwise(lambda x, y: x or y, a, b)


def up_implies(a: UPSet, b: UPSet) -> UPSet:
    return _pointwise(lambda x, y: (not x) or y, a, b)


def up_next(a: UPSet) -> UPSet:
    if a.stem:
        return UPSet(a.stem[1:], a.loop)
    return UPSet((), a.loop[1:] + a.loop[:1])


def up_weak_prev(a: UPSet) -> UPSet:
    return UPSet((True,) + a.stem, a.loop)


def up_until(a: UPSet, b: UPSet) -> UPSet:
    """Least solution of u(n) = b(n) or (a(n) and u(n+1))."""
    s, period = align(a, b)
    av, bv = a.unroll(s, period), b.unroll(s, period)
    u = [False] * (s + period)
    # on the cycle: two backward laps reach every witness within one lap
    for _ in range(2):
        for i in range(s + period - 1, s - 1, -1):
            succ = u[i + 1] if i + 1 < s + period else u[s]
            u[i] = bv[i] or (av[i] and succ)
    for i in range(s - 1, -1, -1):
        u[i] = bv[i] or (av[i] and u[i + 1])
    return UPSet(u[:s], u[s:])


def up_since(a: UPSet, b: UPSet) -> UPSet:
    """Solution of v(n) = b(n) or (a(n) and v(n-1)), v(-1) = false."""
    s, period = align(a, b)
    av, bv = a.unroll(s, period), b.unroll(s, period)
    stem = []
    carry = False
    for i in range(s):
        carry = bv[i] or (av[i] and carry)
        stem.append(carry)

    def lap(entry):
        out, c = [], entry
        for i in range(s, s + period):
            c = bv[i] or (av[i] and c)
            out.append(c)
        return out, c

    first, exit_state = lap(carry)
    if exit_state == carry:
        return UPSet(stem, first)
    second, exit2 = lap(exit_state)
    # the lap map is monotone on {False, True}, so one extra lap stabilizes it
    assert exit2 == exit_state, "since: loop failed to stabilize after one lap"
    return UPSet(stem + first, second)
