from hypothesis import given, settings, strategies as st

from ptel.upset import (
    UPSet, up_and, up_complement, up_next, up_or, up_since, up_until, up_weak_prev,
)

HORIZON = 40


def bits(s):
    return [n in s for n in range(HORIZON)]


def upsets():
    return st.builds(UPSet, st.lists(st.booleans(), max_size=5),
                     st.lists(st.booleans(), min_size=1, max_size=4))


def until_oracle(a, b):
    # least fixpoint, computed backwards from far beyond the horizon
    far = HORIZON + 200
    out = [False] * (far + 1)
    for n in range(far - 1, -1, -1):
        out[n] = (n in b) or ((n in a) and out[n + 1])
    return out[:HORIZON]


def since_oracle(a, b):
    out, prev = [], False
    for n in range(HORIZON):
        prev = (n in b) or ((n in a) and prev)
        out.append(prev)
    return out


def test_basic_examples():
    empty, full = UPSet.empty(), UPSet.full()
    assert up_complement(empty) == full
    a = UPSet([True, False], [True])
    assert up_and(a, up_complement(a)) == empty
    assert up_next(full) == full
    assert up_next(UPSet.from_members([0])) == empty
    odd = UPSet([], [False, True])
    assert up_next(odd) == UPSet([], [True, False])
    assert up_weak_prev(empty) == UPSet.from_members([0])
    assert up_weak_prev(full) == full
    assert up_weak_prev(UPSet.from_members([0])) == UPSet.from_members([0, 1])


def test_or_example():
    a, b = UPSet([True, False], [True]), UPSet([], [False, True])
    assert bits(up_or(a, b)) == [x or y for x, y in zip(bits(a), bits(b))]


def test_until_examples():
    full, empty = UPSet.full(), UPSet.empty()
    assert up_until(full, empty) == empty
    b = UPSet([False, True], [False, False, True])
    assert up_until(empty, b) == b
    assert up_until(full, UPSet.from_members([3])) == UPSet.from_members([0, 1, 2, 3])


def test_since_examples():
    full, empty = UPSet.full(), UPSet.empty()
    assert up_since(full, empty) == empty
    assert up_since(full, UPSet.from_members([0])) == full
    a = up_complement(UPSet.from_members([1]))
    assert up_since(a, UPSet.from_members([0])) == UPSet.from_members([0])


@settings(max_examples=300, deadline=None)
@given(upsets(), upsets())
def test_operations_match_pointwise_oracle(a, b):
    ba, bb = bits(a), bits(b)
    assert bits(up_and(a, b)) == [x and y for x, y in zip(ba, bb)]
    assert bits(up_or(a, b)) == [x or y for x, y in zip(ba, bb)]
    assert bits(up_complement(a)) == [not x for x in ba]
    assert bits(up_next(a))[:HORIZON - 1] == ba[1:]
    assert bits(up_weak_prev(a)) == [True] + ba[:-1]
    assert bits(up_until(a, b)) == until_oracle(a, b)
    assert bits(up_since(a, b)) == since_oracle(a, b)


@settings(max_examples=200, deadline=None)
@given(upsets(), st.integers(0, 3), st.integers(1, 3))
def test_normal_form_is_a_congruence(a, extra_stem, loop_copies):
    # the same set written with a longer stem and a repeated loop
    s, l = len(a.stem) + extra_stem, len(a.loop) * loop_copies
    bits_ = a.unroll(s, l)
    b = UPSet(bits_[:s], bits_[s:])
    assert b == a and hash(b) == hash(a)
    c = UPSet([True], [False, True])
    assert up_and(a, c) == up_and(b, c)
    assert up_until(a, c) == up_until(b, c)
    assert up_since(c, a) == up_since(c, b)
