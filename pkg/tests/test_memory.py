from __future__ import annotations

import json

from hypothesis import given
from hypothesis import strategies as st

from ptabench import lower
from ptabench import memory as mm
from ptabench.memory import NULL, TOP, UNKNOWN, PointsToMap, default_init, leq, meet

from conftest import fixture_path

a, b, c = mm.var("a"), mm.var("b"), mm.var("c")
p, q = mm.var("p"), mm.var("q")

KEYS = [mm.var("p"), mm.var("q", "main"), mm.field(mm.var("s"), "S", "f"), mm.array("arr"), mm.heap(3)]
LOCS = [mm.var("a"), mm.var("b"), mm.heap(7), mm.func("f"), NULL, UNKNOWN, mm.lit(16)]

maps = st.dictionaries(st.sampled_from(KEYS), st.frozensets(st.sampled_from(LOCS)), max_size=4).map(PointsToMap)


def test_meet_top_is_identity():
    m = PointsToMap({p: {a}})
    assert meet(TOP, m) == m
    assert meet(m, TOP) == m


def test_meet_is_keywise_union():
    got = meet(PointsToMap({p: {a}}), PointsToMap({p: {b}, q: {c}}))
    assert got == PointsToMap({p: {a, b}, q: {c}})


def test_leq_examples():
    assert leq(PointsToMap({p: {a}}), PointsToMap({p: {a, NULL}}))
    assert not leq(PointsToMap({p: {a, b}}), PointsToMap({p: {a}}))


def test_empty_sets_are_dropped():
    assert PointsToMap({p: set()}) == mm.EMPTY
    assert p not in PointsToMap({p: ()})


def test_singletons():
    assert mm.from_name("null") == NULL
    assert mm.from_name("unknown") == UNKNOWN


def test_summary_locations():
    assert mm.heap(3).is_summary
    assert mm.array("a").is_summary
    assert mm.field(mm.heap(3), "S", "f").is_summary
    assert not mm.var("a").is_summary
    assert not NULL.is_key and not UNKNOWN.is_key and not mm.func("f").is_key


def test_location_names():
    s = mm.var("s", "main")
    assert [x.name for x in (mm.var("p"), mm.var("p", "main"), mm.field(s, "S", "f"), mm.array("a"),
                             mm.heap(7), mm.func("f"), NULL, UNKNOWN)] == [
        "g:p", "l:main::p", "f:S::f@main::s", "arr:a", "heap:7", "fn:f", "null", "unknown"]


def test_default_init_p1():
    ir = lower.load([str(fixture_path("P1"))])
    assert default_init(ir).to_json() == {"g:p": ["null"]}


def test_default_init_p2_empty():
    assert default_init(lower.load([str(fixture_path("P2"))])) == mm.EMPTY


def test_default_init_const_pointer():
    ir = lower.from_text("int a; const int *cp = &a; void main() {}")
    assert default_init(ir).to_json() == {"g:cp": ["g:a"]}


def test_canonical_iteration_order():
    m = PointsToMap({q: {b}, p: {a}})
    assert list(m) == sorted(m)
    assert list(m.to_json()) == ["g:p", "g:q"]


@given(maps, maps)
def test_meet_commutative(x, y):
    assert meet(x, y) == meet(y, x)


@given(maps, maps, maps)
def test_meet_associative(x, y, z):
    assert meet(meet(x, y), z) == meet(x, meet(y, z))


@given(maps)
def test_meet_idempotent(x):
    assert meet(x, x) == x


@given(maps)
def test_leq_reflexive(x):
    assert leq(x, x)


@given(maps, maps)
def test_leq_antisymmetric(x, y):
    if leq(x, y) and leq(y, x):
        assert x == y


@given(maps, maps, maps)
def test_leq_transitive(x, y, z):
    if leq(x, y) and leq(y, z):
        assert leq(x, z)


@given(maps, maps, maps)
def test_meet_is_least_upper_bound(x, y, z):
    j = meet(x, y)
    assert leq(x, j) and leq(y, j)
    if leq(x, z) and leq(y, z):
        assert leq(j, z)


@given(maps)
def test_json_round_trip(x):
    text = json.dumps(x.to_json())
    assert PointsToMap.from_json(json.loads(text)) == x


@given(st.sampled_from(KEYS + LOCS))
def test_name_round_trip(loc):
    assert mm.from_name(loc.name) == loc
