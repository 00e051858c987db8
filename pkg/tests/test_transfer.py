"""Transfer functions of the four pointer assignments and allocation."""

from __future__ import annotations

import pytest

from ptabench import memory as mm
from ptabench.dataflow import transfer
from ptabench.ir import AddressOf, Alloc, Copy, Load, Store
from ptabench.memory import NULL, TOP, UNKNOWN, PointsToMap

p, q, r = mm.var("p"), mm.var("q"), mm.var("r")
a, b, c, d = mm.var("a"), mm.var("b"), mm.var("c"), mm.var("d")
H = mm.heap(3)
ARR = mm.array("arr")


def M(**kw) -> PointsToMap:
    return PointsToMap({mm.from_name(k.replace("__", ":")): {mm.from_name(x) for x in v} for k, v in kw.items()})


def run(node, bindings: dict):
    out = transfer(node, PointsToMap(bindings))
    return out if out is TOP else {k.name: set(mm.names(v)) for k, v in out.items()}


# (case, IN bindings, expected OUT)
ADDRESS_OF = [
    ("empty", {}, {"g:p": {"g:a"}}),
    ("single", {p: {b}}, {"g:p": {"g:a"}}),
    ("multiple", {p: {b, c}}, {"g:p": {"g:a"}}),
    ("summary", {p: {H}}, {"g:p": {"g:a"}}),
]

COPY = [
    ("empty", {p: {b}}, {}),
    ("single", {p: {c}, q: {a}}, {"g:p": {"g:a"}, "g:q": {"g:a"}}),
    ("multiple", {p: {c}, q: {a, b}}, {"g:p": {"g:a", "g:b"}, "g:q": {"g:a", "g:b"}}),
    ("summary", {p: {c}, q: {H}}, {"g:p": {"heap:3"}, "g:q": {"heap:3"}}),
]

LOAD = [
    ("empty", {p: {c}}, {}),
    ("single", {p: {c}, q: {a}, a: {b}}, {"g:p": {"g:b"}, "g:q": {"g:a"}, "g:a": {"g:b"}}),
    ("multiple", {q: {a, c}, a: {b}, c: {d}},
     {"g:p": {"g:b", "g:d"}, "g:q": {"g:a", "g:c"}, "g:a": {"g:b"}, "g:c": {"g:d"}}),
    ("summary", {p: {c}, q: {H}, H: {a}}, {"g:p": {"g:a"}, "g:q": {"heap:3"}, "heap:3": {"g:a"}}),
]

STORE = [
    ("empty", {q: {b}}, TOP),
    ("single", {p: {a}, q: {b}, a: {c}}, {"g:p": {"g:a"}, "g:a": {"g:b"}, "g:q": {"g:b"}}),
    ("multiple", {p: {a, c}, q: {b}, a: {d}},
     {"g:p": {"g:a", "g:c"}, "g:a": {"g:b", "g:d"}, "g:c": {"g:b"}, "g:q": {"g:b"}}),
    ("summary", {p: {H}, q: {b}, H: {d}}, {"g:p": {"heap:3"}, "heap:3": {"g:b", "g:d"}, "g:q": {"g:b"}}),
]


@pytest.mark.parametrize("case, bindings, expected", ADDRESS_OF, ids=[x[0] for x in ADDRESS_OF])
def test_address_of(case, bindings, expected):
    assert run(AddressOf(p, a), bindings) == expected


@pytest.mark.parametrize("case, bindings, expected", COPY, ids=[x[0] for x in COPY])
def test_copy(case, bindings, expected):
    assert run(Copy(p, q), bindings) == expected


@pytest.mark.parametrize("case, bindings, expected", LOAD, ids=[x[0] for x in LOAD])
def test_load(case, bindings, expected):
    assert run(Load(p, q), bindings) == expected


@pytest.mark.parametrize("case, bindings, expected", STORE, ids=[x[0] for x in STORE])
def test_store(case, bindings, expected):
    assert run(Store(p, q), bindings) == expected


def test_store_strong_only_for_single_non_summary():
    for case, bindings, _ in STORE:
        out = transfer(Store(p, q), PointsToMap(bindings))
        if out is TOP:
            continue
        killed = [t for t in bindings.get(p, ()) if t in bindings and not bindings[t] <= out.get(t)]
        assert bool(killed) == (case == "single")


def test_store_to_array_is_weak():
    out = transfer(Store(p, q), PointsToMap({p: {ARR}, q: {b}, ARR: {a}}))
    assert out.get(ARR) == {a, b}


def test_store_with_unbound_source_kills_single_target():
    out = transfer(Store(p, q), PointsToMap({p: {a}, a: {b}}))
    assert a not in out


def test_alloc_is_address_of_heap_cell():
    out = transfer(Alloc(p, 7), PointsToMap({p: {a}}))
    assert out.get(p) == {mm.heap(7)}
    assert out.get(mm.heap(7)) == {UNKNOWN}


def test_assignment_into_summary_key_is_weak():
    out = transfer(AddressOf(ARR, b), PointsToMap({ARR: {a}}))
    assert out.get(ARR) == {a, b}


def test_null_and_unknown_operands_are_skipped():
    out = transfer(Load(p, q), PointsToMap({q: {NULL, UNKNOWN, a}, a: {b}}))
    assert out.get(p) == {b}
    out = transfer(Store(p, q), PointsToMap({p: {NULL, a}, q: {b}}))
    assert out.get(a) == {b}


def test_top_in_gives_top():
    assert transfer(Copy(p, q), TOP) is TOP


def test_field_path_load_and_store():
    s = mm.var("s")
    f = mm.field(s, "S", "f")
    out = transfer(Store(p, q, (("S", "f"),)), PointsToMap({p: {s}, q: {a}}))
    assert out.get(f) == {a}
    out = transfer(Load(r, p, (("S", "f"),)), out)
    assert out.get(r) == {a}
