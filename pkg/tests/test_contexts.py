from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ptabench import andersen, contexts, gen, lower
from ptabench import memory as mm
from ptabench.contexts import merge_poi_contexts, resolve_context
from ptabench.errors import BudgetExceeded
from ptabench.ir import enumerate_pois

from conftest import run_text


def per_context(run, site):
    return [set(mm.names(s)) for _, s in run.cs.poi_sets(site)]


def test_p3_single_context(fixture_runs):
    run = fixture_runs["P3"]
    assert run.cs.context_table()["f"] == {"count": 1, "contexts": [{"id": 0, "value": {"l:f::x": ["g:a"]}}]}
    assert per_context(run, run.poi("l:f::x")) == [{"g:a"}]


def test_p4_two_contexts(fixture_runs):
    run = fixture_runs["P4"]
    assert run.cs.context_table()["f"]["count"] == 2
    assert per_context(run, run.poi("l:f::x")) == [{"g:a"}, {"g:b"}]


def test_p5_contexts_vs_other_engines(fixture_runs):
    run = fixture_runs["P5"]
    site = run.poi("l:f::p", line=12)
    assert per_context(run, site) == [{"g:a"}, {"g:b"}]
    assert set(mm.names(run.fs.poi_set(site))) == {"g:a", "g:b"}
    assert set(mm.names(run.fis.points_to.get(site.key))) == {"g:a", "g:b", "g:g"}


def test_entry_context_is_global_initialization(fixture_runs):
    run = fixture_runs["P1"]
    assert run.cs.context_table()["main"]["contexts"][0]["value"] == {"g:p": ["null"]}


def test_merge_p4(fixture_runs):
    run = fixture_runs["P4"]
    assert mm.names(merge_poi_contexts(run.cs.poi_sets(run.poi("l:f::x")))) == ["g:a", "g:b"]


def test_merge_single_and_empty():
    a = frozenset({mm.var("a")})
    assert merge_poi_contexts([(0, a)]) == a
    assert merge_poi_contexts([]) is None


def test_dead_function_unreached():
    run = run_text("int a; int *g;\nvoid dead() { *g = 1; }\nvoid main() { g = &a; }")
    assert not run.cs.reached("dead")
    assert merge_poi_contexts(run.cs.poi_sets(run.poi("g:g"))) is None


def test_contexts_are_distinct_values(fixture_runs):
    for run in fixture_runs.values():
        for entries in run.cs.contexts.values():
            values = [e.value for e in entries]
            assert len(values) == len(set(values))


def test_caller_local_not_in_context():
    run = run_text("int a; int b;\nvoid f(int *x) { *x = 1; }\n"
                   "void main() { int *p = &a; int *q = &b; f(p); f(p); *q = 1; }")
    assert run.cs.context_table()["f"]["contexts"][0]["value"] == {"l:f::x": ["g:a"]}


def test_memoized_summary_is_reused(fixture_runs):
    for run in fixture_runs.values():
        for name, entries in run.cs.contexts.items():
            for e in entries:
                assert resolve_context(run.cs, name, e.value) == e.exit


def test_recursive_contexts_terminate():
    run = run_text("int a; int b; int c;\nvoid r(int *x) { if (c) { r(&b); } *x = 1; }\n"
                   "void main() { r(&a); }")
    # locals of a recursive function stand for every frame, so the inner binding leaks outward
    assert per_context(run, run.poi("l:r::x")) == [{"g:a", "g:b"}, {"g:b"}]


def test_context_budget():
    ir = andersen.analyze(lower.from_text(
        "int a; int b;\nvoid f(int *x) { *x = 1; }\nvoid main() { f(&a); f(&b); }")).ir
    with pytest.raises(BudgetExceeded, match="f"):
        contexts.run_cs(ir, max_contexts=1)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 100_000))
def test_cs_within_fs(seed):
    run = run_text(gen.generate(seed))
    for site in enumerate_pois(run.ir):
        fs = run.fs.poi_set(site)
        if fs is None:
            assert not run.cs.poi_sets(site)
            continue
        for _, s in run.cs.poi_sets(site):
            assert s <= fs
