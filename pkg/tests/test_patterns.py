from __future__ import annotations

import pytest

from ptabench import andersen, lower
from ptabench import compare as cmp
from ptabench import patterns as pat

from conftest import FIXTURE_NAMES, fixture_path, run_text


def labels_of(src: str) -> list:
    ir = andersen.analyze(lower.from_text(src)).ir
    return [str(lab) for _, lab in pat.label_all(ir)]


def recommend_src(src: str) -> pat.Recommendation:
    ir = andersen.analyze(lower.from_text(src)).ir
    return pat.recommend(pat.label_all(ir), ir)


def fixture_labels(name: str) -> list:
    ir = andersen.analyze(lower.load([str(fixture_path(name))])).ir
    return [lab for _, lab in pat.label_all(ir)]


def test_const_pointer():
    assert labels_of("int a; const int *cp = &a;\nvoid main() { *cp = 1; }") == [pat.CONST]


def test_p3_formal_uniform_unassigned():
    [lab] = fixture_labels("P3")
    assert lab == pat.PatternLabel(pat.FORMAL, True, False)
    assert lab.to_json() == {"variant": "FormalPointer", "uniform_actuals": True, "reassigned_in_callee": False}


def test_p4_formal_varying():
    [lab] = fixture_labels("P4")
    assert str(lab) == "FormalPointer(varying,unassigned)"


def test_p5_formal_reassigned():
    assert {str(lab) for lab in fixture_labels("P5")} == {"FormalPointer(varying,reassigned)"}


def test_p2_single_assigned():
    assert fixture_labels("P2") == [pat.PatternLabel(pat.SINGLE)]


def test_single_requires_domination():
    assert labels_of("int a; int c;\nvoid main() { int *p; if (c) { p = &a; } *p = 1; }") == [pat.OTHER]


def test_multi_assigned_all_reach():
    src = "int a; int b; int c; int *p;\nvoid main() { p = &a; if (c) { p = &b; } *p = 1; }"
    assert labels_of(src) == [pat.MULTI]


def test_killed_definition_is_other():
    src = "int a; int b; int *p;\nvoid main() { p = &a; p = &b; *p = 1; }"
    assert labels_of(src) == [pat.OTHER]


def test_never_assigned_is_other():
    assert labels_of("int *p;\nvoid main() { *p = 1; }") == [pat.OTHER]


def test_const_beats_single():
    src = "int a; const int *cp = &a;\nvoid main() { const int *q = &a; *cp = 1; *q = 1; }"
    assert labels_of(src) == [pat.CONST, pat.CONST]


def test_formal_uniformity_uses_qualified_names():
    src = ("int a; int b;\nvoid f(int *x) { *x = 1; }\nvoid g() { int *p = &b; f(p); }\n"
           "void main() { int *p = &a; f(p); g(); }")
    assert labels_of(src)[0] == "FormalPointer(varying,unassigned)"


def test_distribution_has_every_variant():
    assert pat.distribution([pat.PatternLabel(pat.MULTI)]) == {
        pat.CONST: 0, pat.FORMAL: 0, pat.SINGLE: 0, pat.MULTI: 1, pat.OTHER: 0}


def test_labels_are_deterministic():
    for name in FIXTURE_NAMES:
        assert fixture_labels(name) == fixture_labels(name)


@pytest.mark.parametrize("name, analysis", [
    ("P1", "FS"), ("P2", "FIS"), ("P3", "FIS"), ("P4", "CS"), ("P5", "CS"), ("P6", "FIS")])
def test_fixture_recommendations(name, analysis):
    ir = andersen.analyze(lower.load([str(fixture_path(name))])).ir
    assert pat.recommend(pat.label_all(ir), ir).analysis == analysis


def test_p4_reason_names_formal():
    ir = andersen.analyze(lower.load([str(fixture_path("P4"))])).ir
    rec = pat.recommend(pat.label_all(ir), ir)
    assert rec.reasons == ("formal x of f receives 2 distinct actuals",)


def test_reassigned_formal_needs_fs():
    src = "int a; int b;\nvoid f(int *x) { x = &b; *x = 1; }\nvoid main() { f(&a); f(&a); }"
    assert recommend_src(src).analysis == "FS"


def test_global_assigned_in_caller_needs_fs():
    assert recommend_src("int a; int *p;\nvoid f() { *p = 1; }\nvoid main() { p = &a; f(); }").analysis == "FS"


def test_heap_store_needs_fs():
    src = "int a;\nvoid main() { int **p = malloc(8); int *q = *p; *p = &a; *q = 1; }"
    assert recommend_src(src).analysis == "FS"


def test_uniform_variable_with_two_values_needs_cs():
    src = ("int a; int b; int *g;\nvoid f(int *x) { *x = 1; }\n"
           "void main() { g = &a; f(g); g = &b; f(g); }")
    rec = recommend_src(src)
    assert rec.analysis == "CS"
    run = run_text(src)
    classes = [r.klass for r in cmp.build_records(run.fis.points_to, run.fs, run.cs)]
    assert cmp.FISEQFS_LT_CS in classes or cmp.FIS_LT_FS_LT_CS in classes
