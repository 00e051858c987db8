from __future__ import annotations

from decimal import Decimal

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ptabench import compare as cmp
from ptabench import memory as mm
from ptabench.errors import InvariantViolation
from ptabench.ir import PoISite

from conftest import FIXTURE_NAMES

NULL = mm.NULL
a, b, g = mm.var("a"), mm.var("b"), mm.var("g")
F = frozenset


def test_classify_examples():
    assert cmp.classify(F({a}), F({a}), [F({a})]) == cmp.EQ_ALL
    assert cmp.classify(F({NULL, a}), F({a}), [F({a})]) == cmp.FIS_LT_FSEQCS
    assert cmp.classify(F({a, b, g}), F({a, b}), [F({a}), F({b})]) == cmp.FIS_LT_FS_LT_CS
    assert cmp.classify(F({a, b}), F({a, b}), [F({a}), F({b})]) == cmp.FISEQFS_LT_CS


def test_classify_exists_reading():
    # one context is strictly smaller even though the union equals FS
    assert cmp.classify(F({a, b}), F({a, b}), [F({a, b}), F({a})]) == cmp.FISEQFS_LT_CS


def test_classify_rejects_ordering_breach():
    with pytest.raises(InvariantViolation):
        cmp.classify(F({a}), F({a, b}), [])
    with pytest.raises(InvariantViolation):
        cmp.classify(F({a, b}), F({a}), [F({b, g})])


LOCS = [mm.var(x) for x in "abcde"] + [NULL, mm.UNKNOWN]


def from_mask(mask: int) -> frozenset:
    return F(loc for i, loc in enumerate(LOCS) if mask >> i & 1)


# a triple is drawn as bitmasks over LOCS; and-ing enforces the ordering precondition
ordered_triples = st.tuples(st.integers(0, 127), st.integers(0, 127), st.lists(st.integers(0, 127), max_size=4)).map(
    lambda t: (from_mask(t[0]), from_mask(t[0] & t[1]), [from_mask(t[0] & t[1] & m) for m in t[2]]))


def predicates(fis, fs, cs):
    return {
        cmp.EQ_ALL: all(fis == fs == c for c in cs) and fis == fs,
        cmp.FIS_LT_FS_LT_CS: any(c < fs for c in cs) and fs < fis,
        cmp.FISEQFS_LT_CS: any(c < fs for c in cs) and fis == fs,
        cmp.FIS_LT_FSEQCS: all(c == fs for c in cs) and fs < fis,
    }


@settings(max_examples=2000, deadline=None)
@given(ordered_triples)
def test_exactly_one_class(triple):
    held = [k for k, v in predicates(*triple).items() if v]
    assert held == [cmp.classify(*triple)]


def _record(klass, pattern="Other", fs=F({a}), program="x"):
    site = PoISite("f.mc", 1, 1, 1, "main", 0, a)
    return cmp.PoIRecord(site, F({a}), fs, [], klass, pattern, {}, program)


def test_stats_52_all_equal():
    report = cmp.corpus_stats([_record(cmp.EQ_ALL) for _ in range(52)])
    assert cmp.fmt_count(report.total.counts[cmp.EQ_ALL], report.total.total) == "52 (100)"
    assert "52 (100)" in cmp.class_table(report)


def test_stats_empty():
    report = cmp.corpus_stats([])
    assert report.rows == []
    assert report.total.total == 0
    assert all(v["count"] == 0 and v["percent"] == 0.0 for v in report.to_json()["total"]["classes"].values())


def test_percent_rounds_half_up():
    assert cmp.percent(1, 8) == Decimal("12.5")
    assert cmp.percent(1, 16) == Decimal("6.3")
    assert cmp.percent(2, 3) == Decimal("66.7")
    assert cmp.fmt_count(1, 3) == "1 (33.3)"


@settings(max_examples=100, deadline=None)
@given(st.lists(st.sampled_from(cmp.CLASSES), min_size=1, max_size=200))
def test_percentages_sum_to_100(classes):
    report = cmp.corpus_stats([_record(k) for k in classes]).to_json()["total"]
    total = sum(Decimal(str(v["percent"])) for v in report["classes"].values())
    assert abs(total - 100) <= Decimal("0.2")


def test_unreachable_excluded():
    report = cmp.corpus_stats([_record(cmp.EQ_ALL), _record(cmp.UNREACHABLE, fs=None)])
    assert report.total.total == 1 and report.total.unreachable == 1


def test_single_location_and_patterns():
    recs = [_record(cmp.EQ_ALL, "SingleAssigned"), _record(cmp.EQ_ALL, "MultiAssigned", fs=F({a, b})),
            _record(cmp.FIS_LT_FSEQCS, "Other")]
    row = cmp.corpus_stats(recs).total
    assert row.single_location == 2
    assert row.patterns["SingleAssigned"] == 1 and row.patterns["Other"] == 0


def test_per_program_rows():
    recs = [_record(cmp.EQ_ALL, program="p2"), _record(cmp.FIS_LT_FSEQCS, program="p1")]
    report = cmp.corpus_stats(recs)
    assert [r.name for r in report.rows] == ["p1", "p2"]


EXPECTED = {
    "P1": {1: cmp.FIS_LT_FSEQCS},
    "P2": {1: cmp.EQ_ALL},
    "P3": {1: cmp.EQ_ALL},
    "P4": {1: cmp.FISEQFS_LT_CS},
    "P5": {10: cmp.FIS_LT_FSEQCS, 12: cmp.FIS_LT_FS_LT_CS},
    "P6": {1: cmp.EQ_ALL},
}


def fixture_records(run, name):
    return cmp.build_records(run.fis.points_to, run.fs, run.cs, name)


@pytest.mark.parametrize("name", FIXTURE_NAMES)
def test_fixture_classes(fixture_runs, name):
    recs = fixture_records(fixture_runs[name], name)
    expected = EXPECTED[name]
    if len(expected) == 1:
        assert [r.klass for r in recs] == list(expected.values())
    else:
        assert {r.site.line: r.klass for r in recs} == expected


def test_corpus_totals_match(fixture_runs):
    recs = [r for n in FIXTURE_NAMES for r in fixture_records(fixture_runs[n], n)]
    counts = cmp.corpus_stats(recs).total.counts
    assert counts == {cmp.EQ_ALL: 3, cmp.FISEQFS_LT_CS: 1, cmp.FIS_LT_FSEQCS: 2, cmp.FIS_LT_FS_LT_CS: 1}


def test_p6_heap_pointee(fixture_runs):
    [rec] = fixture_records(fixture_runs["P6"], "P6")
    assert mm.names(rec.fs_set) == ["heap:3"] and rec.klass == cmp.EQ_ALL


def test_diagnostics_flag_null(fixture_runs):
    recs = fixture_records(fixture_runs["P1"], "P1")
    assert cmp.deref_diagnostics(recs) == []
    site = PoISite("f.mc", 1, 1, 1, "main", 0, a)
    rec = cmp.PoIRecord(site, F({NULL}), F({NULL}), [], cmp.EQ_ALL, "Other")
    assert [d["kind"] for d in cmp.deref_diagnostics([rec])] == ["possible null dereference"]
