from __future__ import annotations

import pytest

from ptabench import lower, syntax
from ptabench.errors import ParseError, SemanticError
from ptabench.ir import (PTR_ASSIGNMENTS, AddressOf, Alloc, Branch, Call, Copy, Entry, Exit, Load, Nop, Store,
                         SourceProgram, enumerate_pois)

from conftest import FIXTURE_NAMES, fixture_path


def nodes(ir, func="main"):
    return [n for _, n in sorted(ir.functions[func].nodes.items())]


def test_parse_p2_shape():
    units = lower.parse_units(SourceProgram.from_paths([str(fixture_path("P2"))]))
    ir = lower.lower_program(SourceProgram.from_paths([str(fixture_path("P2"))]))
    assert len(units) == 1
    assert list(ir.functions) == ["main"]
    body = [n for n in nodes(ir) if not isinstance(n, (Entry, Exit))]
    assert [type(n) for n in body] == [AddressOf, Store]


def test_empty_program_lacks_entry():
    with pytest.raises(ParseError, match="no entry function"):
        lower.from_text("")


def test_syntax_error_reports_line():
    with pytest.raises(ParseError) as exc:
        lower.from_text("int a;\nint *p = ;\nvoid main() {}")
    assert exc.value.line == 2


@pytest.mark.parametrize("src, message", [
    ("void main() {} void main() {}", "duplicate definition"),
    ("void main() { x = 1; }", "unknown identifier"),
    ("int a; const int *cp = &a; void main() { cp = &a; }", "const pointer"),
    ("void main() { int *p; p = &1; }", "address of a temporary"),
])
def test_rejections(src, message):
    with pytest.raises(ParseError, match=message):
        lower.from_text(src)


def test_semantic_errors_are_parse_errors():
    with pytest.raises(SemanticError):
        lower.from_text("void main() { x = 1; }")


def test_malloc_lowers_to_alloc_with_line():
    ir = lower.from_text("int *p;\nvoid main() {\n\n\n\n\n p = malloc(4);\n}")
    allocs = [n for n in nodes(ir) if isinstance(n, Alloc)]
    assert [(a.dst.name, a.site) for a in allocs] == [("g:p", 7)]


@pytest.mark.parametrize("fn", ["malloc", "calloc", "alloc"])
def test_all_allocators(fn):
    ir = lower.from_text(f"int *p;\nvoid main() {{\n p = {fn}(4);\n}}")
    assert any(isinstance(n, Alloc) for n in nodes(ir))


def test_array_elements_are_monolithic():
    ir = lower.from_text("int *a[10]; int x; int *y; int *z;\n"
                         "void main() { a[3] = &x; y = a[3]; z = a[5]; }")
    copies = [n for n in nodes(ir) if isinstance(n, Copy)]
    assert {c.src.name for c in copies} == {"arr:a"}


def test_struct_fields_are_distinct_locations():
    ir = lower.from_text("struct S { int *f; int *g; };\nstruct S s; int a; int b;\n"
                         "void main() { s.f = &a; s.g = &b; }")
    dsts = [n.dst.name for n in nodes(ir) if isinstance(n, AddressOf)]
    assert dsts == ["f:S::f@s", "f:S::g@s"]


def test_two_level_store_uses_temporary():
    ir = lower.from_text("int a; int *r; int **p; int ***q;\nvoid main() {\n q = &p;\n **q = r;\n}")
    tail = [n for n in nodes(ir) if n.line == 4]
    assert [type(n) for n in tail] == [Load, Store]
    load, store = tail
    assert load.src.name == "g:q" and load.dst.name == "l:main::__t0"
    assert store.dst == load.dst and store.src.name == "g:r"


def test_temporaries_are_deterministic():
    src = "int a; int *r; int ***q; int ****w;\nvoid main() { ***w = r; **q = r; }"
    a = [str(n) for n in nodes(lower.from_text(src))]
    b = [str(n) for n in nodes(lower.from_text(src))]
    assert a == b


def test_only_canonical_node_kinds():
    for name in FIXTURE_NAMES:
        ir = lower.load([str(fixture_path(name))])
        for f in ir.functions.values():
            for n in f.nodes.values():
                assert isinstance(n, (*PTR_ASSIGNMENTS, Alloc, Call, Entry, Exit, Branch, Nop))


def test_cfg_shape():
    ir = lower.load([str(fixture_path("P5"))])
    for f in ir.functions.values():
        assert not f.pred[f.entry]
        assert all(a != f.exit for a, _ in f.edges)
        assert set(f.rpo) == set(f.nodes)


def test_pcg_edges_for_direct_calls():
    ir = lower.load([str(fixture_path("P4"))])
    assert sorted((c, g) for c, _, g in ir.call_edges) == [("main", "f"), ("main", "f")]


def test_function_pointer_call_left_unresolved():
    ir = lower.from_text("void f() {}\nvoid main() { void (*fp)(); fp = &f; fp(); }")
    assert not ir.call_edges
    [(fname, _, call)] = list(ir.indirect_calls())
    assert fname == "main" and call.pointer.name == "l:main::fp"


def test_pois_p5_else_branch():
    ir = lower.load([str(fixture_path("P5"))])
    assert [s.line for s in enumerate_pois(ir) if s.line == 12] == [12]


def test_pois_two_levels():
    ir = lower.from_text("int *r; int ***q;\nvoid main() { **q = r; }")
    pois = enumerate_pois(ir)
    assert [(s.level, s.key.name) for s in pois] == [(1, "g:q"), (2, "l:main::__t0")]


def test_pois_empty_without_derefs():
    assert enumerate_pois(lower.from_text("int a; int *p; void main() { p = &a; }")) == []


def test_indirect_call_is_a_poi():
    ir = lower.from_text("void f() {}\nvoid main() { void (*fp)(); fp = &f; fp(); }")
    assert [s.key.name for s in enumerate_pois(ir)] == ["l:main::fp"]


def test_poi_count_matches_textual_scan():
    # every '*' that is not a declarator or a multiplication in the fixtures is one level
    for name in FIXTURE_NAMES:
        ir = lower.load([str(fixture_path(name))])
        text = fixture_path(name).read_text()
        derefs = sum(line.strip().startswith("*") for line in text.splitlines())
        assert len(enumerate_pois(ir)) == derefs


def test_literal_address_is_named():
    ir = lower.from_text("int *p;\nvoid main() { p = 4096; *p = 1; }")
    assert [n.loc.name for n in nodes(ir) if isinstance(n, AddressOf)] == ["lit:0x1000"]


def test_tokenizer_tracks_columns():
    toks = syntax.tokenize("int  x;", "t.mc")
    assert [(t.text, t.col) for t in toks[:3]] == [("int", 1), ("x", 6), (";", 7)]
