from __future__ import annotations

import pytest

from ptabench import lower, oracle
from ptabench import memory as mm
from ptabench.errors import BudgetExceeded
from ptabench.ir import SourceProgram

from conftest import FIXTURE_NAMES, fixture_path, run_fixture


def observed(ir, k):
    return {sid: set(mm.names(v)) for sid, v in oracle.interpret_all(ir, k).observations.items()}


def by_line(obs: dict) -> dict:
    return {int(sid.split(":")[-3]): v for sid, v in obs.items()}


def test_p2_straight_line():
    obs = by_line(observed(run_fixture("P2").ir, 0))
    assert obs == {6: {"g:a"}}


def test_p5_else_branch_sees_both_actuals():
    obs = by_line(observed(run_fixture("P5").ir, 0))
    assert obs[12] == {"g:a", "g:b"}
    assert obs[10] == {"g:g"}


def test_p1_observes_only_assigned_address(fixture_runs):
    run = fixture_runs["P1"]
    obs = by_line(observed(run.ir, 0))
    assert obs == {7: {"g:a"}}
    site = run.poi("g:p")
    assert set(mm.names(run.fis.points_to.get(site.key))) == {"g:a", "null"}


def test_p6_heap_named_by_line():
    assert by_line(observed(run_fixture("P6").ir, 0)) == {4: {"heap:3"}}


def test_loop_bound_controls_iterations():
    ir = lower.from_text("int a; int *p;\nvoid main() {\n while (a) { p = &a; }\n *p = 1;\n}")
    assert by_line(observed(ir, 0)) == {4: {"null"}}
    assert by_line(observed(ir, 1)) == {4: {"null", "g:a"}}
    res = oracle.interpret_all(ir, 2)
    assert ("null dereference", "main", 4, 2) in res.events
    assert res.paths == 3


def test_uninitialized_local_deref_is_an_event():
    ir = lower.from_text("void main() {\n int *p;\n *p = 1;\n}")
    res = oracle.interpret_all(ir, 0)
    assert [e[0] for e in res.events] == ["unknown dereference"]


def test_recursion_is_capped():
    src = "int a; int *p;\nvoid r() {\n p = &a;\n if (a) { r(); }\n *p = 1;\n}\nvoid main() { r(); }"
    res = oracle.interpret_all(lower.from_text(src), 1)
    assert by_line({k: set(mm.names(v)) for k, v in res.observations.items()}) == {5: {"g:a"}}
    assert res.truncated >= 1


def test_function_pointer_call_observed():
    src = "int a; int *p;\nvoid f() { p = &a; }\nvoid main() {\n void (*fp)();\n fp = &f;\n fp();\n *p = 1;\n}"
    obs = by_line(observed(lower.from_text(src), 0))
    assert obs == {6: {"fn:f"}, 7: {"g:a"}}


def test_step_budget_raises():
    src = "int a; int *p;\nvoid main() {\n while (a) { if (a) { p = &a; } else { p = 0; } }\n}"
    with pytest.raises(BudgetExceeded):
        oracle.interpret_all(lower.from_text(src), 3, max_steps=20)


@pytest.mark.parametrize("name", FIXTURE_NAMES)
def test_deterministic(name):
    ir = run_fixture(name).ir
    assert oracle.interpret_all(ir, 2) == oracle.interpret_all(ir, 2)


@pytest.mark.parametrize("name", FIXTURE_NAMES)
@pytest.mark.parametrize("k", [0, 1, 2])
def test_lowering_preserves_final_stores(name, k):
    source = SourceProgram.from_paths([str(fixture_path(name))])
    ir = lower.lower_program(source)
    units = lower.parse_units(source)
    assert oracle.interpret_source(ir, units, k) == oracle.interpret_all(ir, k).finals


def test_lowering_preserves_multi_level_store():
    src = ("int a; int b; int *p; int **q; int ***w;\n"
           "void main() {\n p = &a; q = &p; w = &q;\n **w = &b;\n *p = 1;\n}")
    source = SourceProgram.from_text(src)
    ir = lower.lower_program(source)
    finals = oracle.interpret_all(ir, 0).finals
    assert finals == oracle.interpret_source(ir, lower.parse_units(source), 0)
    assert by_line(observed(ir, 0))[5] == {"g:b"}
