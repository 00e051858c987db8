"""Flow-sensitive, context-insensitive analysis with function summaries.

Every function is solved once under a boundary value that merges the states
of all its call sites. Its summary is what a call site needs: the keys it
certainly overwrites (``kill``) and the exit bindings of the keys it may
modify (``gen``). A worklist re-solves a function whenever its boundary or
the summary of one of its callees changes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import memory as mm
from .dataflow import (
    NOTHING,
    Budget,
    bind_return,
    call_targets,
    entry_boundary,
    modified_keys,
    must_kill,
    no_callee,
    pcg_order,
    project,
    solve_function,
)
from .ir import Call, PoISite, ProgramIR
from .memory import TOP, PointsToMap

DEFAULT_MAX_ITERATIONS = 2_000_000


@dataclass(frozen=True)
class FunctionSummary:
    kill: frozenset
    gen: PointsToMap
    ret: frozenset = NOTHING  # exit value of the return slot

    def to_json(self) -> dict:
        return {"kill": mm.names(self.kill), "gen": self.gen.to_json(), "return": mm.names(self.ret)}


def apply_summary(s: FunctionSummary | None, in_val, ret_target=None, ir: ProgramIR | None = None):
    """OUT of a call: gen joined with what survives the kill, then the return binding."""
    if s is None or in_val is TOP:
        return TOP
    raw = {k: v for k, v in in_val.raw.items() if k not in s.kill}
    for k, v in s.gen.raw.items():
        old = raw.get(k)
        raw[k] = v if old is None else old | v
    if ret_target is not None:
        if ir is None:
            if s.ret:
                raw[ret_target] = s.ret
            else:
                raw.pop(ret_target, None)
        else:
            bind_return(raw, ir, ret_target, s.ret)
    return PointsToMap._wrap(raw)


@dataclass
class FSResult:
    ir: ProgramIR
    ins: dict  # function -> node id -> PointsToMap
    outs: dict
    boundaries: dict
    summaries: dict  # function -> FunctionSummary | None (exit unreachable)
    passes: int = 0  # function solves
    iterations: int = 0
    mods: dict = field(default_factory=dict)

    def reached(self, func: str) -> bool:
        return func in self.ins

    def at(self, func: str, node: int):
        """IN value at a node: None for a dead function, TOP for an unreached node."""
        if func not in self.ins:
            return None
        return self.ins[func].get(node, TOP)

    def poi_set(self, site: PoISite):
        val = self.at(site.func, site.node)
        if val is None:
            return None
        if val is TOP:
            return frozenset()
        return val.get(site.key)

    def exit_value(self, func: str):
        f = self.ir.functions[func]
        return self.outs.get(func, {}).get(f.exit, TOP)


class _FlowSensitive:
    def __init__(self, ir: ProgramIR, max_iterations: int):
        self.ir = ir
        self.budget = Budget(max_iterations, "flow-sensitive analysis")
        self.boundaries: dict = {ir.entry: entry_boundary(ir)}
        self.summaries: dict = {}
        self.mods: dict = {}
        self.ins: dict = {}
        self.outs: dict = {}
        self.touched: set = set()
        self.projections: dict = {}

    def contribute(self, callee: str, ctx: PointsToMap) -> None:
        old = self.boundaries.get(callee)
        new = ctx if old is None else mm.join_maps(old, ctx)
        if old is None or new != old:
            self.boundaries[callee] = new
            self.touched.add(callee)

    def call_out(self, caller: str):
        ir = self.ir

        def out(nid, node: Call, in_val):
            targets = call_targets(ir, caller, nid, node, in_val)
            if targets is None:
                return TOP
            callees, skipped = targets
            result = no_callee(ir, node, in_val) if skipped else TOP
            for name in callees:
                callee = ir.functions[name]
                memo = (name, node.actuals, in_val)
                ctx = self.projections.get(memo)
                if ctx is None:
                    ctx = self.projections[memo] = project(ir, callee, node, in_val)[0]
                self.contribute(name, ctx)
                o = apply_summary(self.summaries.get(name), in_val, node.ret, ir)
                result = mm.meet(result, o)
            return result

        return out

    def call_kills(self, caller: str):
        ir = self.ir

        def kills(nid, node: Call, in_val):
            targets = call_targets(ir, caller, nid, node, in_val)
            if targets is None:
                return None
            callees, skipped = targets
            ret = NOTHING if node.ret is None or ir.is_summary(node.ret) else frozenset((node.ret,))
            common = NOTHING if skipped else None
            for name in callees:
                s = self.summaries.get(name)
                if s is None:
                    continue
                common = s.kill if common is None else common & s.kill
            if common is None:
                return None
            return common | ret

        return kills

    def mod_keys(self, name: str, ins: dict) -> frozenset:
        ir = self.ir
        f = ir.functions[name]
        mod = set(f.uninit)
        if name in ir.recursive:
            mod.update(f.ptr_params)  # a recursive call rebinds the formals
        for nid, in_val in ins.items():
            node = f.nodes[nid]
            if isinstance(node, Call):
                if node.ret is not None:
                    mod.add(node.ret)
                for callee in (call_targets(ir, name, nid, node, in_val) or ((), False))[0]:
                    mod |= self.mods.get(callee, NOTHING)
            else:
                mod |= modified_keys(node, in_val, ir)
        if name not in ir.recursive:
            mod = {k for k in mod if k.local_of != name}
        return frozenset(mod)

    def summarize(self, name: str, ins: dict, outs: dict):
        f = self.ir.functions[name]
        mod = self.mod_keys(name, ins)
        self.mods[name] = mod
        exit_val = outs.get(f.exit, TOP)
        if exit_val is TOP:
            return None
        kill = must_kill(f, ins, self.call_kills(name), self.ir)
        if kill is None:
            return None
        kill = frozenset(k for k in kill if not self.ir.is_summary(k))
        gen = PointsToMap._wrap({k: v for k, v in exit_val.raw.items() if k in mod})
        ret = exit_val.get(f.ret_key) if f.ret_key is not None else NOTHING
        return FunctionSummary(kill, gen, ret)

    def run(self) -> FSResult:
        ir = self.ir
        order = pcg_order(ir)
        callers: dict = {}
        for caller, _, callee in ir.call_edges:
            callers.setdefault(callee, set()).add(caller)
        # alternate callers-first and callees-first sweeps over the dirty functions:
        # boundaries travel down in one, summaries travel up in the other
        live = frozenset(order)
        dirty = set(order)
        solves = 0
        forward = True
        while dirty:
            for name in order if forward else reversed(order):
                if name not in dirty:
                    continue
                dirty.discard(name)
                boundary = self.boundaries.get(name)
                if boundary is None:
                    continue
                solves += 1
                f = ir.functions[name]
                self.touched = set()
                ins, outs = solve_function(f, boundary, self.call_out(name), ir, self.budget)
                self.ins[name], self.outs[name] = ins, outs
                old_mod = self.mods.get(name)
                s = self.summarize(name, ins, outs)
                dirty |= self.touched
                if name not in self.summaries or self.summaries[name] != s or old_mod != self.mods[name]:
                    dirty |= callers.get(name, set()) & live
                self.summaries[name] = s
            forward = not forward
        return FSResult(ir, self.ins, self.outs, dict(self.boundaries), dict(self.summaries),
                        solves, self.budget.used, dict(self.mods))


def run(ir: ProgramIR, max_iterations: int = DEFAULT_MAX_ITERATIONS) -> FSResult:
    """Flow-sensitive fixpoint over a program whose call graph is already closed."""
    return _FlowSensitive(ir, max_iterations).run()


def analyze_function(ir: ProgramIR, name: str, boundary, summaries: dict,
                     max_iterations: int = DEFAULT_MAX_ITERATIONS):
    """Solve one function under ``boundary`` with fixed callee summaries.

    Returns ``(ins, outs, exit value)``.
    """
    eng = _FlowSensitive(ir, max_iterations)
    eng.summaries = dict(summaries)
    f = ir.functions[name]
    ins, outs = solve_function(f, boundary, eng.call_out(name), ir, eng.budget)
    return ins, outs, outs.get(f.exit, TOP)
