"""Context-sensitive analysis with value contexts.

A function is solved separately for every distinct value reaching it (its
context). A context is the caller state at the call projected onto what the
callee can see; two contexts are the same exactly when those values are
equal. Each context keeps its own node facts and exit value, and a caller
context is re-solved whenever the exit of a context it uses grows.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from . import memory as mm
from .dataflow import Budget, call_targets, entry_boundary, no_callee, project, restore, solve_function
from .errors import BudgetExceeded
from .ir import Call, PoISite, ProgramIR
from .memory import TOP, PointsToMap

DEFAULT_MAX_ITERATIONS = 2_000_000
DEFAULT_MAX_CONTEXTS = 1_000


@dataclass
class ContextEntry:
    func: str
    value: PointsToMap
    serial: int  # creation order within the function
    exit: object = TOP
    ins: dict = field(default_factory=dict)
    outs: dict = field(default_factory=dict)
    callers: set = field(default_factory=set)
    calls: set = field(default_factory=set)  # contexts used by the latest solve


@dataclass
class CSResult:
    ir: ProgramIR
    contexts: dict  # function -> list of live ContextEntry, by context id
    iterations: int = 0
    created: int = 0

    def reached(self, func: str) -> bool:
        return bool(self.contexts.get(func))

    def poi_sets(self, site: PoISite) -> list:
        """(context id, set) for every live context of the site's function."""
        out = []
        for cid, entry in enumerate(self.contexts.get(site.func, ())):
            val = entry.ins.get(site.node, TOP)
            out.append((cid, frozenset() if val is TOP else val.get(site.key)))
        return out

    def context_table(self) -> dict:
        return {
            name: {
                "count": len(entries),
                "contexts": [{"id": i, "value": e.value.to_json()} for i, e in enumerate(entries)],
            }
            for name, entries in sorted(self.contexts.items())
        }


def merge_poi_contexts(per_context: list):
    """Union of the per-context sets; None when no context was analysed."""
    if not per_context:
        return None
    merged = frozenset()
    for _, s in per_context:
        merged |= s
    return merged


class _ValueContexts:
    def __init__(self, ir: ProgramIR, max_iterations: int, max_contexts: int):
        self.ir = ir
        self.budget = Budget(max_iterations, "context-sensitive analysis")
        self.max_contexts = max_contexts
        self.table: dict = {}
        self.per_func: dict = {}
        self.work: deque = deque()
        self.queued: set = set()

    def push(self, key) -> None:
        if key not in self.queued:
            self.queued.add(key)
            self.work.append(key)

    def context(self, func: str, value: PointsToMap):
        key = (func, value)
        if key not in self.table:
            n = self.per_func.get(func, 0)
            if n >= self.max_contexts:
                raise BudgetExceeded(f"function '{func}' exceeded {self.max_contexts} contexts")
            self.per_func[func] = n + 1
            self.table[key] = ContextEntry(func, value, n)
            self.push(key)
        return key

    def call_out(self, current, calls: set):
        ir = self.ir
        caller = current[0]

        def out(nid, node: Call, in_val):
            targets = call_targets(ir, caller, nid, node, in_val)
            if targets is None:
                return TOP
            callees, skipped = targets
            result = no_callee(ir, node, in_val) if skipped else TOP
            for name in callees:
                callee = ir.functions[name]
                ctx, keys = project(ir, callee, node, in_val)
                key = self.context(name, ctx)
                entry = self.table[key]
                entry.callers.add(current)
                calls.add(key)
                result = mm.meet(result, restore(ir, callee, node, in_val, keys, entry.exit))
            return result

        return out

    def run(self) -> CSResult:
        ir = self.ir
        root = self.context(ir.entry, entry_boundary(ir))
        while self.work:
            key = self.work.popleft()
            self.queued.discard(key)
            entry = self.table[key]
            f = ir.functions[entry.func]
            calls: set = set()
            ins, outs = solve_function(f, entry.value, self.call_out(key, calls), ir, self.budget)
            entry.ins, entry.outs, entry.calls = ins, outs, calls
            new_exit = outs.get(f.exit, TOP)
            if new_exit != entry.exit:
                entry.exit = new_exit
                for c in sorted(entry.callers, key=self._order):
                    self.push(c)
        return CSResult(ir, self.live(root), self.budget.used, len(self.table))

    def _order(self, key):
        e = self.table[key]
        return (e.func, e.serial)

    def live(self, root) -> dict:
        """Contexts reachable from the entry context through the final call edges."""
        seen = {root}
        stack = [root]
        while stack:
            for k in self.table[stack.pop()].calls:
                if k not in seen:
                    seen.add(k)
                    stack.append(k)
        out: dict = {}
        for k in sorted(seen, key=self._order):
            out.setdefault(k[0], []).append(self.table[k])
        return out


def run_cs(ir: ProgramIR, max_iterations: int = DEFAULT_MAX_ITERATIONS,
           max_contexts: int = DEFAULT_MAX_CONTEXTS) -> CSResult:
    """Value-context analysis from the entry function's global initialization."""
    return _ValueContexts(ir, max_iterations, max_contexts).run()


def resolve_context(result: CSResult, func: str, value: PointsToMap):
    """Re-solve ``func`` under a context using the final table; returns the exit value."""
    eng = _ValueContexts(result.ir, DEFAULT_MAX_ITERATIONS, DEFAULT_MAX_CONTEXTS)
    for entries in result.contexts.values():
        for e in entries:
            eng.table[(e.func, e.value)] = e
    calls: set = set()
    f = result.ir.functions[func]
    _, outs = solve_function(f, value, eng.call_out((func, value), calls), result.ir, eng.budget)
    return outs.get(f.exit, TOP)
