"""Flow- and context-insensitive inclusion-based (Andersen) points-to analysis."""

from __future__ import annotations

import random
from collections import defaultdict, deque
from dataclasses import dataclass, field

from . import memory as mm
from .errors import BudgetExceeded
from .ir import Addr, AddressOf, Alloc, Call, Copy, Load, ProgramIR, Ref, Store, field_loc
from .memory import PointsToMap

DEFAULT_MAX_ITERATIONS = 2_000_000


@dataclass
class ConstraintGraph:
    ptr_nodes: set = field(default_factory=set)
    ptd_sets: dict = field(default_factory=dict)  # key -> set of MemLoc
    copy_edges: set = field(default_factory=set)  # (from, to)
    complex_constraints: list = field(default_factory=list)  # (kind, lhs, rhs, path)

    def seed(self, key, loc):
        self.ptr_nodes.add(key)
        self.ptd_sets.setdefault(key, set()).add(loc)

    def edge(self, src, dst):
        self.ptr_nodes.update((src, dst))
        self.copy_edges.add((src, dst))


@dataclass
class FISResult:
    points_to: PointsToMap
    ir: ProgramIR  # with indirect call edges resolved
    diagnostics: list
    rounds: int


def local_seeds(ir: ProgramIR):
    """(key, loc) pairs for default values that are not global initializers."""
    for f in ir.functions.values():
        for key in f.uninit:
            yield key, mm.UNKNOWN
    for key in ir.functions[ir.entry].ptr_params:
        yield key, mm.UNKNOWN


def collect_constraints(ir: ProgramIR) -> ConstraintGraph:
    g = ConstraintGraph()
    for key, vals in mm.default_init(ir).raw.items():
        for v in vals:
            g.seed(key, v)
    for key, loc in local_seeds(ir):
        g.seed(key, loc)
    callees = ir.callees
    for f in ir.functions.values():
        for nid, n in f.nodes.items():
            if isinstance(n, AddressOf):
                g.seed(n.dst, n.loc)
            elif isinstance(n, Alloc):
                g.seed(n.dst, mm.heap(n.site))
                for cell in ir.heap_cells[n.site]:
                    g.seed(cell, mm.UNKNOWN)
            elif isinstance(n, Copy):
                g.edge(n.src, n.dst)
            elif isinstance(n, Load):
                g.ptr_nodes.add(n.src)
                if n.dst is not None:
                    g.ptr_nodes.add(n.dst)
                    g.complex_constraints.append(("load", n.dst, n.src, n.path))
            elif isinstance(n, Store):
                g.ptr_nodes.add(n.dst)
                if n.src is not None:
                    g.ptr_nodes.add(n.src)
                    g.complex_constraints.append(("store", n.dst, n.src, n.path))
            elif isinstance(n, Call):
                for callee in callees.get((f.name, nid), ()):
                    bind_call(g, n, ir.functions[callee])
    return g


def bind_call(g: ConstraintGraph, call: Call, callee) -> None:
    formals = [loc for loc, _ in callee.params]
    for formal, actual in zip(formals, call.actuals):
        if isinstance(actual, Ref):
            g.edge(actual.key, formal)
        elif isinstance(actual, Addr):
            g.seed(formal, actual.loc)
    if call.ret is not None and callee.ret_key is not None:
        g.edge(callee.ret_key, call.ret)


def _sccs(nodes, succ) -> list:
    """Strongly connected components with more than one member (iterative Tarjan)."""
    index: dict = {}
    low: dict = {}
    stack: list = []
    on: set = set()
    out = []
    counter = 0
    for root in nodes:
        if root in index:
            continue
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on.add(root)
        work = [(root, iter(succ.get(root, ())))]
        while work:
            v, it = work[-1]
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on.add(w)
                    work.append((w, iter(succ.get(w, ()))))
                    break
                if w in on and index[w] < low[v]:
                    low[v] = index[w]
            else:
                work.pop()
                if work:
                    u = work[-1][0]
                    if low[v] < low[u]:
                        low[u] = low[v]
                if low[v] == index[v]:
                    comp = []
                    while True:
                        w = stack.pop()
                        on.discard(w)
                        comp.append(w)
                        if w == v:
                            break
                    if len(comp) > 1:
                        out.append(comp)
    return out


def solve(g: ConstraintGraph, max_iterations: int = DEFAULT_MAX_ITERATIONS,
          shuffle_seed: int | None = None, observer=None) -> PointsToMap:
    """Least solution of the inclusion constraints.

    Worklist propagation with difference sets: a node pushes only pointees it
    has not pushed before. Locations are interned as integers, and cycles of
    copy edges are periodically collapsed into one node since all their
    members end up with the same set. ``observer``, if given, is called with
    the current solution after every step.
    """
    locs: list = []
    ids: dict = {}

    def intern(loc) -> int:
        i = ids.get(loc)
        if i is None:
            i = ids[loc] = len(locs)
            locs.append(loc)
            parent.append(i)
        return i

    parent: list = []

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    fields: dict = {}

    def field_id(i: int, path: tuple) -> int:
        j = fields.get((i, path))
        if j is None:
            j = fields[(i, path)] = intern(field_loc(locs[i], path))
        return j

    # intern in name order so the amount of work does not depend on hash seeds
    pts: dict = defaultdict(set)
    for k in sorted(g.ptd_sets):
        pts[intern(k)] |= {intern(v) for v in sorted(g.ptd_sets[k])}
    edges = [(intern(a), intern(b)) for a, b in sorted(g.copy_edges)]
    complex_ = [(kind, intern(lhs), intern(rhs), path) for kind, lhs, rhs, path in g.complex_constraints]
    order = [intern(n) for n in sorted(g.ptr_nodes)]
    if shuffle_seed is not None:
        rng = random.Random(shuffle_seed)
        rng.shuffle(edges)
        rng.shuffle(complex_)
        rng.shuffle(order)
    succ: dict = defaultdict(set)
    for a, b in edges:
        if a != b:
            succ[a].add(b)
    loads = defaultdict(list)
    stores = defaultdict(list)
    for kind, lhs, rhs, path in complex_:
        if kind == "load":
            loads[rhs].append((lhs, path))
        else:
            stores[lhs].append((rhs, path))

    work = deque(n for n in order if pts.get(n))
    queued = set(work)
    steps = 0
    new_edges = 0

    def push(n):
        if n not in queued:
            queued.add(n)
            work.append(n)

    def add_edge(a, b):
        nonlocal new_edges
        if parent[a] != a:
            a = find(a)
        if parent[b] != b:
            b = find(b)
        if a == b or b in succ[a]:
            return
        succ[a].add(b)
        new_edges += 1
        src = pts.get(a)
        if src and not src <= pts[b]:
            pts[b] |= src
            push(b)

    def collapse():
        nodes = sorted(n for n in succ if find(n) == n)
        view = {n: {find(t) for t in succ[n]} for n in nodes}
        for comp in _sccs(nodes, view):
            r = min(comp)
            merged_succ: set = set()
            merged_pts: set = set()
            merged_done = None
            for m in comp:
                merged_succ |= view.get(m, set())
                merged_pts |= pts.pop(m, set())
                d = done.pop(m, set())
                merged_done = set(d) if merged_done is None else merged_done & d
                if m != r:
                    parent[m] = r
                    loads[r].extend(loads.pop(m, ()))
                    stores[r].extend(stores.pop(m, ()))
                    succ.pop(m, None)
            succ[r] = {t for t in merged_succ if find(t) != r}
            pts[r] = merged_pts
            done[r] = merged_done or set()
            push(r)

    is_key: dict = {}
    done: dict = defaultdict(set)  # pointees of n already pushed through its constraints
    period = max(64, len(order) // 2)
    while work:
        steps += 1
        if steps > max_iterations:
            raise BudgetExceeded(f"flow-insensitive solver exceeded {max_iterations} iterations")
        if steps % period == 0 and new_edges:
            new_edges = 0
            collapse()
        n = find(work.popleft())
        queued.discard(n)
        cur = pts[n]
        seen = done[n]
        delta = cur - seen
        if not delta:
            continue
        seen |= delta
        nl, ns = loads.get(n), stores.get(n)
        if nl or ns:
            targets = []
            for x in delta:
                k = is_key.get(x)
                if k is None:
                    k = is_key[x] = locs[x].is_key
                if k:
                    targets.append(x)
            for lhs, path in nl or ():
                for x in targets:
                    add_edge(field_id(x, path), lhs)
            for rhs, path in ns or ():
                for x in targets:
                    add_edge(rhs, field_id(x, path))
        for t in succ[n]:
            if parent[t] != t:
                t = find(t)
                if t == n:
                    continue
            ps = pts[t]
            if not delta <= ps:
                ps |= delta
                if t not in queued:
                    queued.add(t)
                    work.append(t)
        if observer is not None:
            observer({loc: {locs[v] for v in pts.get(find(i), ())} for i, loc in enumerate(locs)})
    out = {}
    shared: dict = {}  # one frozenset per representative
    for i, loc in enumerate(locs):
        r = find(i)
        vals = pts.get(r)
        if vals and loc.is_key:
            fs = shared.get(r)
            if fs is None:
                fs = shared[r] = frozenset([locs[v] for v in vals])
            out[loc] = fs
    return PointsToMap._wrap(out)


def resolve_function_pointers(ir: ProgramIR, current: PointsToMap):
    """Call edges for every indirect call from the callee pointer's set.

    Returns (edges, diagnostics).
    """
    edges = set(ir.call_edges)
    diagnostics = []
    for fname, nid, node in ir.indirect_calls():
        targets = sorted(x.ident for x in current.get(node.pointer) if x.kind == mm.FUNC and x.ident in ir.functions)
        if not targets:
            diagnostics.append({
                "kind": "unresolvable indirect call",
                "function": fname,
                "node": nid,
                "line": node.line,
                "pointer": node.pointer.name,
            })
        for t in targets:
            edges.add((fname, nid, t))
    return edges, diagnostics


def analyze(ir: ProgramIR, max_iterations: int = DEFAULT_MAX_ITERATIONS) -> FISResult:
    """Solve, resolve indirect calls, and repeat until the call graph is stable."""
    rounds = 0
    while True:
        rounds += 1
        pts = solve(collect_constraints(ir), max_iterations)
        edges, diagnostics = resolve_function_pointers(ir, pts)
        if edges == set(ir.call_edges):
            return FISResult(pts, ir, diagnostics, rounds)
        ir = ir.with_call_edges(edges)
