"""Building blocks shared by the flow-sensitive and context-sensitive engines.

Flow values are either ``TOP`` (no information yet, the identity of meet) or
a ``PointsToMap``. Both engines use the same node transfer, the same
projection of a caller's state onto a callee and the same intraprocedural
worklist, so that anything the context-sensitive engine derives is, by
monotonicity, also contained in the flow-sensitive result.
"""

from __future__ import annotations

import heapq
from collections import defaultdict

from . import memory as mm
from .errors import BudgetExceeded
from .ir import (
    Addr,
    AddressOf,
    Alloc,
    Call,
    Copy,
    Entry,
    FunctionIR,
    Load,
    ProgramIR,
    Ref,
    Store,
    field_loc,
)
from .memory import TOP, MemLoc, PointsToMap

NOTHING: frozenset = frozenset()


def _default_summary(loc: MemLoc) -> bool:
    return loc.is_summary


def _assign(raw: dict, key: MemLoc, vals: frozenset, weak: bool) -> None:
    if weak:
        old = raw.get(key)
        if old is not None:
            vals = old | vals
    if vals:
        raw[key] = vals
    else:
        raw.pop(key, None)


def load_targets(pts, path) -> list:
    return [field_loc(x, path) for x in pts if x.is_key]


def transfer(node, in_val, ir: ProgramIR | None = None):
    """OUT of a pointer assignment, allocation or marker node.

    Direct assignments kill the destination; a store kills its target only when
    the pointer has exactly one pointee and that pointee is not a summary
    location. Assignments into summary locations are always weak. A store
    through a pointer with no binding at all yields TOP: the node cannot
    execute with any state the analysis has seen so far.
    """
    if in_val is TOP:
        return TOP
    is_summary = ir.is_summary if ir is not None else _default_summary
    get = in_val.raw.get
    if isinstance(node, AddressOf):
        raw = dict(in_val.raw)
        _assign(raw, node.dst, frozenset((node.loc,)), is_summary(node.dst))
    elif isinstance(node, Copy):
        raw = dict(in_val.raw)
        _assign(raw, node.dst, get(node.src, NOTHING), is_summary(node.dst))
    elif isinstance(node, Alloc):
        raw = dict(in_val.raw)
        cell = mm.heap(node.site)
        _assign(raw, node.dst, frozenset((cell,)), is_summary(node.dst))
        cells = ir.heap_cells[node.site] if ir is not None else (cell,)
        unknown = frozenset((mm.UNKNOWN,))
        for key in cells:
            _assign(raw, key, unknown, True)
    elif isinstance(node, Load):
        if node.dst is None:
            return in_val
        vals = NOTHING
        for t in load_targets(get(node.src, NOTHING), node.path):
            v = get(t)
            if v:
                vals = vals | v
        raw = dict(in_val.raw)
        _assign(raw, node.dst, vals, is_summary(node.dst))
    elif isinstance(node, Store):
        pts = get(node.dst, NOTHING)
        if node.src is None:
            return in_val
        if not pts:
            return TOP
        vals = get(node.src, NOTHING)
        targets = load_targets(pts, node.path)
        strong = len(pts) == 1 and len(targets) == 1 and not is_summary(targets[0])
        raw = dict(in_val.raw)
        for t in targets:
            _assign(raw, t, vals, not strong)
    elif isinstance(node, Entry):
        return in_val
    else:
        return in_val
    return PointsToMap._wrap(raw)


def seed_entry(f: FunctionIR, boundary):
    """Entry OUT: locals declared without an initializer may hold anything."""
    if boundary is TOP or not f.uninit:
        return boundary
    raw = dict(boundary.raw)
    unknown = frozenset((mm.UNKNOWN,))
    for key in f.uninit:
        _assign(raw, key, unknown, True)
    return PointsToMap._wrap(raw)


def strong_kills(node, in_val, ir: ProgramIR) -> frozenset:
    """Keys whose previous value is certainly overwritten by ``node``."""
    if isinstance(node, (AddressOf, Copy, Alloc)) or (isinstance(node, Load) and node.dst is not None):
        return NOTHING if ir.is_summary(node.dst) else frozenset((node.dst,))
    if isinstance(node, Store) and node.src is not None:
        pts = in_val.get(node.dst)
        targets = load_targets(pts, node.path)
        if len(pts) == 1 and len(targets) == 1 and not ir.is_summary(targets[0]):
            return frozenset(targets)
    return NOTHING


def modified_keys(node, in_val, ir: ProgramIR) -> set:
    """Keys a non-call node may write."""
    if isinstance(node, Alloc):
        return {node.dst, *ir.heap_cells[node.site]}
    if isinstance(node, (AddressOf, Copy)) or (isinstance(node, Load) and node.dst is not None):
        return {node.dst}
    if isinstance(node, Store) and node.src is not None:
        return set(load_targets(in_val.get(node.dst), node.path))
    return set()


def call_targets(ir: ProgramIR, caller: str, nid: int, node: Call, in_val):
    """Callees of a call under ``in_val`` as ``(names, skipped)``.

    ``skipped`` is true when the callee pointer may hold something other than
    a defined function, in which case the call may do nothing at all. Returns
    None when the callee pointer is unbound.
    """
    if node.pointer is None:
        return (node.callee,), False
    pts = in_val.get(node.pointer)
    if not pts:
        return None
    pcg = set(ir.callees.get((caller, nid), ()))
    names = tuple(sorted(x.ident for x in pts if x.kind == mm.FUNC and x.ident in pcg))
    return names, len(names) < len(pts)


_FRAMED = (mm.VAR, mm.ARRAY)
_ANCESTORS: dict = {}


def _ancestors(k: MemLoc) -> tuple:
    a = _ANCESTORS.get(k)
    if a is None:
        a = _ANCESTORS[k] = tuple(k.ancestors())
    return a


def _root(k: MemLoc) -> MemLoc:
    return _ancestors(k)[-1]


def project(ir: ProgramIR, callee: FunctionIR, call: Call, in_val: PointsToMap):
    """The part of the caller's state visible to ``callee``.

    Returns ``(context, keys)`` where ``keys`` are the caller keys replaced by
    the callee's exit value on return. Formals are bound from the actuals;
    globals named by the callee or its callees are always visible, and so is
    every key inside an object reachable from those or from a formal.
    """
    raw = in_val.raw
    rec = callee.name in ir.recursive
    bound = {}
    for (formal, _), actual in zip(callee.params, call.actuals):
        if isinstance(actual, Ref):
            v = raw.get(actual.key)
        elif isinstance(actual, Addr):
            v = frozenset((actual.loc,))
        else:
            continue
        if v:
            bound[formal] = v
    index = defaultdict(list)
    keys = set()
    frontier = []
    addressed = ir.addressed_roots
    named = ir.global_refs[callee.name]
    for k, v in raw.items():
        root = _root(k)
        if root in named:
            keys.add(k)
            frontier.extend(v)
            continue
        if root.kind in _FRAMED and (root not in addressed or (not rec and root.func == callee.name)):
            continue  # a local whose address is never taken is invisible to callees
        for a in _ancestors(k):
            index[a].append(k)
    for v in bound.values():
        frontier.extend(v)
    reach = set(frontier)
    frontier = list(reach)
    while frontier:
        for k in index.get(frontier.pop(), ()):
            if k not in keys:
                keys.add(k)
                new = raw[k] - reach
                if new:
                    reach |= new
                    frontier.extend(new)
    ctx = {k: raw[k] for k in keys}
    for formal, v in bound.items():
        old = ctx.get(formal)
        ctx[formal] = v if old is None else old | v
    return PointsToMap._wrap(ctx), frozenset(keys)


def bind_return(raw: dict, ir: ProgramIR, target: MemLoc | None, vals: frozenset) -> None:
    if target is not None:
        _assign(raw, target, vals, ir.is_summary(target))


def restore(ir: ProgramIR, callee: FunctionIR, call: Call, in_val: PointsToMap,
            keys: frozenset, exit_val):
    """Caller state after a call, from the callee's exit value for one context."""
    if exit_val is TOP:
        return TOP
    name = callee.name
    rec = name in ir.recursive
    raw = {k: v for k, v in in_val.raw.items() if k not in keys or (rec and k.local_of == name)}
    for k, v in exit_val.raw.items():
        own = k.local_of == name
        if own and not rec:
            continue
        if k in keys and not own:
            raw[k] = v
        else:
            old = raw.get(k)
            raw[k] = v if old is None else old | v
    ret = exit_val.get(callee.ret_key) if callee.ret_key is not None else NOTHING
    bind_return(raw, ir, call.ret, ret)
    return PointsToMap._wrap(raw)


def no_callee(ir: ProgramIR, call: Call, in_val: PointsToMap) -> PointsToMap:
    """A call with no analysable target only clobbers its return target."""
    if call.ret is None:
        return in_val
    raw = dict(in_val.raw)
    bind_return(raw, ir, call.ret, NOTHING)
    return PointsToMap._wrap(raw)


class Budget:
    def __init__(self, limit: int, what: str):
        self.limit = limit
        self.what = what
        self.used = 0

    def tick(self, n: int = 1) -> None:
        self.used += n
        if self.used > self.limit:
            raise BudgetExceeded(f"{self.what} exceeded {self.limit} iterations")


def solve_function(f: FunctionIR, boundary, call_out, ir: ProgramIR, budget: Budget):
    """Intraprocedural fixpoint. Returns (ins, outs) keyed by node id.

    ``call_out(nid, node, in_val)`` supplies OUT for call nodes. Nodes never
    reached stay absent (TOP).
    """
    rpo = f.rpo
    order = {n: i for i, n in enumerate(rpo)}
    pred = f.pred
    succ = f.succ
    nodes = f.nodes
    ins: dict = {}
    outs: dict = {}
    heap = [0]
    queued = {f.entry}
    while heap:
        n = rpo[heapq.heappop(heap)]
        queued.discard(n)
        budget.tick()
        node = nodes[n]
        if n == f.entry:
            in_val = boundary
        else:
            in_val = TOP
            for p in pred[n]:
                o = outs.get(p, TOP)
                if o is not TOP:
                    in_val = o if in_val is TOP else mm.join_maps(in_val, o)
        if in_val is TOP:
            continue
        ins[n] = in_val
        if n == f.entry:
            out = seed_entry(f, in_val)
        elif isinstance(node, Call):
            out = call_out(n, node, in_val)
        else:
            out = transfer(node, in_val, ir)
        if out is TOP or outs.get(n) == out:
            continue
        outs[n] = out
        for s in succ[n]:
            if s not in queued and s in order:
                queued.add(s)
                heapq.heappush(heap, order[s])
    return ins, outs


def must_kill(f: FunctionIR, ins: dict, call_kills, ir: ProgramIR):
    """Keys overwritten on every path from Entry to Exit, or None if Exit is unreachable.

    ``call_kills(nid, node, in_val)`` gives the certain kills of a call node, or
    None when the call never returns.
    """
    rpo = f.rpo
    pred = f.pred
    kout: dict = {}
    changed = True
    while changed:
        changed = False
        for n in rpo:
            if n not in ins:
                continue
            kin = None if n != f.entry else NOTHING
            for p in pred[n]:
                k = kout.get(p)
                if k is None:
                    continue
                kin = k if kin is None else kin & k
            if kin is None:
                continue
            node = f.nodes[n]
            if isinstance(node, Call):
                extra = call_kills(n, node, ins[n])
                if extra is None:
                    continue
            else:
                extra = strong_kills(node, ins[n], ir)
            new = kin | extra
            if kout.get(n) != new:
                kout[n] = new
                changed = True
    res = kout.get(f.exit)
    if res is None:
        return None
    return frozenset(k for k in res if k.local_of != f.name)


def entry_boundary(ir: ProgramIR) -> PointsToMap:
    """Global initializations plus unknown formals for the entry function."""
    init = mm.default_init(ir)
    formals = ir.functions[ir.entry].ptr_params
    if not formals:
        return init
    raw = dict(init.raw)
    for key in formals:
        raw[key] = frozenset((mm.UNKNOWN,))
    return PointsToMap._wrap(raw)


def pcg_order(ir: ProgramIR) -> list:
    """Functions reachable from the entry, callers first (reverse post-order)."""
    graph: dict = defaultdict(set)
    for caller, _, callee in ir.call_edges:
        graph[caller].add(callee)
    seen, post = {ir.entry}, []
    stack = [(ir.entry, iter(sorted(graph[ir.entry])))]
    while stack:
        fn, it = stack[-1]
        for g in it:
            if g not in seen:
                seen.add(g)
                stack.append((g, iter(sorted(graph[g]))))
                break
        else:
            stack.pop()
            post.append(fn)
    return post[::-1]
