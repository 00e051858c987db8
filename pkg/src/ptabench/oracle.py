"""Bounded concrete interpreter used as ground truth for the analyses.

Every execution is enumerated: both arms of every branch, each loop taken 0..k
times per entry and recursion at most k deep. Concrete addresses are pairs
``(abstract location, instance)`` where the instance tells frames and heap
objects apart, so an observed address maps straight onto the abstraction.

* Uninitialised locals and fresh heap cells hold ``unknown``; globals start
  from their initializer or ``null``.
* Dereferencing ``null`` or ``unknown`` is recorded and the access skipped; a
  skipped read produces poison.
* Dereferencing poison or a cell of a returned frame ends the path.

Two interpreters share these rules: one walks the lowered CFG (and records
the pointer seen at every dereference site), the other walks the syntax tree.
Comparing their final global stores checks that lowering preserves meaning.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import memory as mm
from .errors import BudgetExceeded
from .ir import (
    Addr,
    AddressOf,
    Alloc,
    Call,
    Copy,
    Load,
    ProgramIR,
    Ref,
    Store,
    enumerate_pois,
    field_loc,
)
from .lower import ALLOCATORS, BUILTINS, _FunctionLowering, _Program
from .syntax import (
    ArrayT,
    Assign,
    Binary,
    Block,
    CallExpr,
    Decl,
    ExprStmt,
    FuncT,
    If,
    Index,
    IntLit,
    Member,
    Name,
    PtrT,
    Return,
    SizeOf,
    StructT,
    Unary,
    While,
    is_pointer,
)

DEFAULT_MAX_STEPS = 2_000_000

POISON = None
NULLV = (mm.NULL, 0)
UNKV = (mm.UNKNOWN, 0)


class _Abort(Exception):
    """The current path cannot continue (poison or dangling access)."""


@dataclass
class OracleResult:
    loop_bound: int
    observations: dict  # PoI id -> frozenset of MemLoc
    events: list  # sorted (kind, function, line, col)
    finals: frozenset  # distinct final global stores
    paths: int = 0
    truncated: int = 0

    def to_json(self) -> dict:
        return {
            "loop_bound": self.loop_bound,
            "paths": self.paths,
            "truncated": self.truncated,
            "observations": {k: mm.names(v) for k, v in sorted(self.observations.items())},
            "events": [{"kind": k, "function": f, "line": ln, "col": c} for k, f, ln, c in self.events],
        }


@dataclass
class _State:
    store: dict
    frames: list  # IR: [func, inst, node, loops]; AST: [func, inst]
    dead: set
    counter: int
    aborted: bool = False

    def copy(self) -> _State:
        return _State(dict(self.store), [list(fr[:3]) + [dict(fr[3])] if len(fr) > 3 else list(fr)
                                         for fr in self.frames], set(self.dead), self.counter, self.aborted)

    def fresh(self) -> int:
        self.counter += 1
        return self.counter

    def signature(self):
        frames = tuple((fr[0], fr[1], fr[2], tuple(sorted(fr[3].items()))) if len(fr) > 3 else tuple(fr)
                       for fr in self.frames)
        return frames, frozenset(self.store.items()), frozenset(self.dead), self.counter


def _addr_name(v) -> str:
    return "poison" if v is POISON else v[0].name


def _put(store: dict, cell, v) -> None:
    if v is POISON:
        store.pop(cell, None)
    else:
        store[cell] = v


class _Machine:
    """Semantics shared by both interpreters."""

    def __init__(self, ir: ProgramIR, k: int, max_steps: int):
        if k < 0:
            raise ValueError("loop bound must be non-negative")
        self.ir = ir
        self.k = k
        self.max_steps = max_steps
        self.steps = 0
        self.events: set = set()
        self.finals: set = set()
        self.paths = 0
        self.truncated = 0

    def tick(self) -> None:
        self.steps += 1
        if self.steps > self.max_steps:
            raise BudgetExceeded(f"oracle exceeded {self.max_steps} steps")

    def initial(self) -> _State:
        store = {}
        for decl in self.ir.globals:
            for key in decl.keys:
                init = decl.initializer if key == decl.var else None
                store[(key, 0)] = (init, 0) if init is not None else NULLV
        st = _State(store, [], set(), 0)
        return st

    @staticmethod
    def inst_of(loc: mm.MemLoc, st: _State) -> int:
        return st.frames[-1][1] if loc.local_of is not None else 0

    def address(self, loc: mm.MemLoc, st: _State):
        return (loc, self.inst_of(loc, st))

    def cell(self, key: mm.MemLoc, st: _State):
        return (key, self.inst_of(key, st))

    def target(self, v, path, site, st: _State):
        """Cell reached by dereferencing ``v``; None when the access is skipped."""
        if v is POISON:
            raise _Abort
        loc, inst = v
        if loc.kind in (mm.NULL_KIND, mm.UNKNOWN_KIND):
            self.events.add((f"{loc.kind} dereference",) + site)
            return None
        if not loc.is_key:
            self.events.add(("dereference of a non-object",) + site)
            return None
        if inst in st.dead:
            raise _Abort
        return (field_loc(loc, path), inst)

    def enter(self, st: _State, callee, values) -> int:
        inst = st.fresh()
        for (formal, _), v in zip(callee.params, values):
            if v is not None:
                _put(st.store, (formal, inst), v)
        for key in callee.uninit:
            st.store[(key, inst)] = UNKV
        return inst

    def leave(self, st: _State, callee, inst: int):
        ret = st.store.get((callee.ret_key, inst)) if callee.ret_key is not None else POISON
        st.dead.add(inst)
        for c in [c for c in st.store if c[1] == inst and c[0].local_of is not None]:
            del st.store[c]
        return ret

    def depth(self, st: _State, name: str) -> int:
        return sum(1 for fr in st.frames if fr[0] == name)

    def alloc(self, st: _State, site: int):
        inst = st.fresh()
        for c in self.ir.heap_cells.get(site, (mm.heap(site),)):
            st.store[(c, inst)] = UNKV
        return (mm.heap(site), inst)

    def finish(self, st: _State) -> None:
        self.paths += 1
        final = frozenset((c[0].name, _addr_name(v)) for c, v in st.store.items() if c[0].is_global)
        self.finals.add(final)

    def entry_values(self):
        f = self.ir.functions[self.ir.entry]
        return [UNKV if is_pointer(t) else None for _, t in f.params]


# ---------------------------------------------------------------------------
# lowered CFG


class _IRInterpreter(_Machine):
    def __init__(self, ir, k, max_steps):
        super().__init__(ir, k, max_steps)
        self.obs: dict = {}
        self.order = {name: {n: i for i, n in enumerate(f.rpo)} for name, f in ir.functions.items()}

    def observe(self, func, nid, v) -> None:
        if v is not POISON:
            self.obs.setdefault((func, nid), set()).add(v[0])

    def run(self) -> None:
        st = self.initial()
        entry = self.ir.functions[self.ir.entry]
        inst = self.enter(st, entry, self.entry_values())
        st.frames.append([entry.name, inst, entry.entry, {}])
        work = [st]
        seen = set()
        while work:
            st = work.pop()
            try:
                nxt = self.step(st)
            except _Abort:
                self.truncated += 1
                continue
            if nxt is None:
                continue
            if len(nxt) > 1:
                fresh = []
                for s in nxt:
                    sig = s.signature()
                    if sig not in seen:
                        seen.add(sig)
                        fresh.append(s)
                nxt = fresh
            work.extend(reversed(nxt))

    def move(self, st: _State, succ: int) -> bool:
        fr = st.frames[-1]
        order = self.order[fr[0]]
        cur = fr[2]
        if order[succ] <= order[cur]:
            n = fr[3].get(succ, 0) + 1
            if n > self.k:
                return False
            fr[3][succ] = n
        else:
            fr[3].pop(succ, None)
        fr[2] = succ
        return True

    def advance(self, st: _State):
        """States following the current node of the top frame."""
        fr = st.frames[-1]
        succs = self.ir.functions[fr[0]].succ[fr[2]]
        out = []
        for i, s in enumerate(succs):
            nst = st if i == len(succs) - 1 else st.copy()
            if self.move(nst, s):
                out.append(nst)
            else:
                self.truncated += 1
        return out

    def step(self, st: _State):
        self.tick()
        fr = st.frames[-1]
        name, inst, nid = fr[0], fr[1], fr[2]
        f = self.ir.functions[name]
        node = f.nodes[nid]
        site = (name, node.line, node.col)
        store = st.store
        if nid == f.exit:
            ret = self.leave(st, f, inst)
            st.frames.pop()
            if not st.frames:
                self.finish(st)
                return None
            caller = st.frames[-1]
            call = self.ir.functions[caller[0]].nodes[caller[2]]
            if call.ret is not None:
                _put(store, self.cell(call.ret, st), ret)
            return self.advance(st)
        if isinstance(node, AddressOf):
            _put(store, self.cell(node.dst, st), self.address(node.loc, st))
        elif isinstance(node, Copy):
            _put(store, self.cell(node.dst, st), store.get(self.cell(node.src, st)))
        elif isinstance(node, Alloc):
            _put(store, self.cell(node.dst, st), self.alloc(st, node.site))
        elif isinstance(node, Load):
            v = store.get(self.cell(node.src, st))
            self.observe(name, nid, v)
            t = self.target(v, node.path, site, st)
            if node.dst is not None:
                _put(store, self.cell(node.dst, st), store.get(t) if t is not None else POISON)
        elif isinstance(node, Store):
            v = store.get(self.cell(node.dst, st))
            self.observe(name, nid, v)
            t = self.target(v, node.path, site, st)
            if t is not None and node.src is not None:
                _put(store, t, store.get(self.cell(node.src, st)))
        elif isinstance(node, Call):
            return self.call(st, f, nid, node, site)
        return self.advance(st)

    def call(self, st: _State, f, nid, node: Call, site):
        store = st.store
        if node.pointer is not None:
            v = store.get(self.cell(node.pointer, st))
            self.observe(f.name, nid, v)
            if v is POISON:
                raise _Abort
            if v[0].kind != mm.FUNC or v[0].ident not in self.ir.functions:
                self.events.add((f"call through {v[0].kind}",) + site)
                if node.ret is not None:
                    _put(store, self.cell(node.ret, st), POISON)
                return self.advance(st)
            name = v[0].ident
        else:
            name = node.callee
        callee = self.ir.functions[name]
        if self.depth(st, name) > self.k:
            self.truncated += 1
            return None
        values = []
        for a in node.actuals:
            if isinstance(a, Ref):
                values.append(store.get(self.cell(a.key, st)))
            elif isinstance(a, Addr):
                values.append(self.address(a.loc, st))
            else:
                values.append(None)
        inst = self.enter(st, callee, values)
        st.frames.append([name, inst, callee.entry, {}])
        return [st]


# ---------------------------------------------------------------------------
# syntax tree


class _Typer:
    """Static typing borrowed from the lowering, with names pre-resolved."""

    lookup_scope = _FunctionLowering.lookup
    is_function_name = _FunctionLowering.is_function_name
    type_of = _FunctionLowering.type_of
    callee_type = _FunctionLowering.callee_type

    def __init__(self, prog: _Program, resolved: dict):
        self.prog = prog
        self.resolved = resolved
        self.scope = {}

    def lookup(self, e: Name):
        sym = self.resolved.get(id(e))
        if sym is not None:
            return sym
        g = self.prog.globals.get(e.ident)
        return (g[0], g[1], g[2]) if g is not None else None


def _resolve_names(prog: _Program, fd, func: str, out: dict) -> None:
    """Map every Name node of a function body to its declaration, in textual order."""
    scope = {}
    for pname, ptype in fd.params:
        scope[pname] = (mm.var(pname, func), ptype, False)

    def expr(e):
        if e is None:
            return
        if isinstance(e, Name):
            if e.ident in scope:
                out[id(e)] = scope[e.ident]
        elif isinstance(e, Unary):
            expr(e.operand)
        elif isinstance(e, Binary):
            expr(e.left)
            expr(e.right)
        elif isinstance(e, Index):
            expr(e.base)
            expr(e.index)
        elif isinstance(e, Member):
            expr(e.base)
        elif isinstance(e, CallExpr):
            expr(e.func)
            for a in e.args:
                expr(a)

    def stmts(body):
        for s in body:
            if isinstance(s, Decl):
                loc = mm.array(s.ident, func) if isinstance(s.type, ArrayT) else mm.var(s.ident, func)
                scope[s.ident] = (loc, s.type, s.const)
                if s.init is not None:
                    out[id(s)] = scope[s.ident]
                    expr(s.init)
            elif isinstance(s, Assign):
                expr(s.target)
                expr(s.value)
            elif isinstance(s, ExprStmt):
                expr(s.expr)
            elif isinstance(s, Block):
                stmts(s.body)
            elif isinstance(s, If):
                expr(s.cond)
                stmts(s.then)
                stmts(s.orelse or [])
            elif isinstance(s, While):
                expr(s.cond)
                stmts(s.body)
            elif isinstance(s, Return):
                expr(s.value)

    stmts(fd.body)


@dataclass(frozen=True)
class _Lazy:
    cell: tuple  # read when the operand is used


@dataclass(frozen=True)
class _Val:
    v: object


@dataclass(frozen=True)
class _Direct:
    cell: tuple


@dataclass(frozen=True)
class _Pending:
    op: object  # _Lazy | _Val holding the pointer
    path: tuple = ()


class _ASTInterpreter(_Machine):
    def __init__(self, ir, units, k, max_steps):
        super().__init__(ir, k, max_steps)
        self.prog = _Program(units)
        resolved: dict = {}
        for name, fd in self.prog.functions.items():
            _resolve_names(self.prog, fd, name, resolved)
        self.typer = _Typer(self.prog, resolved)

    def run(self) -> None:
        st = self.initial()
        entry = self.ir.functions[self.ir.entry]
        inst = self.enter(st, entry, self.entry_values())
        st.frames.append([entry.name, inst])
        for st2, _ in self.body(self.prog.functions[entry.name].body, st):
            self.leave(st2, entry, inst)
            st2.frames.pop()
            self.finish(st2)

    # -- helpers

    def resolve(self, op, st):
        if isinstance(op, _Lazy):
            return st.store.get(op.cell)
        if isinstance(op, _Val):
            return op.v
        return None

    def sym_cell(self, sym, st):
        loc = sym[0]
        return (loc, self.inst_of(loc, st))

    def deref(self, pl, st, e):
        """Cell named by a place, or None when the access is skipped.

        An aborting access marks the state; the path is dropped at the end of
        the statement so sibling paths are unaffected.
        """
        if isinstance(pl, _Direct):
            return pl.cell
        v = self.resolve(pl.op, st)
        try:
            return self.target(v, pl.path, (st.frames[-1][0], e.line, e.col), st)
        except _Abort:
            st.aborted = True
            return None

    # -- statements

    def body(self, stmts, st, i=0):
        if i == len(stmts):
            yield st, None
            return
        for st2, flow in self.stmt(stmts[i], st):
            if st2.aborted:
                self.truncated += 1
                continue
            if flow:
                yield st2, flow
            else:
                yield from self.body(stmts, st2, i + 1)

    def stmt(self, s, st):
        self.tick()
        if isinstance(s, Decl):
            if s.init is None:
                yield st, None
                return
            for st2 in self.assign(Name(s.line, s.col, s.ident), s.init, st, sym=self.typer.resolved[id(s)]):
                yield st2, None
        elif isinstance(s, Assign):
            for st2 in self.assign(s.target, s.value, st):
                yield st2, None
        elif isinstance(s, ExprStmt):
            if isinstance(s.expr, CallExpr):
                for st2, _ in self.call(s.expr, st, None):
                    yield st2, None
            else:
                for st2, _, _ in self.value(s.expr, st):
                    yield st2, None
        elif isinstance(s, Block):
            yield from self.body(s.body, st)
        elif isinstance(s, If):
            for st2, _, _ in self.value(s.cond, st):
                yield from self.body(s.then, st2.copy())
                yield from self.body(s.orelse or [], st2)
        elif isinstance(s, While):
            yield from self.loop(s, st, 0)
        elif isinstance(s, Return):
            f = self.ir.functions[st.frames[-1][0]]
            if s.value is None:
                yield st, "return"
            elif f.ret_key is not None:
                ret_t = self.prog.functions[f.name].type.ret
                for st2 in self.into(self.cell(f.ret_key, st), ret_t, s.value, st):
                    yield st2, "return"
            else:
                for st2, _, _ in self.value(s.value, st):
                    yield st2, "return"

    def loop(self, s: While, st, n):
        for st2, _, _ in self.value(s.cond, st):
            if n < self.k:
                for st3, flow in self.body(s.body, st2.copy()):
                    if flow:
                        yield st3, flow
                    else:
                        yield from self.loop(s, st3, n + 1)
            else:
                self.truncated += 1
            yield st2, None

    # -- expressions: generators of (state, type, operand)

    def value(self, e, st):
        if isinstance(e, Name):
            sym = self.typer.lookup(e)
            if sym is None:
                yield st, PtrT(self.prog.signatures[e.ident]), _Val((mm.func(e.ident), 0))
                return
            loc, t, _ = sym
            if isinstance(t, ArrayT):
                yield st, PtrT(t.elem), _Val(self.sym_cell(sym, st))
            elif isinstance(t, PtrT):
                yield st, t, _Lazy(self.sym_cell(sym, st))
            else:
                yield st, t, None
        elif isinstance(e, IntLit):
            yield st, None, _Val(NULLV if e.value == 0 else (mm.lit(e.value), 0))
        elif isinstance(e, SizeOf):
            yield st, None, None
        elif isinstance(e, Unary):
            if e.op == "&":
                yield from self.address_of(e, st)
            elif e.op == "*":
                yield from self.read(e, st)
            else:
                for st2, _, _ in self.value(e.operand, st):
                    yield st2, None, None
        elif isinstance(e, Binary):
            for st2, _, _ in self.value(e.left, st):
                for st3, _, _ in self.value(e.right, st2):
                    yield st3, None, None
        elif isinstance(e, (Index, Member)):
            yield from self.read(e, st)
        elif isinstance(e, CallExpr):
            t = self.typer.type_of(e)
            for st2, v in self.call(e, st, None, want_value=True):
                yield st2, t, _Val(v)

    def address_of(self, e: Unary, st):
        inner = e.operand
        if self.typer.is_function_name(inner):
            yield st, None, _Val((mm.func(inner.ident), 0))
            return
        for st2, t, pl in self.place(inner, st):
            if isinstance(pl, _Direct):
                yield st2, PtrT(t), _Val(pl.cell)
            else:
                yield st2, PtrT(t), pl.op

    def read(self, e, st):
        for st2, t, pl in self.place(e, st):
            if isinstance(t, ArrayT):
                yield st2, PtrT(t.elem), _Val(pl.cell)
            elif isinstance(t, FuncT):
                yield st2, PtrT(t), pl.op
            elif isinstance(pl, _Direct):
                yield st2, t, (_Lazy(pl.cell) if is_pointer(t) else None)
            else:
                cell = self.deref(pl, st2, e)
                if is_pointer(t):
                    yield st2, t, _Val(st2.store.get(cell) if cell is not None else POISON)
                else:
                    yield st2, t, None

    def place(self, e, st):
        if isinstance(e, Name):
            sym = self.typer.lookup(e)
            yield st, sym[1], _Direct(self.sym_cell(sym, st))
        elif isinstance(e, Unary) and e.op == "*":
            for st2, t, op in self.value(e.operand, st):
                yield st2, t.target, _Pending(op)
        elif isinstance(e, Index):
            bt = self.typer.type_of(e.base)
            for st2, _, _ in self.value(e.index, st):
                if isinstance(bt, ArrayT):
                    for st3, _, pl in self.place(e.base, st2):
                        yield st3, bt.elem, pl
                else:
                    for st3, t, op in self.value(e.base, st2):
                        yield st3, t.target, _Pending(op)
        elif isinstance(e, Member):
            if e.arrow:
                gen = ((s, t.target, _Pending(op)) for s, t, op in self.value(e.base, st))
            else:
                gen = self.place(e.base, st)
            for st2, stype, pl in gen:
                assert isinstance(stype, StructT)
                ftype = dict(self.prog.structs[stype.name])[e.ident]
                step = (stype.name, e.ident)
                if isinstance(pl, _Direct):
                    yield st2, ftype, _Direct((mm.field(pl.cell[0], *step), pl.cell[1]))
                else:
                    yield st2, ftype, _Pending(pl.op, pl.path + (step,))

    # -- assignments: generators of states

    def assign(self, target, value, st, sym=None):
        places = ([(st, sym[1], _Direct(self.sym_cell(sym, st)))] if sym is not None
                  else self.place(target, st))
        for st2, t, pl in places:
            if isinstance(t, PtrT):
                if isinstance(pl, _Direct):
                    yield from self.into(pl.cell, t, value, st2)
                    continue
                for st3, op in self.materialize(value, st2):
                    cell = self.deref(pl, st3, target)
                    if cell is not None:
                        _put(st3.store, cell, self.resolve(op, st3))
                    yield st3
            else:
                for st3, _, _ in self.value(value, st2):
                    if isinstance(pl, _Pending):
                        self.deref(pl, st3, target)
                    yield st3

    def is_alloc(self, e) -> bool:
        return isinstance(e, CallExpr) and self.typer.is_function_name(e.func) and e.func.ident in ALLOCATORS

    def materialize(self, value, st):
        if self.is_alloc(value):
            for st2, v in self.call(value, st, None, want_value=True):
                yield st2, _Val(v)
            return
        for st2, _, op in self.value(value, st):
            yield st2, (_Val(self.resolve(op, st2)) if isinstance(op, _Lazy) else op)

    def into(self, cell, t, value, st):
        if isinstance(value, CallExpr):
            for st2, v in self.call(value, st, cell):
                yield st2
            return
        if isinstance(value, (Index, Member)) or (isinstance(value, Unary) and value.op == "*"):
            for st2, vt, pl in self.place(value, st):
                if isinstance(pl, _Pending) and isinstance(vt, PtrT):
                    c = self.deref(pl, st2, value)
                    _put(st2.store, cell, st2.store.get(c) if c is not None else POISON)
                elif isinstance(vt, ArrayT):
                    _put(st2.store, cell, pl.cell)
                elif isinstance(pl, _Direct):
                    _put(st2.store, cell, st2.store.get(pl.cell))
                else:
                    _put(st2.store, cell, self.resolve(pl.op, st2))
                yield st2
            return
        for st2, _, op in self.value(value, st):
            _put(st2.store, cell, self.resolve(op, st2))
            yield st2

    def call(self, e: CallExpr, st, ret_cell, want_value=False):
        """Generator of (state, returned value)."""
        f = e.func
        if self.typer.is_function_name(f) and f.ident in BUILTINS:
            for st2, _ in self.args(e.args, st):
                if f.ident == "free":
                    yield st2, POISON
                    continue
                v = self.alloc(st2, e.line)
                if ret_cell is not None:
                    _put(st2.store, ret_cell, v)
                yield st2, v
            return
        if self.typer.is_function_name(f):
            callee_ops = [(st, _Val((mm.func(f.ident), 0)))]
        else:
            target = f.operand if isinstance(f, Unary) and f.op == "*" else f
            callee_ops = [(s, op) for s, _, op in self.value(target, st)]
        ftype = self.typer.callee_type(f.operand if isinstance(f, Unary) and f.op == "*" else f)
        for st2, fop in callee_ops:
            for st3, ops in self.args(e.args, st2, ftype):
                yield from self.invoke(e, st3, fop, ops, ret_cell)

    def args(self, args, st, ftype=None, i=0, acc=()):
        if i == len(args):
            yield st, acc
            return
        pt = ftype.params[i] if ftype is not None and i < len(ftype.params) else None
        for st2, at, op in self.value(args[i], st):
            if not (is_pointer(at) or (pt is not None and is_pointer(pt))):
                op = None
            yield from self.args(args, st2, ftype, i + 1, acc + (op,))

    def invoke(self, e, st, fop, ops, ret_cell):
        v = self.resolve(fop, st)
        site = (st.frames[-1][0], e.line, e.col)
        if st.aborted:
            yield st, POISON
            return
        if v is POISON:
            st.aborted = True
            yield st, POISON
            return
        if v[0].kind != mm.FUNC or v[0].ident not in self.ir.functions:
            self.events.add((f"call through {v[0].kind}",) + site)
            if ret_cell is not None:
                _put(st.store, ret_cell, POISON)
            yield st, POISON
            return
        name = v[0].ident
        if self.depth(st, name) > self.k:
            self.truncated += 1
            return
        callee = self.ir.functions[name]
        values = [self.resolve(op, st) if op is not None else None for op in ops]
        inst = self.enter(st, callee, values)
        st.frames.append([name, inst])
        for st2, _ in self.body(self.prog.functions[name].body, st):
            ret = self.leave(st2, callee, inst)
            st2.frames.pop()
            if ret_cell is not None:
                _put(st2.store, ret_cell, ret)
            yield st2, ret


# ---------------------------------------------------------------------------


def interpret_all(ir: ProgramIR, loop_bound: int, max_steps: int = DEFAULT_MAX_STEPS) -> OracleResult:
    """Run every bounded execution of the lowered program and collect observations."""
    m = _IRInterpreter(ir, loop_bound, max_steps)
    m.run()
    sites = {(s.func, s.node): s.id for s in enumerate_pois(ir)}
    obs = {}
    for key, locs in m.obs.items():
        sid = sites[key]
        obs[sid] = obs.get(sid, frozenset()) | frozenset(locs)
    return OracleResult(loop_bound, obs, sorted(m.events), frozenset(m.finals), m.paths, m.truncated)


def interpret_source(ir: ProgramIR, units, loop_bound: int, max_steps: int = DEFAULT_MAX_STEPS) -> frozenset:
    """Distinct final global stores from running the syntax tree directly."""
    m = _ASTInterpreter(ir, units, loop_bound, max_steps)
    m.run()
    return frozenset(m.finals)

