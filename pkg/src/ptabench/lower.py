"""Type-check the AST and lower it to :class:`~ptabench.ir.ProgramIR`.

Abstractions applied here:

* struct members become distinct field locations,
* every element of an array is the one monolithic array location,
* ``malloc``/``calloc``/``alloc`` at line L become ``Alloc(p, L)``,
* multi-level expressions are split with function-local temporaries
  ``__t0, __t1, ...`` so that ``**q = r`` becomes ``t = *q; *t = r``.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import memory as mm
from .errors import ParseError, SemanticError
from .ir import (
    Addr,
    AddressOf,
    Alloc,
    Branch,
    Call,
    Copy,
    Entry,
    Exit,
    FunctionIR,
    GlobalDecl,
    Load,
    ProgramIR,
    Ref,
    SourceProgram,
    Store,
)
from .syntax import (
    INT,
    VOID,
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
    IntT,
    Member,
    Name,
    PtrT,
    Return,
    SizeOf,
    StructT,
    Unary,
    While,
    is_pointer,
    parse,
)

ALLOCATORS = ("malloc", "calloc", "alloc")
BUILTINS = ALLOCATORS + ("free",)


@dataclass(frozen=True)
class IntConst:
    value: int


@dataclass(frozen=True)
class Direct:
    loc: mm.MemLoc


@dataclass(frozen=True)
class Deref:
    key: mm.MemLoc
    path: tuple
    line: int
    col: int
    level: int


def pointer_keys(loc: mm.MemLoc, t, structs: dict) -> list[mm.MemLoc]:
    """Every location inside an object of type ``t`` that can hold a pointer."""
    if isinstance(t, PtrT):
        return [loc]
    if isinstance(t, ArrayT):
        return pointer_keys(loc, t.elem, structs)
    if isinstance(t, StructT):
        out = []
        for fname, ftype in structs[t.name]:
            out.extend(pointer_keys(mm.field(loc, t.name, fname), ftype, structs))
        return out
    return []


def storage(ident: str, t, func: str | None = None) -> mm.MemLoc:
    return mm.array(ident, func) if isinstance(t, ArrayT) else mm.var(ident, func)


def _same_shape(a, b) -> bool:
    if isinstance(a, PtrT) and isinstance(b, PtrT):
        if a.target == VOID or b.target == VOID:
            return True
        if isinstance(a.target, FuncT) and isinstance(b.target, FuncT):
            return True
        return _same_shape(a.target, b.target)
    if isinstance(a, FuncT) and isinstance(b, FuncT):
        return True
    return a == b


class _Program:
    """Symbol tables shared by every function being lowered."""

    def __init__(self, units):
        self.units = list(units)
        self.structs: dict = {}
        self.globals: dict = {}  # ident -> (loc, type, const, decl)
        self.functions: dict = {}  # ident -> FuncDef with body
        self.signatures: dict = {}  # ident -> FuncT
        self.collect()

    def err(self, msg, file, node):
        return SemanticError(msg, file, node.line, node.col)

    def collect(self):
        for unit in self.units:
            for s in unit.structs:
                if s.ident in self.structs and self.structs[s.ident] != s.fields:
                    raise self.err(f"conflicting definitions of struct {s.ident}", unit.file, s)
                self.structs[s.ident] = s.fields
        for unit in self.units:
            for fd in unit.functions:
                if fd.ident in BUILTINS:
                    raise self.err(f"'{fd.ident}' is a builtin", unit.file, fd)
                if fd.body is not None:
                    if fd.ident in self.functions:
                        raise ParseError(f"duplicate definition of function '{fd.ident}'", unit.file, fd.line, fd.col)
                    self.functions[fd.ident] = fd
                self.signatures.setdefault(fd.ident, fd.type)
            for d in unit.globals:
                if d.ident in self.globals:
                    raise self.err(f"duplicate global '{d.ident}'", unit.file, d)
                self.check_type(d.type, unit.file, d)
                self.globals[d.ident] = (storage(d.ident, d.type), d.type, d.const, d, unit.file)
        for name in self.signatures:
            if name not in self.functions:
                fd = next(f for u in self.units for f in u.functions if f.ident == name)
                raise self.err(f"function '{name}' is declared but never defined", fd.file, fd)

    def check_type(self, t, file, node):
        while isinstance(t, (PtrT, ArrayT)):
            t = t.target if isinstance(t, PtrT) else t.elem
        if isinstance(t, StructT) and t.name not in self.structs:
            raise self.err(f"unknown struct '{t.name}'", file, node)

    # -- globals

    def global_initializer(self, d: Decl, file: str):
        e = d.init
        if e is None:
            return None
        if not is_pointer(d.type):
            if isinstance(d.type, IntT) and isinstance(e, (IntLit, SizeOf)):
                return None
            raise self.err("only pointer and integer globals may be initialized", file, d)
        if isinstance(e, IntLit):
            return mm.NULL if e.value == 0 else mm.lit(e.value)
        if isinstance(e, Name):
            if e.ident in self.globals:
                loc, t, *_ = self.globals[e.ident]
                if isinstance(t, ArrayT):
                    return loc
            if e.ident in self.functions:
                return mm.func(e.ident)
        if isinstance(e, Unary) and e.op == "&":
            if isinstance(e.operand, Name) and e.operand.ident in self.functions:
                return mm.func(e.operand.ident)
            loc = self.static_place(e.operand, file)
            if loc is not None:
                return loc
        raise self.err("global initializer must be a constant address", file, e)

    def static_place(self, e, file):
        if isinstance(e, Name) and e.ident in self.globals:
            return self.globals[e.ident][0]
        if isinstance(e, Index):
            return self.static_place(e.base, file)
        if isinstance(e, Member) and not e.arrow:
            owner = self.static_place(e.base, file)
            t = self.static_type(e.base)
            if owner is not None and isinstance(t, StructT):
                return mm.field(owner, t.name, e.ident)
        return None

    def static_type(self, e):
        if isinstance(e, Name):
            return self.globals[e.ident][1]
        if isinstance(e, Index):
            t = self.static_type(e.base)
            return t.elem if isinstance(t, ArrayT) else None
        if isinstance(e, Member):
            t = self.static_type(e.base)
            if isinstance(t, StructT):
                return dict(self.structs[t.name]).get(e.ident)
        return None

    def global_decls(self) -> tuple:
        out = []
        for loc, t, const, d, file in self.globals.values():
            init = self.global_initializer(d, file)
            if const and init is None:
                raise self.err(f"const pointer '{d.ident}' needs an address initializer", file, d)
            keys = tuple(pointer_keys(loc, t, self.structs))
            out.append(GlobalDecl(loc, t, const, init, keys))
        return tuple(out)


class _FunctionLowering:
    def __init__(self, prog: _Program, fd):
        self.prog = prog
        self.fd = fd
        self.name = fd.ident
        self.file = fd.file
        self.nodes: dict = {0: Entry(line=fd.line), 1: Exit(line=fd.line)}
        self.succ: dict = {0: [], 1: []}
        self.preds = [0]
        self.ntemps = 0
        self.scope: dict = {}  # ident -> (loc, type, const)
        self.uninit: list = []
        self.locals: set = set()
        self.const_keys: set = set()
        self.params = []
        for pname, ptype in fd.params:
            if isinstance(ptype, StructT):
                raise self.err("struct parameters are not supported", fd)
            prog.check_type(ptype, self.file, fd)
            loc = mm.var(pname, self.name)
            if pname in self.scope:
                raise self.err(f"duplicate parameter '{pname}'", fd)
            self.scope[pname] = (loc, ptype, False)
            self.locals.add(loc)
            self.params.append((loc, ptype))
        self.ret_type = fd.type.ret
        self.ret_key = mm.var("__ret", self.name) if is_pointer(self.ret_type) else None
        if self.ret_key is not None:
            self.locals.add(self.ret_key)

    def err(self, msg, node):
        return SemanticError(msg, self.file, node.line, node.col)

    # -- CFG construction

    def emit(self, stmt) -> int:
        nid = len(self.nodes)
        self.nodes[nid] = stmt
        self.succ[nid] = []
        for p in self.preds:
            self.succ[p].append(nid)
        self.preds = [nid]
        return nid

    def temp(self) -> mm.MemLoc:
        loc = mm.var(f"__t{self.ntemps}", self.name)
        self.ntemps += 1
        self.locals.add(loc)
        return loc

    def run(self) -> FunctionIR:
        self.block(self.fd.body)
        for p in self.preds:
            self.succ[p].append(1)
        return self.finish()

    def finish(self) -> FunctionIR:
        # drop nodes unreachable from Entry (code after return) and renumber
        seen, stack = {0}, [0]
        while stack:
            for s in self.succ[stack.pop()]:
                if s not in seen:
                    seen.add(s)
                    stack.append(s)
        keep = sorted(seen | {1})
        renum = {old: new for new, old in enumerate(keep)}
        nodes = {renum[n]: self.nodes[n] for n in keep}
        succ = {}
        for n in keep:
            out = []
            for s in self.succ[n]:
                if s in renum and renum[s] not in out:
                    out.append(renum[s])
            succ[renum[n]] = tuple(out)
        return FunctionIR(
            name=self.name,
            file=self.file,
            line=self.fd.line,
            params=tuple(self.params),
            nodes=nodes,
            succ=succ,
            ret_key=self.ret_key,
            uninit=tuple(self.uninit),
            locals=frozenset(self.locals),
            const_keys=frozenset(self.const_keys),
        )

    # -- statements

    def block(self, stmts):
        for s in stmts:
            self.stmt(s)

    def stmt(self, s):
        if isinstance(s, Decl):
            self.decl(s)
        elif isinstance(s, Assign):
            self.assign(s.target, s.value, s)
        elif isinstance(s, ExprStmt):
            if isinstance(s.expr, CallExpr):
                self.call(s.expr, None)
            else:
                self.value(s.expr)
        elif isinstance(s, Block):
            self.block(s.body)
        elif isinstance(s, If):
            self.value(s.cond)
            self.emit(Branch(line=s.line))
            fork = self.preds
            self.block(s.then)
            then_end = self.preds
            self.preds = fork
            if s.orelse is not None:
                self.block(s.orelse)
            self.preds = then_end + self.preds
        elif isinstance(s, While):
            head = len(self.nodes)
            self.value(s.cond)
            b = self.emit(Branch(line=s.line, loop=True))
            self.block(s.body)
            for p in self.preds:
                self.succ[p].append(head)
            self.preds = [b]
        elif isinstance(s, Return):
            if s.value is not None:
                if self.ret_key is not None:
                    self.into(self.ret_key, self.ret_type, s.value, s)
                elif self.ret_type == VOID:
                    raise self.err("void function returns a value", s)
                else:
                    self.value(s.value)
            elif self.ret_key is not None:
                raise self.err("missing return value", s)
            for p in self.preds:
                self.succ[p].append(1)
            self.preds = []
        else:  # pragma: no cover - parser produces no other statements
            raise self.err(f"unsupported statement {type(s).__name__}", s)

    def decl(self, d: Decl):
        if d.ident in self.scope and self.scope[d.ident][0].func == self.name:
            raise self.err(f"duplicate local '{d.ident}' in function '{self.name}'", d)
        if d.type == VOID:
            raise self.err("variable of type void", d)
        self.prog.check_type(d.type, self.file, d)
        loc = storage(d.ident, d.type, self.name)
        self.scope[d.ident] = (loc, d.type, d.const)
        self.locals.add(loc)
        keys = pointer_keys(loc, d.type, self.prog.structs)
        if d.const:
            self.const_keys.add(loc)
            if d.init is None:
                raise self.err(f"const pointer '{d.ident}' needs an initializer", d)
        if d.init is None:
            self.uninit.extend(keys)
            return
        if not (is_pointer(d.type) or isinstance(d.type, IntT)):
            raise self.err("only pointer and integer locals may be initialized", d)
        self.assign(Name(d.line, d.col, d.ident), d.init, d, declaring=True)

    # -- symbols

    def lookup(self, e: Name):
        if e.ident in self.scope:
            return self.scope[e.ident]
        g = self.prog.globals.get(e.ident)
        if g is not None:
            return g[0], g[1], g[2]
        return None

    def is_function_name(self, e) -> bool:
        return isinstance(e, Name) and self.lookup(e) is None and (
            e.ident in self.prog.functions or e.ident in BUILTINS)

    # -- expressions

    def text(self, e) -> str:
        """Canonical rendering of an expression with names resolved."""
        if isinstance(e, Name):
            sym = self.lookup(e)
            if sym is not None:
                return sym[0].name
            return mm.func(e.ident).name
        if isinstance(e, IntLit):
            return str(e.value)
        if isinstance(e, Unary):
            return e.op + self.text(e.operand)
        if isinstance(e, Binary):
            return f"({self.text(e.left)}{e.op}{self.text(e.right)})"
        if isinstance(e, Index):
            return f"{self.text(e.base)}[{self.text(e.index)}]"
        if isinstance(e, Member):
            return f"{self.text(e.base)}{'->' if e.arrow else '.'}{e.ident}"
        if isinstance(e, CallExpr):
            return f"{self.text(e.func)}({','.join(self.text(a) for a in e.args)})"
        return "sizeof"

    def value(self, e, chain_col=None):
        """Lower an rvalue. Returns (type, operand, depth).

        ``operand`` is Ref(key), Addr(loc), IntConst or None (plain scalar);
        ``depth`` counts the dereferences performed along this chain.
        """
        if isinstance(e, Name):
            sym = self.lookup(e)
            if sym is None:
                if e.ident in self.prog.functions:
                    return PtrT(self.prog.signatures[e.ident]), Addr(mm.func(e.ident)), 0
                raise self.err(f"unknown identifier '{e.ident}'", e)
            loc, t, _ = sym
            if isinstance(t, ArrayT):
                return PtrT(t.elem), Addr(loc), 0
            if isinstance(t, PtrT):
                return t, Ref(loc), 0
            if isinstance(t, StructT):
                raise self.err("struct values are not supported", e)
            return t, None, 0
        if isinstance(e, IntLit):
            return INT, IntConst(e.value), 0
        if isinstance(e, SizeOf):
            return INT, None, 0
        if isinstance(e, Unary):
            if e.op == "&":
                return self.address_of(e)
            if e.op == "*":
                return self.read(e, chain_col)
            self.value(e.operand)
            return INT, None, 0
        if isinstance(e, Binary):
            lt, _, _ = self.value(e.left)
            rt, _, _ = self.value(e.right)
            if e.op in "+-*/%" and (is_pointer(lt) or is_pointer(rt)):
                raise self.err("pointer arithmetic is not supported", e)
            return INT, None, 0
        if isinstance(e, (Index, Member)):
            return self.read(e, chain_col)
        if isinstance(e, CallExpr):
            t, op = self.call(e, None, want_value=True)
            return t, op, 0
        raise self.err("unsupported expression", e)  # pragma: no cover

    def address_of(self, e: Unary):
        inner = e.operand
        if self.is_function_name(inner):
            return PtrT(self.prog.signatures[inner.ident]), Addr(mm.func(inner.ident)), 0
        if not isinstance(inner, (Name, Unary, Index, Member)) or (
                isinstance(inner, Unary) and inner.op != "*"):
            raise self.err("cannot take the address of a temporary", e)
        t, pl, depth = self.place(inner)
        if isinstance(pl, Direct):
            return PtrT(t), Addr(pl.loc), 0
        if pl.path:
            raise self.err("taking the address of a field through a pointer is not supported", e)
        return PtrT(t), Ref(pl.key), depth

    def read(self, e, chain_col=None):
        t, pl, depth = self.place(e, chain_col)
        if isinstance(t, ArrayT):
            if isinstance(pl, Direct):
                return PtrT(t.elem), Addr(pl.loc), 0
            raise self.err("array through a pointer is not supported", e)  # pragma: no cover
        if isinstance(t, FuncT):
            if isinstance(pl, Deref) and not pl.path:
                return PtrT(t), Ref(pl.key), depth
            raise self.err("unsupported use of a function designator", e)
        if isinstance(t, StructT):
            raise self.err("struct values are not supported", e)
        if isinstance(pl, Direct):
            return t, (Ref(pl.loc) if is_pointer(t) else None), 0
        if is_pointer(t):
            tmp = self.temp()
            self.emit(Load(tmp, pl.key, pl.path, line=pl.line, col=pl.col, level=pl.level))
            return t, Ref(tmp), pl.level
        self.emit(Load(None, pl.key, pl.path, line=pl.line, col=pl.col, level=pl.level))
        return t, None, pl.level

    def deref_operand(self, e, t, op, depth, chain_col):
        if not isinstance(t, PtrT):
            raise self.err(f"cannot dereference a value of type {t}", e)
        if isinstance(op, Addr):
            if op.loc.kind in (mm.NULL_KIND, mm.LIT):
                raise self.err("dereference of a constant address", e)
            return t.target, Direct(op.loc), depth
        if isinstance(op, Ref):
            return t.target, Deref(op.key, (), e.line, chain_col, depth + 1), depth + 1
        raise self.err("cannot dereference this expression", e)  # pragma: no cover

    def place(self, e, chain_col=None):
        """Lower an lvalue. Returns (type, Direct|Deref, depth)."""
        col = e.col if chain_col is None else chain_col
        if isinstance(e, Name):
            sym = self.lookup(e)
            if sym is None:
                if self.is_function_name(e):
                    raise self.err(f"function '{e.ident}' is not assignable", e)
                raise self.err(f"unknown identifier '{e.ident}'", e)
            loc, t, _ = sym
            return t, Direct(loc), 0
        if isinstance(e, Unary) and e.op == "*":
            t, op, depth = self.value(e.operand, col)
            return self.deref_operand(e, t, op, depth, col)
        if isinstance(e, Index):
            bt = self.type_of(e.base)
            self.value(e.index)
            if isinstance(bt, ArrayT):
                t, pl, depth = self.place(e.base, col)
                return bt.elem, pl, depth
            t, op, depth = self.value(e.base, col)
            return self.deref_operand(e, t, op, depth, col)
        if isinstance(e, Member):
            if e.arrow:
                t, op, depth = self.value(e.base, col)
                st, pl, depth = self.deref_operand(e, t, op, depth, col)
            else:
                st, pl, depth = self.place(e.base, col)
            if not isinstance(st, StructT):
                raise self.err(f"member access on non-struct type {st}", e)
            fields = dict(self.prog.structs[st.name])
            if e.ident not in fields:
                raise self.err(f"struct {st.name} has no field '{e.ident}'", e)
            step = (st.name, e.ident)
            if isinstance(pl, Direct):
                return fields[e.ident], Direct(mm.field(pl.loc, *step)), depth
            return fields[e.ident], Deref(pl.key, pl.path + (step,), pl.line, pl.col, pl.level), depth
        raise self.err("expression is not assignable", e)

    def type_of(self, e):
        """Static type of an expression without emitting anything."""
        if isinstance(e, Name):
            sym = self.lookup(e)
            if sym is None:
                if e.ident in self.prog.functions:
                    return PtrT(self.prog.signatures[e.ident])
                raise self.err(f"unknown identifier '{e.ident}'", e)
            return sym[1]
        if isinstance(e, Unary) and e.op == "*":
            t = self.type_of(e.operand)
            if isinstance(t, ArrayT):
                return t.elem
            return t.target if isinstance(t, PtrT) else INT
        if isinstance(e, Unary) and e.op == "&":
            return PtrT(self.type_of(e.operand))
        if isinstance(e, Index):
            t = self.type_of(e.base)
            return t.elem if isinstance(t, ArrayT) else (t.target if isinstance(t, PtrT) else INT)
        if isinstance(e, Member):
            t = self.type_of(e.base)
            if e.arrow and isinstance(t, PtrT):
                t = t.target
            if isinstance(t, StructT):
                return dict(self.prog.structs[t.name]).get(e.ident, INT)
            return INT
        if isinstance(e, CallExpr):
            ft = self.callee_type(e.func)
            return ft.ret if ft is not None else INT
        return INT

    def callee_type(self, f):
        if self.is_function_name(f):
            if f.ident in ALLOCATORS:
                return FuncT(PtrT(VOID), (), True)
            if f.ident == "free":
                return FuncT(VOID, (), True)
            return self.prog.signatures[f.ident]
        t = self.type_of(f)
        if isinstance(t, PtrT) and isinstance(t.target, FuncT):
            return t.target
        if isinstance(t, FuncT):
            return t
        return None

    # -- assignments

    def check_compatible(self, dst_t, src_t, op, node):
        if isinstance(op, IntConst):
            return
        if isinstance(dst_t, PtrT) != isinstance(src_t, PtrT) or not _same_shape(dst_t, src_t):
            raise self.err(f"incompatible types: {dst_t} = {src_t}", node)

    def const_check(self, pl, node, declaring):
        if not declaring and isinstance(pl, Direct) and (
                pl.loc in self.const_keys or self.is_global_const(pl.loc)):
            raise self.err(f"assignment to const pointer '{pl.loc.ident}'", node)

    def is_global_const(self, loc):
        g = self.prog.globals.get(loc.ident)
        return loc.func is None and loc.kind == mm.VAR and g is not None and g[2]

    def assign(self, target, value, node, declaring=False):
        t, pl, _ = self.place(target)
        self.const_check(pl, node, declaring)
        if isinstance(t, PtrT):
            if isinstance(pl, Direct):
                self.into(pl.loc, t, value, node)
                return
            key = self.materialize(t, value, node)
            self.emit(Store(pl.key, key, pl.path, line=pl.line, col=pl.col, level=pl.level))
        elif isinstance(t, IntT):
            vt, op, _ = self.value(value)
            if is_pointer(vt):
                raise self.err(f"incompatible types: {t} = {vt}", node)
            if isinstance(pl, Deref):
                self.emit(Store(pl.key, None, pl.path, line=pl.line, col=pl.col, level=pl.level))
        else:
            raise self.err(f"assignment of type {t} is not supported", node)

    def materialize(self, t, value, node) -> mm.MemLoc:
        """Evaluate a pointer rvalue into some key (a temporary if needed)."""
        if isinstance(value, CallExpr) and self.is_function_name(value.func) and value.func.ident in ALLOCATORS:
            tmp = self.temp()
            self.into(tmp, t, value, node)
            return tmp
        vt, op, _ = self.value(value)
        self.check_compatible(t, vt, op, node)
        if isinstance(op, Ref):
            return op.key
        tmp = self.temp()
        self.emit(AddressOf(tmp, self.const_loc(op), line=node.line))
        return tmp

    def const_loc(self, op) -> mm.MemLoc:
        if isinstance(op, IntConst):
            return mm.NULL if op.value == 0 else mm.lit(op.value)
        return op.loc

    def into(self, dst, dst_t, value, node):
        """Lower ``dst = value`` for a pointer key ``dst``."""
        line = node.line
        if isinstance(value, CallExpr):
            if self.is_function_name(value.func) and value.func.ident in ALLOCATORS:
                for a in value.args:
                    self.value(a)
                self.emit(Alloc(dst, value.line, line=value.line))
                return
            rt, op = self.call(value, dst, want_value=False, dst_type=dst_t)
            return
        if isinstance(value, (Unary, Index, Member)) and not (isinstance(value, Unary) and value.op != "*"):
            vt, pl, _ = self.place(value)
            if isinstance(pl, Deref) and isinstance(vt, PtrT):
                self.check_compatible(dst_t, vt, None, node)
                self.emit(Load(dst, pl.key, pl.path, line=pl.line, col=pl.col, level=pl.level))
                return
            # a direct place: fall back to reading it as an rvalue
            if isinstance(vt, ArrayT):
                vt, op = PtrT(vt.elem), Addr(pl.loc)
            elif isinstance(pl, Direct) and isinstance(vt, PtrT):
                op = Ref(pl.loc)
            elif isinstance(pl, Deref) and isinstance(vt, FuncT) and not pl.path:
                vt, op = PtrT(vt), Ref(pl.key)
            else:
                raise self.err(f"incompatible types: {dst_t} = {vt}", node)
        else:
            vt, op, _ = self.value(value)
        self.check_compatible(dst_t, vt, op, node)
        if isinstance(op, Ref):
            self.emit(Copy(dst, op.key, line=line))
        elif isinstance(op, (Addr, IntConst)):
            self.emit(AddressOf(dst, self.const_loc(op), line=line))
        else:
            raise self.err(f"incompatible types: {dst_t} = {vt}", node)

    # -- calls

    def call(self, e: CallExpr, ret, want_value=False, dst_type=None):
        f = e.func
        if self.is_function_name(f) and f.ident in BUILTINS:
            if f.ident == "free":
                for a in e.args:
                    self.value(a)
                return VOID, None
            tmp = ret or self.temp()
            for a in e.args:
                self.value(a)
            self.emit(Alloc(tmp, e.line, line=e.line))
            return PtrT(VOID), Ref(tmp)
        pointer = None
        callee = None
        col, level = 0, 0
        if self.is_function_name(f):
            callee = f.ident
            ftype = self.prog.signatures[callee]
        else:
            target = f.operand if isinstance(f, Unary) and f.op == "*" else f
            ftype = self.callee_type(target)
            if ftype is None:
                raise self.err("called object is not a function", e)
            t, op, depth = self.value(target, target.col)
            if isinstance(op, Addr):
                if op.loc.kind != mm.FUNC:
                    raise self.err("called object is not a function", e)
                callee = op.loc.ident
            elif isinstance(op, Ref):
                pointer = op.key
                col, level = target.col, depth + 1
            else:
                raise self.err("called object is not a function", e)
        params = ftype.params
        if len(e.args) != len(params) and not (ftype.variadic and len(e.args) >= len(params)):
            raise self.err(f"call passes {len(e.args)} arguments, expected {len(params)}", e)
        actuals, texts = [], []
        for i, a in enumerate(e.args):
            pt = params[i] if i < len(params) else None
            at, op, _ = self.value(a)
            if pt is not None and is_pointer(pt):
                self.check_compatible(pt, at, op, a)
            elif pt is not None and is_pointer(at):
                raise self.err(f"incompatible argument type {at} for parameter of type {pt}", a)
            if isinstance(op, IntConst):
                op = Addr(self.const_loc(op)) if (pt is not None and is_pointer(pt)) else None
            actuals.append(op if is_pointer(at) or isinstance(op, Addr) else None)
            texts.append(self.text(a))
        rt = ftype.ret
        if dst_type is not None:
            if not is_pointer(rt):
                raise self.err(f"incompatible types: {dst_type} = {rt}", e)
            self.check_compatible(dst_type, rt, None, e)
        if ret is None and want_value and is_pointer(rt):
            ret = self.temp()
        self.emit(Call(callee, pointer, tuple(actuals), ret if is_pointer(rt) else None, tuple(texts),
                       line=e.line, col=col, level=level))
        if is_pointer(rt):
            return rt, Ref(ret) if ret is not None else None
        return rt, None


def lower(units, entry_name: str = "main") -> ProgramIR:
    """Type-check parsed translation units and lower them into one program."""
    prog = _Program(units)
    if entry_name not in prog.functions:
        first = prog.units[0].file if prog.units else "<input>"
        raise ParseError(f"no entry function '{entry_name}'", first, 0, 0)
    globals_ = prog.global_decls()
    functions = {name: _FunctionLowering(prog, fd).run() for name, fd in prog.functions.items()}
    edges = {(f.name, nid, n.callee) for f in functions.values()
             for nid, n in f.nodes.items() if isinstance(n, Call) and n.callee is not None}
    return ProgramIR(functions, entry_name, globals_, frozenset(edges), dict(prog.structs))


def lower_program(source: SourceProgram) -> ProgramIR:
    """Parse and lower every file of ``source`` into one program."""
    return lower(parse_units(source), source.entry_name)


def parse_units(source: SourceProgram) -> list:
    return [parse(text, name) for name, text in source.files]


def load(paths, entry_name: str = "main") -> ProgramIR:
    return lower_program(SourceProgram.from_paths(paths, entry_name))


def from_text(text: str, name: str = "<input>", entry_name: str = "main") -> ProgramIR:
    return lower_program(SourceProgram.from_text(text, name, entry_name))
