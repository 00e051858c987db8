"""Lowered program representation: per-function CFGs plus the program call graph.

Only four pointer-assignment shapes survive lowering (``p=&a``, ``p=q``,
``p=*q``, ``*p=q``) together with ``Alloc``, ``Call``, ``Branch`` and the
``Entry``/``Exit`` markers. A node whose ``level`` is positive dereferences a
pointer at that program point and is a point of interest (PoI).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property

from .memory import MemLoc


@dataclass(frozen=True)
class SourceProgram:
    files: tuple  # tuple of (filename, text)
    entry_name: str = "main"

    @classmethod
    def from_paths(cls, paths, entry_name: str = "main") -> SourceProgram:
        files = []
        for p in paths:
            with open(p, encoding="utf-8") as fh:
                files.append((str(p), fh.read()))
        return cls(tuple(files), entry_name)

    @classmethod
    def from_text(cls, text: str, name: str = "<input>", entry_name: str = "main") -> SourceProgram:
        return cls(((name, text),), entry_name)


# -- operands of calls


@dataclass(frozen=True)
class Addr:
    """A constant address: ``&a``, a decayed array, a function, null or a literal."""

    loc: MemLoc


@dataclass(frozen=True)
class Ref:
    """The current value of a pointer key."""

    key: MemLoc


# -- nodes


@dataclass(frozen=True)
class Stmt:
    line: int = field(default=0, kw_only=True)
    col: int = field(default=0, kw_only=True)
    level: int = field(default=0, kw_only=True)  # >0 marks a dereference (PoI)

    @property
    def kind(self) -> str:
        return type(self).__name__

    @property
    def deref_key(self) -> MemLoc | None:
        return None


@dataclass(frozen=True)
class Entry(Stmt):
    pass


@dataclass(frozen=True)
class Exit(Stmt):
    pass


@dataclass(frozen=True)
class Nop(Stmt):
    pass


@dataclass(frozen=True)
class Branch(Stmt):
    loop: bool = False


@dataclass(frozen=True)
class AddressOf(Stmt):
    dst: MemLoc
    loc: MemLoc


@dataclass(frozen=True)
class Copy(Stmt):
    dst: MemLoc
    src: MemLoc


@dataclass(frozen=True)
class Load(Stmt):
    """``dst = *src`` (or ``dst = src->path``). ``dst`` is None for a scalar read."""

    dst: MemLoc | None
    src: MemLoc
    path: tuple = ()

    @property
    def deref_key(self):
        return self.src


@dataclass(frozen=True)
class Store(Stmt):
    """``*dst = src`` (or ``dst->path = src``). ``src`` is None for a scalar write."""

    dst: MemLoc
    src: MemLoc | None
    path: tuple = ()

    @property
    def deref_key(self):
        return self.dst


@dataclass(frozen=True)
class Alloc(Stmt):
    dst: MemLoc
    site: int


@dataclass(frozen=True)
class Call(Stmt):
    """A call. Direct calls name ``callee``; indirect ones go through ``pointer``."""

    callee: str | None
    pointer: MemLoc | None
    actuals: tuple  # Addr | Ref | None per argument
    ret: MemLoc | None = None
    texts: tuple = ()  # canonical source text of each actual

    @property
    def deref_key(self):
        return self.pointer


PTR_ASSIGNMENTS = (AddressOf, Copy, Load, Store)


_FIELD_LOCS: dict = {}


def field_loc(base: MemLoc, path: tuple) -> MemLoc:
    if not path:
        return base
    loc = _FIELD_LOCS.get((base, path))
    if loc is None:
        from .memory import field

        loc = base
        for struct, name in path:
            loc = field(loc, struct, name)
        _FIELD_LOCS[(base, path)] = loc
    return loc


# -- declarations and functions


@dataclass(frozen=True)
class GlobalDecl:
    var: MemLoc
    declared_type: object
    is_const_pointer: bool = False
    initializer: MemLoc | None = None
    keys: tuple = ()  # every pointer key inside the object


@dataclass(frozen=True, eq=False)
class FunctionIR:
    name: str
    file: str
    line: int
    params: tuple  # (MemLoc, type) in declaration order
    nodes: dict  # node id -> Stmt
    succ: dict  # node id -> tuple of node ids
    ret_key: MemLoc | None = None
    uninit: tuple = ()  # local pointer keys declared without initializer
    locals: frozenset = frozenset()
    const_keys: frozenset = frozenset()
    entry: int = 0
    exit: int = 1

    @cached_property
    def pred(self) -> dict:
        pred = {n: [] for n in self.nodes}
        for n, ss in self.succ.items():
            for s in ss:
                pred[s].append(n)
        return {n: tuple(ps) for n, ps in pred.items()}

    @cached_property
    def edges(self) -> frozenset:
        return frozenset((a, b) for a, ss in self.succ.items() for b in ss)

    @cached_property
    def ptr_params(self) -> tuple:
        from .syntax import is_pointer

        return tuple(loc for loc, t in self.params if is_pointer(t))

    @cached_property
    def rpo(self) -> tuple:
        """Nodes in reverse post-order from Entry."""
        seen, order = set(), []
        stack = [(self.entry, iter(self.succ[self.entry]))]
        seen.add(self.entry)
        while stack:
            node, it = stack[-1]
            for s in it:
                if s not in seen:
                    seen.add(s)
                    stack.append((s, iter(self.succ[s])))
                    break
            else:
                stack.pop()
                order.append(node)
        return tuple(reversed(order))

    def span(self, node_id: int) -> tuple:
        return (self.file, self.nodes[node_id].line)


@dataclass(frozen=True, eq=False)
class ProgramIR:
    functions: dict  # name -> FunctionIR, source order
    entry: str
    globals: tuple  # GlobalDecl
    call_edges: frozenset  # (caller, node id, callee)
    structs: dict = field(default_factory=dict)

    @cached_property
    def callees(self) -> dict:
        """(caller, node id) -> sorted tuple of callee names."""
        out: dict = {}
        for caller, node, callee in self.call_edges:
            out.setdefault((caller, node), set()).add(callee)
        return {k: tuple(sorted(v)) for k, v in out.items()}

    @cached_property
    def recursive(self) -> frozenset:
        """Functions that can reach themselves in the call graph."""
        graph: dict = {}
        for caller, _, callee in self.call_edges:
            graph.setdefault(caller, set()).add(callee)
        rec = set()
        for f in self.functions:
            stack, seen = list(graph.get(f, ())), set()
            while stack:
                g = stack.pop()
                if g == f:
                    rec.add(f)
                    break
                if g not in seen:
                    seen.add(g)
                    stack.extend(graph.get(g, ()))
        return frozenset(rec)

    @cached_property
    def global_keys(self) -> frozenset:
        return frozenset(k for d in self.globals for k in d.keys)

    @cached_property
    def heap_cells(self) -> dict:
        """Allocation site -> pointer keys inside the allocated object.

        The object's type is not known at the allocation, so every field path
        used by some load or store in the program is applied to the cell.
        """
        from .memory import heap

        paths = {()}
        sites = set()
        for f in self.functions.values():
            for n in f.nodes.values():
                if isinstance(n, (Load, Store)):
                    paths.add(n.path)
                elif isinstance(n, Alloc):
                    sites.add(n.site)
        return {s: tuple(sorted({field_loc(heap(s), p) for p in paths})) for s in sorted(sites)}

    @cached_property
    def addressed_roots(self) -> frozenset:
        """Roots of every location whose address appears anywhere in the program."""
        roots = {d.initializer.root for d in self.globals if d.initializer is not None}
        for f in self.functions.values():
            for n in f.nodes.values():
                if isinstance(n, AddressOf):
                    roots.add(n.loc.root)
                elif isinstance(n, Call):
                    roots.update(a.loc.root for a in n.actuals if isinstance(a, Addr))
        return frozenset(roots)

    @cached_property
    def global_refs(self) -> dict:
        """Function -> global roots it names, directly or through any callee."""
        direct = {}
        for f in self.functions.values():
            roots = set()
            for n in f.nodes.values():
                for loc in _operands(n):
                    root = loc.root
                    if root.func is None and root.kind in ("var", "array"):
                        roots.add(root)
            direct[f.name] = roots
        graph: dict = {}
        for caller, _, callee in self.call_edges:
            graph.setdefault(caller, set()).add(callee)
        out = {}
        for name in self.functions:
            seen, stack, roots = {name}, [name], set()
            while stack:
                g = stack.pop()
                roots |= direct[g]
                for h in graph.get(g, ()):
                    if h not in seen:
                        seen.add(h)
                        stack.append(h)
            out[name] = frozenset(roots)
        return out

    def is_summary(self, loc: MemLoc) -> bool:
        """Summary locations are never strongly updated.

        Heap cells and arrays stand for many cells; so does every local of a
        recursive function, whose frames all share one name.
        """
        if loc.is_summary:
            return True
        owner = loc.local_of
        return owner is not None and owner in self.recursive

    def with_call_edges(self, edges) -> ProgramIR:
        return replace(self, call_edges=frozenset(edges))

    def indirect_calls(self):
        for f in self.functions.values():
            for nid, node in f.nodes.items():
                if isinstance(node, Call) and node.pointer is not None:
                    yield f.name, nid, node


def _operands(node) -> list:
    out = []
    for name in ("dst", "src", "loc", "pointer", "ret"):
        v = getattr(node, name, None)
        if isinstance(v, MemLoc):
            out.append(v)
    for a in getattr(node, "actuals", ()):
        if isinstance(a, Ref):
            out.append(a.key)
        elif isinstance(a, Addr):
            out.append(a.loc)
    return out


@dataclass(frozen=True, order=True)
class PoISite:
    file: str
    line: int
    col: int
    level: int
    func: str
    node: int
    key: MemLoc = field(compare=False)

    @property
    def id(self) -> str:
        return f"{self.file}:{self.line}:{self.col}:{self.level}"

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "file": self.file,
            "line": self.line,
            "col": self.col,
            "level": self.level,
            "function": self.func,
            "node": self.node,
            "pointer": self.key.name,
        }


def enumerate_pois(ir: ProgramIR) -> list[PoISite]:
    """One site per dereference level per program point, in source order."""
    sites = []
    for f in ir.functions.values():
        for nid, node in f.nodes.items():
            if node.level > 0:
                sites.append(PoISite(f.file, node.line, node.col, node.level, f.name, nid, node.deref_key))
    return sorted(sites)
