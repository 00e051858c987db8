"""Abstract memory locations and the points-to lattice.

Every location has a canonical name that doubles as its identity, its sort
key and its JSON spelling::

    g:p            global variable p
    l:main::p      local p of function main
    f:S::f@s       field f (of struct S) inside the object tagged s
    arr:a          monolithic array a (arr:main::a for a local)
    heap:7         every allocation made on source line 7
    fn:f           function f
    lit:0x4000     integer literal used as an address
    null, unknown
"""

from __future__ import annotations

import re
from collections.abc import Iterable, Iterator, Mapping

VAR = "var"
FIELD = "field"
ARRAY = "array"
HEAP = "heap"
FUNC = "func"
LIT = "lit"
NULL_KIND = "null"
UNKNOWN_KIND = "unknown"


class MemLoc:
    """An abstract memory location. Compare, hash and sort by canonical name."""

    __slots__ = ("kind", "ident", "func", "owner", "struct", "line", "name", "_hash")

    def __init__(self, kind, name, *, ident=None, func=None, owner=None, struct=None, line=None):
        self.kind = kind
        self.ident = ident
        self.func = func
        self.owner = owner
        self.struct = struct
        self.line = line
        self.name = name
        self._hash = hash(name)

    def __eq__(self, other):
        return isinstance(other, MemLoc) and self.name == other.name

    def __hash__(self):
        return self._hash

    def __lt__(self, other):
        return self.name < other.name

    def __repr__(self):
        return f"MemLoc({self.name})"

    def __str__(self):
        return self.name

    def __reduce__(self):
        return (from_name, (self.name,))

    @property
    def root(self) -> MemLoc:
        loc = self
        while loc.kind == FIELD:
            loc = loc.owner
        return loc

    def ancestors(self) -> Iterator[MemLoc]:
        """Yield this location, then each enclosing owner up to the root."""
        loc = self
        yield loc
        while loc.kind == FIELD:
            loc = loc.owner
            yield loc

    @property
    def local_of(self) -> str | None:
        """Function whose frame holds this location, or None for static storage."""
        root = self.root
        return root.func if root.kind in (VAR, ARRAY) else None

    @property
    def is_global(self) -> bool:
        root = self.root
        return root.kind in (VAR, ARRAY) and root.func is None

    @property
    def is_summary(self) -> bool:
        """True when the location stands for many concrete cells."""
        return self.root.kind in (HEAP, ARRAY)

    @property
    def is_key(self) -> bool:
        """Whether the location can hold a pointer and so appear as a map key."""
        return self.kind in (VAR, FIELD, ARRAY, HEAP)

    @property
    def is_valid_target(self) -> bool:
        """A dereference of this location reaches memory (not null/unknown)."""
        return self.kind not in (NULL_KIND, UNKNOWN_KIND)


def _owner_tag(owner: MemLoc) -> str:
    if owner.kind == VAR:
        return owner.ident if owner.func is None else f"{owner.func}::{owner.ident}"
    return owner.name


def var(ident: str, func: str | None = None) -> MemLoc:
    name = f"g:{ident}" if func is None else f"l:{func}::{ident}"
    return MemLoc(VAR, name, ident=ident, func=func)


def array(ident: str, func: str | None = None) -> MemLoc:
    name = f"arr:{ident}" if func is None else f"arr:{func}::{ident}"
    return MemLoc(ARRAY, name, ident=ident, func=func)


def field(owner: MemLoc, struct: str, ident: str) -> MemLoc:
    return MemLoc(FIELD, f"f:{struct}::{ident}@{_owner_tag(owner)}",
                  ident=ident, owner=owner, struct=struct)


def heap(line: int) -> MemLoc:
    return MemLoc(HEAP, f"heap:{line}", line=line)


def func(ident: str) -> MemLoc:
    return MemLoc(FUNC, f"fn:{ident}", ident=ident)


def lit(value: int) -> MemLoc:
    return MemLoc(LIT, f"lit:{value:#x}", ident=str(value))


NULL = MemLoc(NULL_KIND, "null")
UNKNOWN = MemLoc(UNKNOWN_KIND, "unknown")

_LOCAL_TAG = re.compile(r"^([A-Za-z_]\w*)::([A-Za-z_]\w*)$")
_IDENT = re.compile(r"^[A-Za-z_]\w*$")
_FIELD = re.compile(r"^f:([A-Za-z_]\w*)::([A-Za-z_]\w*)@(.+)$")


def _parse_tag(tag: str) -> MemLoc:
    if _IDENT.match(tag):
        return var(tag)
    m = _LOCAL_TAG.match(tag)
    if m:
        return var(m.group(2), m.group(1))
    return from_name(tag)


def from_name(name: str) -> MemLoc:
    """Inverse of ``MemLoc.name``."""
    if name == "null":
        return NULL
    if name == "unknown":
        return UNKNOWN
    m = _FIELD.match(name)
    if m:
        return field(_parse_tag(m.group(3)), m.group(1), m.group(2))
    prefix, _, rest = name.partition(":")
    if prefix == "g" and _IDENT.match(rest):
        return var(rest)
    if prefix in ("l", "arr"):
        m = _LOCAL_TAG.match(rest)
        if m:
            return (var if prefix == "l" else array)(m.group(2), m.group(1))
        if prefix == "arr" and _IDENT.match(rest):
            return array(rest)
    if prefix == "heap" and rest.isdigit():
        return heap(int(rest))
    if prefix == "fn" and _IDENT.match(rest):
        return func(rest)
    if prefix == "lit":
        return lit(int(rest, 16))
    raise ValueError(f"not a location name: {name!r}")


def names(locs: Iterable[MemLoc]) -> list[str]:
    return sorted(loc.name for loc in locs)


class _Top:
    """No information yet: the identity of meet."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "TOP"

    def __reduce__(self):
        return (_Top, ())


TOP = _Top()


class PointsToMap(Mapping):
    """Immutable map from pointer keys to non-empty frozensets of locations.

    Iteration is in canonical (name) order. ``raw`` exposes the backing dict
    for read-only use on hot paths.
    """

    __slots__ = ("raw", "_hash")

    def __init__(self, bindings: Mapping[MemLoc, Iterable[MemLoc]] | None = None):
        raw: dict[MemLoc, frozenset[MemLoc]] = {}
        if bindings:
            for key, vals in bindings.items():
                vals = vals if isinstance(vals, frozenset) else frozenset(vals)
                if vals:
                    raw[key] = vals
        self.raw = raw
        self._hash = None

    @classmethod
    def _wrap(cls, raw: dict) -> PointsToMap:
        # caller guarantees frozenset values and no empty sets
        obj = cls.__new__(cls)
        obj.raw = raw
        obj._hash = None
        return obj

    def __getitem__(self, key):
        return self.raw[key]

    def get(self, key, default=frozenset()):
        return self.raw.get(key, default)

    def __iter__(self):
        return iter(sorted(self.raw))

    def __len__(self):
        return len(self.raw)

    def __contains__(self, key):
        return key in self.raw

    def __eq__(self, other):
        if isinstance(other, PointsToMap):
            return self.raw == other.raw
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.raw.items()))
        return self._hash

    def __repr__(self):
        inner = ", ".join(f"{k.name}->{{{','.join(names(v))}}}" for k, v in self.items())
        return f"PointsToMap({inner})"

    def to_json(self) -> dict[str, list[str]]:
        return {key.name: names(self.raw[key]) for key in self}

    @classmethod
    def from_json(cls, data: Mapping[str, Iterable[str]]) -> PointsToMap:
        return cls({from_name(k): [from_name(v) for v in vals] for k, vals in data.items()})


EMPTY = PointsToMap()


def join_maps(a: PointsToMap, b: PointsToMap) -> PointsToMap:
    if a is b or not b.raw:
        return a
    if not a.raw:
        return b
    raw = dict(a.raw)
    for key, vals in b.raw.items():
        old = raw.get(key)
        if old is None:
            raw[key] = vals
        elif not vals <= old:
            raw[key] = old | vals
    return PointsToMap._wrap(raw)


def meet(a, b):
    """Key-wise union; TOP is the identity."""
    if a is TOP:
        return b
    if b is TOP:
        return a
    return join_maps(a, b)


def leq(a: PointsToMap, b: PointsToMap) -> bool:
    """True iff ``a`` is at least as precise as ``b`` (key-wise subset)."""
    if a is TOP:
        return True
    if b is TOP:
        return False
    braw = b.raw
    return all(vals <= braw.get(key, frozenset()) for key, vals in a.raw.items())


def default_init(ir) -> PointsToMap:
    """Bindings implied by global declarations: initializer or null."""
    bindings: dict[MemLoc, set[MemLoc]] = {}
    for decl in ir.globals:
        for key in decl.keys:
            init = decl.initializer if key == decl.var else None
            bindings.setdefault(key, set()).add(init if init is not None else NULL)
    return PointsToMap(bindings)
