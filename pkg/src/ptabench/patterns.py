"""Syntactic pattern scan over dereferences and the analysis recommender.

Labels are computed from the lowered IR alone, before any points-to
analysis: def-use of the dereferenced pointer, dominance inside its
function and the source text of actual arguments at call sites.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from .ir import AddressOf, Alloc, Call, Copy, FunctionIR, Load, PoISite, ProgramIR, Ref, Store, enumerate_pois

CONST = "ConstPointer"
FORMAL = "FormalPointer"
SINGLE = "SingleAssigned"
MULTI = "MultiAssigned"
OTHER = "Other"
PATTERNS = (CONST, FORMAL, SINGLE, MULTI, OTHER)

# a definition site: (function, node id); initializers and defaults use node None
DEFAULT = "default"


@dataclass(frozen=True)
class PatternLabel:
    variant: str
    uniform_actuals: bool | None = None
    reassigned_in_callee: bool | None = None

    def __str__(self) -> str:
        if self.variant != FORMAL:
            return self.variant
        u = "uniform" if self.uniform_actuals else "varying"
        r = "reassigned" if self.reassigned_in_callee else "unassigned"
        return f"{FORMAL}({u},{r})"

    def to_json(self) -> dict:
        out: dict = {"variant": self.variant}
        if self.variant == FORMAL:
            out["uniform_actuals"] = self.uniform_actuals
            out["reassigned_in_callee"] = self.reassigned_in_callee
        return out


@dataclass(frozen=True)
class Recommendation:
    analysis: str  # FIS | FS | CS
    reasons: tuple

    def to_json(self) -> dict:
        return {"analysis": self.analysis, "reasons": list(self.reasons)}


def _assigned(node):
    """The pointer key a node assigns directly, if any."""
    if isinstance(node, (AddressOf, Copy, Alloc)):
        return node.dst
    if isinstance(node, Load):
        return node.dst
    if isinstance(node, Call):
        return node.ret
    return None


def _dominators(f: FunctionIR) -> dict:
    rpo = f.rpo
    everything = frozenset(rpo)
    dom = {n: everything for n in rpo}
    dom[f.entry] = frozenset((f.entry,))
    changed = True
    while changed:
        changed = False
        for n in rpo:
            if n == f.entry:
                continue
            preds = [dom[p] for p in f.pred[n] if p in dom]
            new = frozenset.intersection(*preds) | {n} if preds else frozenset((n,))
            if new != dom[n]:
                dom[n] = new
                changed = True
    return dom


class PatternScan:
    """Def-use facts shared by all labels of one program."""

    def __init__(self, ir: ProgramIR):
        self.ir = ir
        self.defs: dict = {}  # key -> list of (function, node id)
        for f in ir.functions.values():
            for nid, node in f.nodes.items():
                key = _assigned(node)
                if key is not None:
                    self.defs.setdefault(key, []).append((f.name, nid))
        self.initialized = {d.var for d in ir.globals if d.initializer is not None}
        self.const_globals = {d.var for d in ir.globals if d.is_const_pointer}
        self._doms: dict = {}
        self._reach: dict = {}
        self._sites: dict = {}
        self._sources: dict | None = None
        for caller, nid, callee in ir.call_edges:
            node = ir.functions[caller].nodes[nid]
            self._sites.setdefault(callee, []).append(node)

    def dominators(self, name: str) -> dict:
        if name not in self._doms:
            self._doms[name] = _dominators(self.ir.functions[name])
        return self._doms[name]

    def reaching(self, name: str, key) -> dict:
        """Node id -> local defs of ``key`` reaching its IN; DEFAULT stands for entry values."""
        cache = (name, key)
        if cache in self._reach:
            return self._reach[cache]
        f = self.ir.functions[name]
        local = {nid for fn, nid in self.defs.get(key, ()) if fn == name}
        ins: dict = {}
        outs: dict = {}
        changed = True
        while changed:
            changed = False
            for n in f.rpo:
                if n == f.entry:
                    cur = frozenset((DEFAULT,))
                else:
                    cur = frozenset().union(*(outs.get(p, frozenset()) for p in f.pred[n]))
                ins[n] = cur
                out = frozenset((n,)) if n in local else cur
                if outs.get(n) != out:
                    outs[n] = out
                    changed = True
        self._reach[cache] = ins
        return ins

    def actual_texts(self, name: str, index: int) -> list:
        return sorted({node.texts[index] if index < len(node.texts) else "?" for node in self._sites.get(name, ())})

    def label(self, site: PoISite) -> PatternLabel:
        ir = self.ir
        key = site.key
        f = ir.functions[site.func]
        if key in f.const_keys or key in self.const_globals:
            return PatternLabel(CONST)
        if key in f.ptr_params:
            index = [loc for loc, _ in f.params].index(key)
            uniform = len(self.actual_texts(f.name, index)) <= 1
            reassigned = any(fn == f.name for fn, _ in self.defs.get(key, ()))
            return PatternLabel(FORMAL, uniform, reassigned)
        defs = self.defs.get(key, [])
        count = len(defs) + (1 if key in self.initialized else 0)
        if count == 0:
            return PatternLabel(OTHER)
        reach = self.reaching(f.name, key).get(site.node, frozenset())
        if count == 1:
            if defs and defs[0][0] == f.name and defs[0][1] in self.dominators(f.name).get(site.node, ()):
                return PatternLabel(SINGLE)
            if not defs and DEFAULT in reach:
                return PatternLabel(SINGLE)  # constant initializer, never reassigned
            return PatternLabel(OTHER)
        # every definition must reach; those outside this function arrive through its entry
        for fn, nid in defs:
            if fn == f.name:
                if nid not in reach:
                    return PatternLabel(OTHER)
            elif DEFAULT not in reach:
                return PatternLabel(OTHER)
        if key in self.initialized and DEFAULT not in reach:
            return PatternLabel(OTHER)
        return PatternLabel(MULTI)

    def value_sources(self) -> dict:
        """Pointer key -> number of distinct places its value can come from.

        A default (initializer, null, unknown or a formal's binding) counts as
        one source, every direct assignment as one more, and a store through a
        pointer as one more for each key whose address is taken and for every
        heap cell. With a single source a key holds the same set everywhere it
        is live; with more, statement order can hide some of them.
        """
        if self._sources is not None:
            return self._sources
        ir = self.ir
        counts: dict = {}
        for key in ir.global_keys:
            counts[key] = 1
        for f in ir.functions.values():
            for key in (*f.uninit, *f.ptr_params):
                counts[key] = 1
        for key, defs in self.defs.items():
            counts[key] = counts.get(key, 0) + len(defs)
        stores = any(isinstance(n, Store) and n.src is not None
                     for f in ir.functions.values() for n in f.nodes.values())
        if stores:
            heap_keys = {k for cells in ir.heap_cells.values() for k in cells}
            for key in heap_keys:
                counts[key] = counts.get(key, 1) + 1
            for key in list(counts):
                if key.root in ir.addressed_roots and key not in heap_keys:
                    counts[key] += 1
        self._sources = counts
        return counts

    def actual_sources(self, name: str, index: int) -> int:
        """Largest source count of a variable passed at position ``index`` to ``name``."""
        best = 0
        sources = self.value_sources()
        for node in self._sites.get(name, ()):
            if index < len(node.actuals) and isinstance(node.actuals[index], Ref):
                best = max(best, sources.get(node.actuals[index].key, 0))
        return best


def label_poi(site: PoISite, ir: ProgramIR) -> PatternLabel:
    return PatternScan(ir).label(site)


def label_all(ir: ProgramIR) -> list:
    """(site, label) for every PoI in source order."""
    scan = PatternScan(ir)
    return [(site, scan.label(site)) for site in enumerate_pois(ir)]


def recommend(labels: list, ir: ProgramIR) -> Recommendation:
    """The cheapest analysis expected to lose no precision at any PoI."""
    scan = PatternScan(ir)
    varying = []
    for site, label in labels:
        if label.variant != FORMAL:
            continue
        f = ir.functions[site.func]
        index = [loc for loc, _ in f.params].index(site.key)
        if not label.uniform_actuals:
            n = len(scan.actual_texts(f.name, index))
            msg = f"formal {site.key.ident} of {f.name} receives {n} distinct actuals"
        elif scan.actual_sources(f.name, index) > 1:
            msg = f"formal {site.key.ident} of {f.name} receives a variable assigned in more than one place"
        else:
            continue
        if msg not in varying:
            varying.append(msg)
    if varying:
        return Recommendation("CS", tuple(varying))
    multi = sorted(k.name for k, n in scan.value_sources().items() if n > 1)
    if multi:
        shown = ", ".join(multi[:5]) + (", ..." if len(multi) > 5 else "")
        return Recommendation("FS", (f"{len(multi)} pointer(s) with more than one value source ({shown})",))
    return Recommendation("FIS", (f"{len(labels)} dereference(s) with no flow or context trigger",))


def distribution(labels) -> dict:
    """Count per pattern variant, every variant present."""
    counts = Counter(label.variant for label in labels)
    return {p: counts.get(p, 0) for p in PATTERNS}
