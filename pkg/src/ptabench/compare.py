"""Per-PoI precision classes across the three engines, and corpus statistics."""

from __future__ import annotations

from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal

from . import memory as mm
from .contexts import CSResult
from .errors import InvariantViolation
from .flowsens import FSResult
from .ir import PoISite, enumerate_pois
from .patterns import PATTERNS, PatternScan

EQ_ALL = "EQ_ALL"
FIS_LT_FS_LT_CS = "FIS_LT_FS_LT_CS"
FISEQFS_LT_CS = "FISEQFS_LT_CS"
FIS_LT_FSEQCS = "FIS_LT_FSEQCS"
UNREACHABLE = "UNREACHABLE"
CLASSES = (EQ_ALL, FISEQFS_LT_CS, FIS_LT_FSEQCS, FIS_LT_FS_LT_CS)
CS_GAINING = frozenset((FISEQFS_LT_CS, FIS_LT_FS_LT_CS))

# column headings of the text table, in CLASSES order
HEADINGS = {
    EQ_ALL: "FIS=FS,FS=CS",
    FISEQFS_LT_CS: "FIS=FS,FS<CS",
    FIS_LT_FSEQCS: "FIS<FS,FS=CS",
    FIS_LT_FS_LT_CS: "FIS<FS,FS<CS",
}


def classify(fis: frozenset, fs: frozenset, cs_list) -> str:
    """The precision class of one PoI; ``cs_list`` holds one set per context."""
    if not fs <= fis:
        raise InvariantViolation(f"FS set {mm.names(fs)} is not contained in FIS set {mm.names(fis)}")
    for cs in cs_list:
        if not cs <= fs:
            raise InvariantViolation(f"CS set {mm.names(cs)} is not contained in FS set {mm.names(fs)}")
    cs_gain = any(cs < fs for cs in cs_list)
    fs_gain = fs < fis
    if cs_gain:
        return FIS_LT_FS_LT_CS if fs_gain else FISEQFS_LT_CS
    return FIS_LT_FSEQCS if fs_gain else EQ_ALL


@dataclass
class PoIRecord:
    site: PoISite
    fis_set: frozenset
    fs_set: frozenset | None  # None: function never analysed
    cs_sets: list  # (context id, set)
    klass: str
    pattern: str
    label: dict = field(default_factory=dict)
    program: str = ""

    @property
    def single_location(self) -> bool:
        return self.fs_set is not None and len(self.fs_set) == 1

    def to_json(self) -> dict:
        return {
            **self.site.to_json(),
            "program": self.program,
            "class": self.klass,
            "pattern": self.pattern,
            "label": self.label,
            "single_location": self.single_location,
            "fis": mm.names(self.fis_set),
            "fs": None if self.fs_set is None else mm.names(self.fs_set),
            "cs": [{"context": cid, "set": mm.names(s)} for cid, s in self.cs_sets],
        }


def build_records(fis_pts, fs: FSResult, cs: CSResult, program: str = "") -> list:
    """One record per PoI of the program analysed by all three engines."""
    ir = fs.ir
    scan = PatternScan(ir)
    out = []
    for site in enumerate_pois(ir):
        label = scan.label(site)
        fis_set = fis_pts.get(site.key)
        fs_set = fs.poi_set(site)
        if fs_set is None:
            cs_sets = []
            klass = UNREACHABLE
        else:
            cs_sets = cs.poi_sets(site)
            klass = classify(fis_set, fs_set, [s for _, s in cs_sets])
        out.append(PoIRecord(site, fis_set, fs_set, cs_sets, klass, label.variant, label.to_json(), program))
    return out


def percent(part: int, total: int) -> Decimal:
    """``part/total`` as a percentage rounded half-up to one decimal."""
    if total == 0:
        return Decimal("0.0")
    return (Decimal(part) * 100 / Decimal(total)).quantize(Decimal("0.1"), rounding=ROUND_HALF_UP)


def fmt_count(part: int, total: int) -> str:
    """``52 (100)`` style: count and percentage, trailing ``.0`` dropped."""
    p = percent(part, total)
    text = str(p)
    if text.endswith(".0"):
        text = text[:-2]
    return f"{part} ({text})"


@dataclass
class StatsRow:
    name: str
    total: int = 0
    counts: dict = field(default_factory=lambda: {c: 0 for c in CLASSES})
    unreachable: int = 0
    single_location: int = 0
    patterns: dict = field(default_factory=lambda: {p: 0 for p in PATTERNS})  # within EQ_ALL

    def add(self, r: PoIRecord) -> None:
        if r.klass == UNREACHABLE:
            self.unreachable += 1
            return
        self.total += 1
        self.counts[r.klass] += 1
        if r.single_location:
            self.single_location += 1
        if r.klass == EQ_ALL:
            self.patterns[r.pattern] += 1

    def to_json(self) -> dict:
        eq = self.counts[EQ_ALL]
        return {
            "name": self.name,
            "total_pois": self.total,
            "classes": {c: {"count": self.counts[c], "percent": float(percent(self.counts[c], self.total))}
                        for c in CLASSES},
            "unreachable": self.unreachable,
            "single_location": {"count": self.single_location,
                                "percent": float(percent(self.single_location, self.total))},
            "eq_all_patterns": {p: {"count": self.patterns[p], "percent": float(percent(self.patterns[p], eq))}
                                for p in PATTERNS},
        }


@dataclass
class StatsReport:
    rows: list  # per program StatsRow
    total: StatsRow

    def to_json(self) -> dict:
        return {"programs": [r.to_json() for r in self.rows], "total": self.total.to_json()}


def corpus_stats(records: list) -> StatsReport:
    """Class counts and percentages per program and over the whole corpus."""
    rows: dict = {}
    total = StatsRow("total")
    for r in records:
        rows.setdefault(r.program, StatsRow(r.program)).add(r)
        total.add(r)
    return StatsReport([rows[k] for k in sorted(rows)], total)


def _table(header: list, body: list) -> str:
    widths = [max(len(str(row[i])) for row in [header, *body]) for i in range(len(header))]
    lines = []
    for row in [header, *body]:
        cells = [str(c).ljust(w) if i == 0 else str(c).rjust(w) for i, (c, w) in enumerate(zip(row, widths))]
        lines.append("  ".join(cells).rstrip())
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)


def class_table(report: StatsReport) -> str:
    header = ["Program", "Total PoIs", *(HEADINGS[c] for c in CLASSES), "Single loc", "Unreachable"]
    body = []
    for row in [*report.rows, report.total]:
        body.append([row.name, row.total, *(fmt_count(row.counts[c], row.total) for c in CLASSES),
                     fmt_count(row.single_location, row.total), row.unreachable])
    return _table(header, body)


def pattern_table(report: StatsReport) -> str:
    header = ["Program", "EQ_ALL", *PATTERNS]
    body = []
    for row in [*report.rows, report.total]:
        eq = row.counts[EQ_ALL]
        body.append([row.name, eq, *(fmt_count(row.patterns[p], eq) for p in PATTERNS)])
    return _table(header, body)


def deref_diagnostics(records: list) -> list:
    """PoIs whose flow-sensitive set admits null or an unknown value."""
    out = []
    for r in records:
        if r.fs_set is None:
            continue
        for loc, kind in ((mm.NULL, "possible null dereference"), (mm.UNKNOWN, "dereference of unknown value")):
            if loc in r.fs_set:
                out.append({"poi": r.site.id, "function": r.site.func, "kind": kind})
    return out

