"""Report documents shared by the CLI subcommands.

Every document is a plain dict whose first key is ``schema_version``. Keys
and lists are emitted in a fixed order so two runs on the same input give
byte-identical output.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from . import andersen, compare, contexts, flowsens, lower, memory as mm, patterns
from .contexts import merge_poi_contexts
from .ir import ProgramIR, enumerate_pois

SCHEMA_VERSION = 1


def document(command: str, programs: list, **body) -> dict:
    return {"schema_version": SCHEMA_VERSION, "command": command, "inputs": programs, **body}


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, ensure_ascii=True) + "\n"


@dataclass
class Program:
    name: str
    paths: tuple
    ir: ProgramIR  # lowered, call graph still direct-only

    @classmethod
    def load(cls, paths, entry: str) -> Program:
        paths = tuple(str(p) for p in paths)
        return cls("+".join(paths), paths, lower.load(list(paths), entry))


@dataclass
class Analyses:
    fis: andersen.FISResult
    fs: flowsens.FSResult | None = None
    cs: contexts.CSResult | None = None

    @property
    def ir(self) -> ProgramIR:
        return self.fis.ir


def run_engines(program: Program, modes, max_iterations: int, max_contexts: int) -> Analyses:
    """FIS always runs: it closes the call graph the other engines rely on."""
    fis = andersen.analyze(program.ir, max_iterations)
    out = Analyses(fis)
    if "fs" in modes:
        out.fs = flowsens.run(fis.ir, max_iterations)
    if "cs" in modes:
        out.cs = contexts.run_cs(fis.ir, max_iterations, max_contexts)
    return out


def call_graph(ir: ProgramIR) -> list:
    return [{"caller": c, "node": n, "callee": g} for c, n, g in sorted(ir.call_edges)]


def fis_doc(a: Analyses) -> dict:
    pts = a.fis.points_to
    return {
        "points_to": pts.to_json(),
        "pois": [{**s.to_json(), "set": mm.names(pts.get(s.key))} for s in enumerate_pois(a.ir)],
        "call_graph": call_graph(a.ir),
        "diagnostics": a.fis.diagnostics,
        "rounds": a.fis.rounds,
    }


def fs_doc(a: Analyses) -> dict:
    fs = a.fs
    pois = []
    for s in enumerate_pois(a.ir):
        got = fs.poi_set(s)
        pois.append({**s.to_json(), "set": None if got is None else mm.names(got)})
    return {
        "pois": pois,
        "summaries": {name: None if s is None else s.to_json() for name, s in sorted(fs.summaries.items())},
        "boundaries": {name: b.to_json() for name, b in sorted(fs.boundaries.items())},
        "call_graph": call_graph(a.ir),
        "passes": fs.passes,
        "iterations": fs.iterations,
    }


def cs_doc(a: Analyses) -> dict:
    cs = a.cs
    pois = []
    for s in enumerate_pois(a.ir):
        per = cs.poi_sets(s)
        merged = merge_poi_contexts(per)
        pois.append({
            **s.to_json(),
            "contexts": [{"context": cid, "set": mm.names(v)} for cid, v in per],
            "merged": None if merged is None else mm.names(merged),
        })
    return {
        "pois": pois,
        "contexts": cs.context_table(),
        "call_graph": call_graph(a.ir),
        "iterations": cs.iterations,
        "contexts_created": cs.created,
    }


ENGINE_DOCS = {"fis": fis_doc, "fs": fs_doc, "cs": cs_doc}


def compare_records(program: Program, a: Analyses) -> list:
    return compare.build_records(a.fis.points_to, a.fs, a.cs, program.name)


def compare_doc(records: list, recommendations: dict) -> dict:
    stats = compare.corpus_stats(records)
    return {
        "stats": stats.to_json(),
        "recommendations": {k: v.to_json() for k, v in sorted(recommendations.items())},
        "diagnostics": compare.deref_diagnostics(records),
    }


def pattern_doc(ir: ProgramIR) -> dict:
    labels = patterns.label_all(ir)
    return {
        "pois": [{**s.to_json(), "label": lab.to_json(), "pattern": str(lab)} for s, lab in labels],
        "distribution": patterns.distribution(lab for _, lab in labels),
    }


# -- text rendering


def _sets_table(rows) -> str:
    width = max((len(r[0]) for r in rows), default=0)
    return "\n".join(f"{a.ljust(width)}  {b}" for a, b in rows)


def _fmt(locs) -> str:
    return "-" if locs is None else "{" + ", ".join(locs) + "}"


def fis_text(doc: dict) -> str:
    lines = ["Points-to (flow-insensitive)", _sets_table([(k, _fmt(v)) for k, v in doc["points_to"].items()])]
    lines += ["", "PoIs", _sets_table([(p["id"], _fmt(p["set"])) for p in doc["pois"]])]
    for d in doc["diagnostics"]:
        lines.append(f"warning: {d['kind']} in {d['function']} line {d['line']}")
    return "\n".join(lines)


def fs_text(doc: dict) -> str:
    lines = ["PoIs (flow-sensitive)", _sets_table([(p["id"], _fmt(p["set"])) for p in doc["pois"]])]
    lines += ["", "Summaries"]
    for name, s in doc["summaries"].items():
        if s is None:
            lines.append(f"{name}: exit unreachable")
            continue
        gen = ", ".join(f"{k}->{_fmt(v)}" for k, v in s["gen"].items())
        lines.append(f"{name}: kill {_fmt(s['kill'])} gen [{gen}] return {_fmt(s['return'])}")
    return "\n".join(lines)


def cs_text(doc: dict) -> str:
    rows = []
    for p in doc["pois"]:
        per = " ".join(f"#{c['context']}{_fmt(c['set'])}" for c in p["contexts"]) or "-"
        rows.append((p["id"], f"{per}  merged {_fmt(p['merged'])}"))
    lines = ["PoIs (context-sensitive)", _sets_table(rows), "", "Contexts"]
    for name, t in doc["contexts"].items():
        lines.append(f"{name}: {t['count']}")
        for c in t["contexts"]:
            val = ", ".join(f"{k}->{_fmt(v)}" for k, v in c["value"].items())
            lines.append(f"  #{c['id']} [{val}]")
    return "\n".join(lines)


ENGINE_TEXT = {"fis": fis_text, "fs": fs_text, "cs": cs_text}
