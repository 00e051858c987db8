"""Command-line entry point.

Exit status: 0 success, 1 usage or parse error, 2 budget exceeded,
3 invariant violation.
"""

from __future__ import annotations

import functools
import sys
from pathlib import Path

import click

from . import compare as cmp
from . import oracle as orc
from . import patterns as pat
from . import report as rpt
from .contexts import DEFAULT_MAX_CONTEXTS
from .errors import PtaError
from .flowsens import DEFAULT_MAX_ITERATIONS


def common_options(fn):
    @click.argument("paths", nargs=-1, required=True, type=click.Path(exists=True, dir_okay=False))
    @click.option("--format", "fmt", type=click.Choice(["json", "table"]), default="json", show_default=True)
    @click.option("--out", "out", type=click.Path(dir_okay=False), default=None, help="Write the report here.")
    @click.option("--max-iterations", type=click.IntRange(min=1), default=DEFAULT_MAX_ITERATIONS, show_default=True)
    @click.option("--max-contexts", type=click.IntRange(min=1), default=DEFAULT_MAX_CONTEXTS, show_default=True,
                  help="Contexts allowed per function.")
    @click.option("--entry", default="main", show_default=True, help="Entry function.")
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        return fn(*args, **kwargs)

    return wrapper


def emit(doc: dict, text: str, fmt: str, out: str | None) -> None:
    payload = rpt.dumps(doc) if fmt == "json" else text.rstrip("\n") + "\n"
    if out:
        Path(out).write_text(payload)
    else:
        click.echo(payload, nl=False)


def load_program(paths, entry) -> rpt.Program:
    return rpt.Program.load(paths, entry)


@click.group()
@click.version_option(package_name="artifact", prog_name="ptabench")
def cli():
    """Compare flow-insensitive, flow-sensitive and context-sensitive points-to results."""


@cli.command()
@common_options
@click.option("--mode", type=click.Choice(["fis", "fs", "cs"]), required=True)
def analyze(paths, fmt, out, max_iterations, max_contexts, entry, mode):
    """Run one analysis and report the set at every dereference."""
    prog = load_program(paths, entry)
    a = rpt.run_engines(prog, {mode}, max_iterations, max_contexts)
    body = rpt.ENGINE_DOCS[mode](a)
    emit(rpt.document(f"analyze:{mode}", list(prog.paths), **body), rpt.ENGINE_TEXT[mode](body), fmt, out)


@cli.command()
@common_options
@click.option("--separate", is_flag=True, help="Treat every input file as its own program.")
@click.option("--detail", type=click.Path(dir_okay=False), default=None,
              help="Per-PoI detail file (JSON). Defaults to OUT with a .pois.json suffix.")
@click.option("--plot-dir", type=click.Path(file_okay=False), default=None, help="Render figures here.")
@click.option("--timing", is_flag=True, help="Add median-of-5 engine wall times (not deterministic).")
def compare(paths, fmt, out, max_iterations, max_contexts, entry, separate, detail, plot_dir, timing):
    """Run all three analyses and bucket every PoI into a precision class."""
    groups = [[p] for p in paths] if separate else [list(paths)]
    records, recs, timings = [], {}, []
    for group in groups:
        prog = load_program(group, entry)
        a = rpt.run_engines(prog, {"fs", "cs"}, max_iterations, max_contexts)
        records += rpt.compare_records(prog, a)
        recs[prog.name] = pat.recommend(pat.label_all(a.ir), a.ir)
        if timing:
            from .timing import time_analyses

            timings.append(time_analyses(a.ir, prog.name, 5, max_iterations, max_contexts))
    body = rpt.compare_doc(records, recs)
    if timing:
        body["timing"] = [t.to_json() for t in timings]
    detail_doc = rpt.document("compare:pois", list(paths), pois=[r.to_json() for r in records])
    if detail is None and out is not None:
        detail = str(Path(out).with_suffix(".pois.json"))
    if detail is not None:
        Path(detail).write_text(rpt.dumps(detail_doc))
        body["detail_file"] = detail
    else:
        body["pois"] = detail_doc["pois"]
    stats = cmp.corpus_stats(records)
    if plot_dir:
        from .plotting import render_all

        render_all(stats, plot_dir, timings)
    text = "\n\n".join([
        "Pointee-relation classes\n" + cmp.class_table(stats),
        "Patterns among PoIs where all analyses agree\n" + cmp.pattern_table(stats),
        "Recommendations\n" + "\n".join(f"{k}: {v.analysis} ({'; '.join(v.reasons)})" for k, v in sorted(recs.items())),
    ])
    if timing:
        text += "\n\nTiming (median seconds)\n" + "\n".join(
            f"{t.program}: " + " ".join(f"{e}={t.median(e):.6f}" for e in ("fis", "fs", "cs") if t.median(e) is not None)
            for t in timings)
    emit(rpt.document("compare", list(paths), **body), text, fmt, out)


@cli.command()
@common_options
def patterns(paths, fmt, out, max_iterations, max_contexts, entry):
    """Label every dereference with its syntactic code pattern."""
    prog = load_program(paths, entry)
    body = rpt.pattern_doc(prog.ir)
    rows = [f"{p['id']}  {p['pattern']}" for p in body["pois"]]
    dist = " ".join(f"{k}={v}" for k, v in body["distribution"].items())
    emit(rpt.document("patterns", list(prog.paths), **body), "\n".join([*rows, "", dist]), fmt, out)


def _recommend(prog):
    return pat.recommend(pat.label_all(prog.ir), prog.ir)


@cli.command()
@common_options
def recommend(paths, fmt, out, max_iterations, max_contexts, entry):
    """Suggest the cheapest analysis expected to lose no precision."""
    prog = load_program(paths, entry)
    r = _recommend(prog)
    text = r.analysis + "\n" + "\n".join(f"  {x}" for x in r.reasons)
    emit(rpt.document("recommend", list(prog.paths), recommendation=r.to_json()), text, fmt, out)


@cli.command()
@common_options
@click.option("--loop-bound", type=click.IntRange(min=0), default=1, show_default=True)
def oracle(paths, fmt, out, max_iterations, max_contexts, entry, loop_bound):
    """Enumerate bounded concrete executions and record observed pointees."""
    prog = load_program(paths, entry)
    a = rpt.run_engines(prog, set(), max_iterations, max_contexts)
    res = orc.interpret_all(a.ir, loop_bound, max_iterations)
    body = res.to_json()
    rows = [f"{k}  {{{', '.join(v)}}}" for k, v in body["observations"].items()]
    rows += [f"event: {e['kind']} in {e['function']} at {e['line']}:{e['col']}" for e in body["events"]]
    rows.append(f"paths={res.paths} truncated={res.truncated}")
    emit(rpt.document("oracle", list(prog.paths), **body), "\n".join(rows), fmt, out)


@cli.command()
@common_options
def auto(paths, fmt, out, max_iterations, max_contexts, entry):
    """Run the pre-scan, then only the recommended analysis."""
    prog = load_program(paths, entry)
    r = _recommend(prog)
    mode = r.analysis.lower()
    a = rpt.run_engines(prog, {mode}, max_iterations, max_contexts)
    body = rpt.ENGINE_DOCS[mode](a)
    text = f"recommended: {r.analysis}\n\n" + rpt.ENGINE_TEXT[mode](body)
    emit(rpt.document("auto", list(prog.paths), recommendation=r.to_json(), analysis=mode, **body), text, fmt, out)


def main(argv=None) -> int:
    try:
        rv = cli.main(args=argv, prog_name="ptabench", standalone_mode=False)
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        return 1
    except click.ClickException as e:
        e.show()
        return 1
    except PtaError as e:
        click.echo(f"error: {e}", err=True)
        return e.exit_code
    except OSError as e:
        click.echo(f"error: {e}", err=True)
        return 1
    return rv if isinstance(rv, int) else 0


if __name__ == "__main__":
    sys.exit(main())
