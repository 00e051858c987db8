"""Wall-clock timing of the three engines on one shared program."""

from __future__ import annotations

import gc
import statistics
import time
from dataclasses import dataclass, field

from . import andersen, contexts, flowsens
from .errors import BudgetExceeded
from .ir import ProgramIR

ENGINES = ("fis", "fs", "cs")


@dataclass
class TimingReport:
    program: str
    repeats: int
    samples: dict = field(default_factory=dict)  # engine -> list of seconds
    aborted: dict = field(default_factory=dict)  # engine -> budget message

    def median(self, engine: str) -> float | None:
        s = self.samples.get(engine)
        return statistics.median(s) if s else None

    def to_json(self) -> dict:
        return {
            "program": self.program,
            "repeats": self.repeats,
            "median_seconds": {e: self.median(e) for e in ENGINES if e in self.samples},
            "samples": {e: self.samples[e] for e in ENGINES if e in self.samples},
            "aborted": dict(sorted(self.aborted.items())),
        }


def time_analyses(ir: ProgramIR, program: str = "", repeats: int = 5,
                  max_iterations: int = flowsens.DEFAULT_MAX_ITERATIONS,
                  max_contexts: int = contexts.DEFAULT_MAX_CONTEXTS) -> TimingReport:
    """Median-of-``repeats`` wall time per engine. ``ir`` must already carry its resolved call graph.

    Engines run one after another on the same IR; an engine that exceeds its
    budget is dropped from the report. As with ``timeit``, the garbage
    collector is paused while a sample runs.
    """
    runs = {
        "fis": lambda: andersen.analyze(ir, max_iterations),
        "fs": lambda: flowsens.run(ir, max_iterations),
        "cs": lambda: contexts.run_cs(ir, max_iterations, max_contexts),
    }
    report = TimingReport(program, repeats)
    for engine in ENGINES:
        samples = []
        enabled = gc.isenabled()
        try:
            for _ in range(repeats):
                gc.collect()
                gc.disable()
                t0 = time.perf_counter()
                runs[engine]()
                samples.append(time.perf_counter() - t0)
                if enabled:
                    gc.enable()
        except BudgetExceeded as e:
            report.aborted[engine] = str(e)
            continue
        finally:
            if enabled:
                gc.enable()
        report.samples[engine] = samples
    return report
