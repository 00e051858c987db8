from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import pytest

from ptabench import andersen, contexts, flowsens, lower
from ptabench.ir import ProgramIR, enumerate_pois

FIXTURES = Path(__file__).resolve().parent.parent / "src" / "ptabench" / "fixtures"
FIXTURE_NAMES = ("P1", "P2", "P3", "P4", "P5", "P6")


def fixture_path(name: str) -> Path:
    return FIXTURES / f"{name}.mc"


@dataclass
class Run:
    ir: ProgramIR
    fis: andersen.FISResult
    fs: flowsens.FSResult
    cs: contexts.CSResult

    def poi(self, key_name: str, level: int = 1, line: int | None = None):
        hits = [s for s in enumerate_pois(self.ir)
                if s.key.name == key_name and s.level == level and (line is None or s.line == line)]
        assert len(hits) == 1, hits
        return hits[0]


def run_all(ir: ProgramIR) -> Run:
    fis = andersen.analyze(ir)
    return Run(fis.ir, fis, flowsens.run(fis.ir), contexts.run_cs(fis.ir))


def run_text(src: str) -> Run:
    return run_all(lower.from_text(src))


def run_fixture(name: str) -> Run:
    return run_all(lower.load([str(fixture_path(name))]))


@pytest.fixture(scope="session")
def fixture_runs() -> dict:
    return {n: run_fixture(n) for n in FIXTURE_NAMES}
