import json
import os
import subprocess
import sys
import time
from pathlib import Path

import pytest

from herdflock.gf2e import field

CRITERIA: dict[int, tuple[bool, str]] = {}


@pytest.fixture(scope="session")
def F8():
    return field(8)


@pytest.fixture(scope="session")
def F16():
    return field(16)


@pytest.fixture(scope="session")
def F64():
    return field(64)


@pytest.fixture
def criterion():
    """Record a pass/fail line for an acceptance criterion."""

    def record(n: int, ok: bool, detail: str = ""):
        CRITERIA[n] = (bool(ok), detail)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(CRITERIA):
        ok, detail = CRITERIA[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")


def run_cli(root: Path, *args: str) -> tuple[subprocess.CompletedProcess, float]:
    env = dict(os.environ, HERDFLOCK_ARTIFACTS=str(root))
    t = time.time()
    proc = subprocess.run([sys.executable, "-m", "herdflock.cli", *args], env=env, capture_output=True, text=True)
    return proc, time.time() - t


class Pipeline:
    """Artifacts of one oval-classes -> build-store -> herd-search run."""

    def __init__(self, root: Path, q: int):
        self.root = root
        self.q = q
        self.dir = root / f"q{q}"
        self.seconds: dict[str, float] = {}
        self.outputs: dict[str, subprocess.CompletedProcess] = {}

    def run(self, name: str, *extra: str):
        proc, secs = run_cli(self.root, name, "--q", str(self.q), "--workers", "1", *extra)
        self.outputs[name] = proc
        self.seconds[name] = secs
        if proc.returncode != 0:
            raise RuntimeError(f"{name} failed:\n{proc.stdout}\n{proc.stderr}")
        return proc

    def manifest(self, name: str) -> dict:
        [path] = self.dir.glob(f"manifest-{name}*.json")
        return json.loads(path.read_text())


def _pipeline(root: Path, q: int, source: str) -> Pipeline:
    p = Pipeline(root, q)
    p.run("oval-classes", "--hyperovals", source)
    p.run("build-store")
    p.run("herd-search")
    return p


@pytest.fixture(scope="session")
def q8_pipeline(tmp_path_factory):
    return _pipeline(tmp_path_factory.mktemp("q8"), 8, "census")


@pytest.fixture(scope="session")
def q64_pipeline(tmp_path_factory):
    return _pipeline(tmp_path_factory.mktemp("q64"), 64, "known")


@pytest.fixture(scope="session")
def q64_reps(q64_pipeline, F64):
    from herdflock.cli import read_oval_classes

    return read_oval_classes(q64_pipeline.dir / "oval_classes.txt", F64)


@pytest.fixture(scope="session")
def q64_classifier(q64_reps, F64):
    from herdflock.herd import OvalClassifier

    return OvalClassifier(F64, q64_reps)
