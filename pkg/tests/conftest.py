import os
from pathlib import Path

import numpy as np
import pytest

from ttdra.instance import read_instance

DATA = Path(__file__).parent / "data"
VENDORED_QAPLIB = DATA / "qaplib"
FIXTURES = DATA / "fixtures"
GOLDEN = Path(__file__).parent / "golden"

# One line per acceptance criterion, printed at the end of the session.
ACCEPTANCE_LINES: list[str] = []


def qaplib_dirs() -> list[Path]:
    """The vendored corpus plus an optional full QAPLIB checkout named by ``QAPLIB_DIR``."""
    dirs = [VENDORED_QAPLIB]
    extra = os.environ.get("QAPLIB_DIR")
    if extra and Path(extra).is_dir():
        dirs.append(Path(extra))
    return dirs


def corpus_pairs(max_n=None) -> list[tuple[Path, Path | None]]:
    seen = {}
    for d in qaplib_dirs():
        for dat in sorted(d.glob("*.dat")):
            if dat.stem in seen:
                continue
            if max_n is not None and read_instance(dat).n > max_n:
                continue
            sln = dat.with_suffix(".sln")
            seen[dat.stem] = (dat, sln if sln.exists() else None)
    return [seen[k] for k in sorted(seen)]


def find_qaplib(name: str) -> Path | None:
    for d in qaplib_dirs():
        p = d / name
        if p.exists():
            return p
    return None


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def chr12c():
    return read_instance(VENDORED_QAPLIB / "chr12c.dat")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
