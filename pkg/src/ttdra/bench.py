"""Batch solves over a QAPLIB-style corpus with gap and timing records."""

from __future__ import annotations

import csv
import io
import json
import statistics
import time
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .instance import QapInstance, read_instance, read_solution
from .quadratic import evaluate_permutation
from .solver import SolverConfig, solve

CSV_VERSION_LINE = "# ttdra-bench v1"
RANDOM_BASELINE_SAMPLES = 100
FIELDS = [
    "instance",
    "n",
    "objective",
    "best_known",
    "gap_percent",
    "wall_time_ms",
    "gradient_steps",
    "random_baseline",
    "permutation",
]


@dataclass
class BenchRecord:
    instance: str
    n: int
    objective: float
    best_known: Optional[float]
    gap_percent: Optional[float]
    wall_time_ms: float
    gradient_steps: int
    random_baseline: float
    permutation: list  # 1-indexed, so every objective can be re-derived from the output


def gap_percent(objective: float, best_known: float) -> float:
    # A zero best-known value (some esc instances) would divide by zero; use 1 instead.
    denom = abs(best_known) if best_known != 0 else 1.0
    return 100.0 * (objective - best_known) / denom


def random_baseline(inst: QapInstance, seed: int, samples: int = RANDOM_BASELINE_SAMPLES) -> float:
    """Mean cost of ``samples`` uniformly random permutations.

    The generator is keyed on ``seed`` and the instance name so each instance
    gets the same draws no matter which other files are in the corpus.
    """
    rng = np.random.default_rng([seed, zlib.crc32(inst.name.encode())])
    return float(np.mean([evaluate_permutation(inst, rng.permutation(inst.n)) for _ in range(samples)]))


def discover(directory: Path, max_n: Optional[int] = None) -> list[Path]:
    paths = sorted(Path(directory).glob("*.dat"), key=lambda p: p.stem)
    if max_n is None:
        return paths
    keep = []
    for p in paths:
        with open(p) as fh:
            head = fh.read(64).split()
        if head and int(head[0]) <= max_n:
            keep.append(p)
    return keep


def bench_instance(path: Path, sln_dir: Optional[Path], config: SolverConfig, repeat: int, seed: int) -> BenchRecord:
    inst = read_instance(path)
    best = None
    sln = (sln_dir or path.parent) / f"{path.stem}.sln"
    if sln.exists():
        best = read_solution(sln).objective
    times = []
    result = None
    for _ in range(max(repeat, 1)):
        t0 = time.perf_counter()
        result = solve(inst, config)
        times.append((time.perf_counter() - t0) * 1000.0)
    return BenchRecord(
        instance=inst.name,
        n=inst.n,
        objective=result.objective,
        best_known=best,
        gap_percent=None if best is None else gap_percent(result.objective, best),
        wall_time_ms=statistics.median(times),
        gradient_steps=result.gradient_steps,
        random_baseline=random_baseline(inst, seed),
        permutation=[int(p) + 1 for p in result.permutation],
    )


def run_bench(paths: Sequence[Path], sln_dir: Optional[Path] = None, config: SolverConfig = SolverConfig(),
              repeat: int = 1, seed: int = 0, jobs: int = 1) -> list[BenchRecord]:
    args = [(Path(p), sln_dir, config, repeat, seed) for p in paths]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(bench_instance, *zip(*args)))
    else:
        records = [bench_instance(*a) for a in args]
    return sorted(records, key=lambda r: r.instance)


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, list):
        return " ".join(str(x) for x in v)
    return str(v)


def format_records(records: Sequence[BenchRecord], format: str = "csv") -> str:
    if format == "json":
        rows = []
        for r in records:
            d = asdict(r)
            rows.append({k: v for k, v in d.items() if v is not None})
        return json.dumps(rows, indent=1) + "\n"
    if format != "csv":
        raise ValueError(f"unknown format {format!r}")
    buf = io.StringIO()
    buf.write(CSV_VERSION_LINE + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(FIELDS)
    for r in records:
        writer.writerow([_cell(getattr(r, f)) for f in FIELDS])
    return buf.getvalue()


def parse_records(text: str) -> list[dict]:
    """Read bench CSV back into dicts of strings (version line skipped)."""
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(lines))
