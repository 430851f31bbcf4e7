"""QAPLIB instance/solution parsing and result serialization.

QAPLIB ``.dat`` files hold ``N`` followed by the ``N*N`` flow matrix and the
``N*N`` distance matrix, row-major, separated by arbitrary whitespace.  ``.sln``
files hold ``N``, the objective value and a 1-indexed permutation.

In memory every permutation is a 0-indexed integer array where ``perm[i]`` is
the location assigned to facility ``i``.  Conversion to the 1-indexed QAPLIB
convention happens only at the text boundary.
"""

from __future__ import annotations

import csv
import io
import json
import re
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

from .errors import InvalidPermutation, MalformedInstance, MalformedSolution

_SEPARATORS = re.compile(r"[\s,]+")


@dataclass(frozen=True)
class QapInstance:
    """Koopmans-Beckmann QAP data: flow ``A``, distance ``B`` and linear cost ``c``.

    ``linear`` is indexed like ``vec(X)`` (column-major), so the cost of putting
    facility ``i`` at location ``j`` lives at position ``j*n + i``.
    """

    flow: np.ndarray
    distance: np.ndarray
    linear: Optional[np.ndarray] = None
    name: str = "unnamed"

    def __post_init__(self):
        flow = np.array(self.flow, dtype=float)
        distance = np.array(self.distance, dtype=float)
        if flow.ndim != 2 or flow.shape[0] != flow.shape[1] or flow.shape[0] < 1:
            raise MalformedInstance(f"flow matrix must be square and non-empty, got shape {flow.shape}")
        n = flow.shape[0]
        if distance.shape != (n, n):
            raise MalformedInstance(f"distance matrix must be {n}x{n}, got shape {distance.shape}")
        if self.linear is None:
            linear = np.zeros(n * n)
        else:
            linear = np.array(self.linear, dtype=float).reshape(-1)
            if linear.size != n * n:
                raise MalformedInstance(f"linear term must have {n * n} entries, got {linear.size}")
        for label, arr in (("flow", flow), ("distance", distance), ("linear", linear)):
            if not np.all(np.isfinite(arr)):
                raise MalformedInstance(f"{label} contains non-finite entries")
            arr.setflags(write=False)
        object.__setattr__(self, "flow", flow)
        object.__setattr__(self, "distance", distance)
        object.__setattr__(self, "linear", linear)

    @property
    def n(self) -> int:
        return self.flow.shape[0]

    @property
    def linear_matrix(self) -> np.ndarray:
        """``vec^{-1}(c)``: entry ``(i, j)`` is the linear cost of facility i at location j."""
        return self.linear.reshape(self.n, self.n, order="F")

    @property
    def is_symmetric(self) -> bool:
        return bool(np.array_equal(self.flow, self.flow.T) and np.array_equal(self.distance, self.distance.T))

    def with_linear(self, linear) -> "QapInstance":
        return QapInstance(self.flow, self.distance, linear, self.name)


@dataclass(frozen=True)
class KnownSolution:
    n: int
    objective: float
    permutation: np.ndarray  # 0-indexed
    name: str = "unnamed"


@dataclass
class AssignmentResult:
    """Outcome of a solve. ``permutation`` is 0-indexed; serialization shifts it to 1-indexed."""

    permutation: np.ndarray
    objective: float
    instance: str = "unnamed"
    lower_bound: Optional[float] = None
    reductions: int = 0
    gradient_steps: int = 0
    wall_time_ms: float = 0.0
    config: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return len(self.permutation)


def check_permutation(perm, n: Optional[int] = None) -> np.ndarray:
    """Return ``perm`` as an int array after verifying it is a bijection on ``0..n-1``."""
    arr = np.asarray(perm)
    if arr.ndim != 1:
        raise InvalidPermutation("permutation must be one-dimensional")
    if n is None:
        n = arr.size
    if arr.size != n:
        raise InvalidPermutation(f"expected {n} entries, got {arr.size}")
    if arr.size and not np.issubdtype(arr.dtype, np.integer):
        if not np.all(np.mod(arr, 1) == 0):
            raise InvalidPermutation("permutation entries must be integers")
    arr = arr.astype(np.int64)
    if not np.array_equal(np.sort(arr), np.arange(n)):
        raise InvalidPermutation(f"not a bijection on 0..{n - 1}: {arr.tolist()}")
    return arr


def _tokens(text: str) -> list[str]:
    return [t for t in _SEPARATORS.split(text) if t]


def _as_int(token: str, exc) -> int:
    try:
        return int(token)
    except ValueError:
        raise exc(f"expected an integer, got {token!r}") from None


def parse_instance(text: str, name: str = "unnamed") -> QapInstance:
    tokens = text.split()
    if not tokens:
        raise MalformedInstance("empty instance")
    n = _as_int(tokens[0], MalformedInstance)
    if n < 1:
        raise MalformedInstance(f"problem size must be >= 1, got {n}")
    expected = 1 + 2 * n * n
    if len(tokens) != expected:
        raise MalformedInstance(f"expected {expected} tokens for n={n}, found {len(tokens)}")
    try:
        values = np.array([float(t) for t in tokens[1:]])
    except ValueError as err:
        raise MalformedInstance(f"non-numeric token: {err}") from None
    flow = values[: n * n].reshape(n, n)
    distance = values[n * n:].reshape(n, n)
    return QapInstance(flow, distance, name=name)


def parse_solution(text: str, name: str = "unnamed") -> KnownSolution:
    # Some QAPLIB .sln files separate the permutation with commas.
    tokens = _tokens(text)
    if len(tokens) < 2:
        raise MalformedSolution("solution needs at least N and the objective")
    n = _as_int(tokens[0], MalformedSolution)
    if n < 1:
        raise MalformedSolution(f"problem size must be >= 1, got {n}")
    if len(tokens) != 2 + n:
        raise MalformedSolution(f"expected {2 + n} tokens for n={n}, found {len(tokens)}")
    try:
        objective = float(tokens[1])
    except ValueError:
        raise MalformedSolution(f"objective is not numeric: {tokens[1]!r}") from None
    one_based = np.array([_as_int(t, MalformedSolution) for t in tokens[2:]])
    try:
        perm = check_permutation(one_based - 1, n)
    except InvalidPermutation as err:
        raise MalformedSolution(str(err)) from None
    return KnownSolution(n, objective, perm, name)


def read_instance(path, name: Optional[str] = None) -> QapInstance:
    from pathlib import Path

    path = Path(path)
    return parse_instance(path.read_text(), name=name or path.stem)


def read_solution(path) -> KnownSolution:
    from pathlib import Path

    path = Path(path)
    return parse_solution(path.read_text(), name=path.stem)


def _fmt(x: float) -> str:
    """Shortest string that round-trips the float exactly."""
    x = float(x)
    if x.is_integer() and abs(x) < 1e16:
        return str(int(x))
    return repr(x)


def write_instance(inst: QapInstance) -> str:
    """Serialize to the QAPLIB ``.dat`` layout (the linear term is not representable and is dropped)."""
    lines = [str(inst.n), ""]
    for mat in (inst.flow, inst.distance):
        lines.extend(" ".join(_fmt(v) for v in row) for row in mat)
        lines.append("")
    return "\n".join(lines)


CSV_HEADER = [
    "instance",
    "n",
    "objective",
    "lower_bound",
    "reductions",
    "gradient_steps",
    "wall_time_ms",
    "permutation",
    "config",
]


def _result_dict(result: AssignmentResult) -> dict[str, Any]:
    out: dict[str, Any] = {
        "instance": result.instance,
        "n": result.n,
        "permutation": [int(p) + 1 for p in result.permutation],
        "objective": float(result.objective),
    }
    if result.lower_bound is not None:
        out["lower_bound"] = float(result.lower_bound)
    out["reductions"] = int(result.reductions)
    out["gradient_steps"] = int(result.gradient_steps)
    out["wall_time_ms"] = float(result.wall_time_ms)
    out["config"] = result.config
    return out


def write_result(result: AssignmentResult, format: str = "json") -> str:
    """Render a result as JSON (one object) or CSV (header line plus one row).

    Field order is fixed. The permutation is written 1-indexed; in CSV it is a
    single space-separated field. Floats use ``repr`` so they round-trip exactly.
    """
    d = _result_dict(result)
    if format == "json":
        return json.dumps(d, allow_nan=False) + "\n"
    if format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        writer.writerow([
            d["instance"],
            d["n"],
            repr(d["objective"]),
            "" if result.lower_bound is None else repr(d["lower_bound"]),
            d["reductions"],
            d["gradient_steps"],
            repr(d["wall_time_ms"]),
            " ".join(str(p) for p in d["permutation"]),
            json.dumps(d["config"], sort_keys=True),
        ])
        return buf.getvalue()
    raise ValueError(f"unknown format {format!r}")


def read_result(text: str, format: str = "json") -> AssignmentResult:
    """Inverse of :func:`write_result`."""
    if format == "json":
        d = json.loads(text)
        perm = d["permutation"]
    elif format == "csv":
        rows = list(csv.reader(io.StringIO(text)))
        if len(rows) != 2 or rows[0] != CSV_HEADER:
            raise ValueError("expected the result CSV header and exactly one row")
        d = dict(zip(CSV_HEADER, rows[1]))
        perm = [int(p) for p in d["permutation"].split()]
        d["lower_bound"] = float(d["lower_bound"]) if d["lower_bound"] else None
        d["config"] = json.loads(d["config"])
    else:
        raise ValueError(f"unknown format {format!r}")
    return AssignmentResult(
        permutation=check_permutation(np.asarray(perm, dtype=np.int64) - 1),
        objective=float(d["objective"]),
        instance=d["instance"],
        lower_bound=None if d.get("lower_bound") is None else float(d["lower_bound"]),
        reductions=int(d["reductions"]),
        gradient_steps=int(d["gradient_steps"]),
        wall_time_ms=float(d["wall_time_ms"]),
        config=d["config"],
    )


def random_instance(n: int, rng: np.random.Generator, *, symmetric: bool = True, high: int = 10,
                    linear: bool = False, name: Optional[str] = None) -> QapInstance:
    """Uniform random integer instance with zero diagonals, in the style of the nug family."""
    def draw():
        m = rng.integers(0, high + 1, size=(n, n)).astype(float)
        if symmetric:
            m = np.triu(m, 1)
            m = m + m.T
        np.fill_diagonal(m, 0.0)
        return m

    flow, distance = draw(), draw()
    c = rng.integers(0, high + 1, size=n * n).astype(float) if linear else None
    return QapInstance(flow, distance, c, name or f"rand{n}")
