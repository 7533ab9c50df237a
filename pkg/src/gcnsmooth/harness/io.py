"""File formats: edge lists, node signals, embeddings and result rows.

Edge list::

    n <count>
    <i> <j>
    ...

Indices are 0-based; blank lines and ``#`` comments are ignored.
Signals are CSV with header ``node,value`` and one row per node.
Floats are written with 17 significant digits, so they round-trip exactly.
"""

from __future__ import annotations

import csv
import dataclasses
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from ..errors import GraphError
from ..graph import Graph


class ParseError(ValueError):
    def __init__(self, path, lineno: int, msg: str):
        super().__init__(f"{path}:{lineno}: {msg}")
        self.path = path
        self.lineno = lineno


def fmt_float(x: float) -> str:
    return format(float(x), ".17g")


def write_edge_list(path, g: Graph) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(f"n {g.n}\n")
        for i, j in g.edges:
            fh.write(f"{i} {j}\n")


def read_edge_list(path) -> Graph:
    n = None
    pairs = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            tok = line.split()
            if n is None:
                if len(tok) != 2 or tok[0] != "n":
                    raise ParseError(path, lineno, "expected header 'n <count>'")
                try:
                    n = int(tok[1])
                except ValueError:
                    raise ParseError(path, lineno, f"bad node count {tok[1]!r}") from None
                continue
            if len(tok) != 2:
                raise ParseError(path, lineno, f"expected '<i> <j>', got {line!r}")
            try:
                pairs.append((int(tok[0]), int(tok[1])))
            except ValueError:
                raise ParseError(path, lineno, f"non-integer node index in {line!r}") from None
            if not (0 <= pairs[-1][0] < n and 0 <= pairs[-1][1] < n):
                raise ParseError(path, lineno, f"node index out of range for n={n}")
    if n is None:
        raise ParseError(path, 1, "missing header 'n <count>'")
    try:
        return Graph(n, pairs)
    except GraphError as exc:
        raise ParseError(path, 0, str(exc)) from exc


def write_signal(path, values) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["node", "value"])
        for i, v in enumerate(np.asarray(values, dtype=float)):
            w.writerow([i, fmt_float(v)])


def read_signal(path, n: Optional[int] = None) -> np.ndarray:
    values = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["node", "value"]:
            raise ParseError(path, 1, "expected header 'node,value'")
        for lineno, row in enumerate(reader, start=2):
            if not row or not "".join(row).strip():
                continue
            if len(row) != 2:
                raise ParseError(path, lineno, f"expected 2 fields, got {len(row)}")
            try:
                node, val = int(row[0]), float(row[1])
            except ValueError:
                raise ParseError(path, lineno, f"cannot parse {row!r}") from None
            if node in values:
                raise ParseError(path, lineno, f"duplicate node {node}")
            values[node] = val
    size = n if n is not None else len(values)
    missing = sorted(set(range(size)) - set(values))
    if missing or len(values) != size:
        raise ParseError(path, 0, f"signal must cover nodes 0..{size - 1}; missing {missing[:5]}")
    return np.array([values[i] for i in range(size)])


def write_embedding(path, U) -> None:
    U = np.asarray(U, dtype=float)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["node"] + [f"u{k + 1}" for k in range(U.shape[1])])
        for i, row in enumerate(U):
            w.writerow([i] + [fmt_float(x) for x in row])


# --- result rows ------------------------------------------------------------------


@dataclass(frozen=True)
class ResultRow:
    experiment: str
    family: str
    params: str
    alpha: Optional[float]
    roughness: Optional[float]
    estimator: str
    kind: str
    L: Optional[int]
    metric: str
    value: float
    stderr: Optional[float]
    seed: int

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise ValueError(f"non-finite value in row {self}")

    def sort_key(self):
        return (
            self.experiment, self.family, self.params,
            -math.inf if self.alpha is None else self.alpha,
            self.estimator, self.kind,
            -1 if self.L is None else self.L,
            self.metric, self.seed,
        )


COLUMNS = [f.name for f in dataclasses.fields(ResultRow)]


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(float(v))  # shortest round-tripping form
    return str(v)


def write_rows(path, rows: Iterable[ResultRow]) -> list[ResultRow]:
    rows = sorted(rows, key=ResultRow.sort_key)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(COLUMNS)
        for r in rows:
            w.writerow([_cell(getattr(r, c)) for c in COLUMNS])
    return rows


def read_rows(path) -> list[ResultRow]:
    out = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != COLUMNS:
            raise ParseError(path, 1, f"expected columns {COLUMNS}")
        for rec in reader:
            opt_f = lambda s: None if s == "" else float(s)
            out.append(ResultRow(
                experiment=rec["experiment"], family=rec["family"], params=rec["params"],
                alpha=opt_f(rec["alpha"]), roughness=opt_f(rec["roughness"]),
                estimator=rec["estimator"], kind=rec["kind"],
                L=None if rec["L"] == "" else int(rec["L"]),
                metric=rec["metric"], value=float(rec["value"]),
                stderr=opt_f(rec["stderr"]), seed=int(rec["seed"]),
            ))
    return out


def ensure_parent(path) -> Path:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    return p
