"""Plain-text table formats shared by the library and the CLI.

Every table is comma separated with a single header line. Lines starting with
``#`` are comments and carry run metadata; readers skip them.
"""

from __future__ import annotations

import io
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .network import ChainHamiltonian

CHAIN_HEADER = ("index", "eps[cm^-1]", "J_to_next[cm^-1]")


def fmt(x: float) -> str:
    """Fixed 12-significant-digit formatting used by every trace file."""
    return f"{x:.11e}"


def _comment_block(meta: Mapping[str, object] | None) -> list[str]:
    if not meta:
        return []
    return [f"# {k} = {v}" for k, v in meta.items()]


def format_chain(chain: ChainHamiltonian, meta: Mapping[str, object] | None = None) -> str:
    # repr() gives the shortest string that parses back to the same double
    lines = _comment_block(meta)
    lines.append(",".join(CHAIN_HEADER))
    for i, e in enumerate(chain.eps):
        j = repr(float(chain.J[i])) if i < len(chain.J) else ""
        lines.append(f"{i},{float(e)!r},{j}")
    return "\n".join(lines) + "\n"


def parse_chain(text: str) -> ChainHamiltonian:
    rows = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    if not rows:
        raise ValueError("empty chain table")
    header = tuple(c.strip() for c in rows[0].split(","))
    if header != CHAIN_HEADER:
        raise ValueError(f"unexpected chain table header {rows[0]!r}")
    eps, J = [], []
    for lineno, row in enumerate(rows[1:], start=1):
        cells = [c.strip() for c in row.split(",")]
        if len(cells) != 3:
            raise ValueError(f"chain row {lineno}: expected 3 columns, got {len(cells)}")
        if int(cells[0]) != lineno - 1:
            raise ValueError(f"chain row {lineno}: index {cells[0]} out of sequence")
        eps.append(float(cells[1]))
        last = lineno == len(rows) - 1
        if last:
            if cells[2]:
                raise ValueError("last chain row must leave J_to_next empty")
        else:
            J.append(float(cells[2]))
    return ChainHamiltonian(np.array(eps), np.array(J))


def write_chain(path, chain: ChainHamiltonian, meta=None) -> None:
    Path(path).write_text(format_chain(chain, meta))


def read_chain(path) -> ChainHamiltonian:
    return parse_chain(Path(path).read_text())


def format_table(columns: Sequence[str], data: np.ndarray,
                 meta: Mapping[str, object] | None = None) -> str:
    data = np.asarray(data, dtype=float)
    if data.ndim != 2 or data.shape[1] != len(columns):
        raise ValueError(f"data shape {data.shape} does not match {len(columns)} columns")
    buf = io.StringIO()
    for line in _comment_block(meta):
        buf.write(line + "\n")
    buf.write(",".join(columns) + "\n")
    for row in data:
        buf.write(",".join(fmt(x) for x in row) + "\n")
    return buf.getvalue()


def write_table(path, columns: Sequence[str], data, meta=None) -> None:
    Path(path).write_text(format_table(columns, data, meta))


def read_table(path) -> tuple[list[str], np.ndarray]:
    lines = [ln for ln in Path(path).read_text().splitlines()
             if ln.strip() and not ln.startswith("#")]
    columns = lines[0].split(",")
    data = np.array([[float(c) for c in ln.split(",")] for ln in lines[1:]])
    return columns, data.reshape(-1, len(columns))


def trace_columns(labels: Iterable[str]) -> list[str]:
    return ["z[cm]"] + [f"I_{lab}" for lab in labels]
