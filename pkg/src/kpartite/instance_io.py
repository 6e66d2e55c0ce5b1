"""Plain-text instance format.

First non-comment line is ``k n``; every following line is one edge given
as ``k`` space-separated local indices in class order.  Lines starting
with ``#`` are comments.
"""

from __future__ import annotations

import io
from pathlib import Path
from typing import TextIO

from .hypergraph import PartiteHypergraph


class InstanceFormatError(ValueError):
    pass


def parse_instance(text: str) -> PartiteHypergraph:
    header = None
    edges = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            fields = [int(x) for x in line.split()]
        except ValueError:
            raise InstanceFormatError(f"line {lineno}: non-integer token in {raw!r}") from None
        if header is None:
            if len(fields) != 2:
                raise InstanceFormatError(f"line {lineno}: header must be 'k n'")
            header = fields
            continue
        if len(fields) != header[0]:
            raise InstanceFormatError(f"line {lineno}: expected {header[0]} indices, got {len(fields)}")
        edges.append(fields)
    if header is None:
        raise InstanceFormatError("missing 'k n' header")
    k, n = header
    try:
        return PartiteHypergraph.from_edges(k, n, edges)
    except ValueError as exc:
        raise InstanceFormatError(str(exc)) from None


def format_instance(H: PartiteHypergraph, comment: str | None = None) -> str:
    buf = io.StringIO()
    write_instance(H, buf, comment)
    return buf.getvalue()


def write_instance(H: PartiteHypergraph, out: TextIO, comment: str | None = None) -> None:
    if comment:
        for line in comment.splitlines():
            out.write(f"# {line}\n")
    out.write(f"{H.k} {H.n}\n")
    for e in H.edges():
        out.write(" ".join(map(str, e)) + "\n")


def read_instance(path: str | Path) -> PartiteHypergraph:
    return parse_instance(Path(path).read_text())


def save_instance(H: PartiteHypergraph, path: str | Path, comment: str | None = None) -> None:
    Path(path).write_text(format_instance(H, comment))
