"""
Plain-text network files.

    directed n=<int>          or    undirected n=<int>
    i,j,w                           u,v,w
    ...                             ...

Weights are written in shortest round-trip decimal, so write/read is lossless. Split maps use
the header `split n=<int>` followed by `orig,plus,minus` lines (-1 for a missing copy).
"""
from __future__ import annotations

import logging
from pathlib import Path

from exceptions import DomainError, ReportIOError
from graph_transforms import SplitMap
from network_model import DirectedNetwork, Network, UndirectedNetwork

logger = logging.getLogger(__name__)

DIRECTED = "directed"
UNDIRECTED = "undirected"
SPLIT = "split"


def _write_lines(path, lines: list[str]) -> None:
    path = Path(path)
    try:
        if path.parent and not path.parent.exists():
            path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    except OSError as e:
        raise ReportIOError(path, e.strerror or str(e)) from e
    logger.debug("wrote %s (%d lines)", path, len(lines))


def _read_lines(path) -> list[str]:
    path = Path(path)
    try:
        return path.read_text(encoding="utf-8").splitlines()
    except FileNotFoundError as e:
        raise ReportIOError(path, "no such file") from e
    except OSError as e:
        raise ReportIOError(path, e.strerror or str(e)) from e
    except UnicodeDecodeError as e:
        raise ReportIOError(path, "not a text file") from e


def _parse_header(path, line: str) -> tuple[str, int]:
    parts = line.split()
    if len(parts) != 2 or not parts[1].startswith("n="):
        raise DomainError(f"{path}:1: expected '<kind> n=<int>' header, got {line!r}")
    try:
        return parts[0], int(parts[1][2:])
    except ValueError:
        raise DomainError(f"{path}:1: vertex count is not an integer: {parts[1]!r}") from None


def _parse_rows(path, lines: list[str], width: int, conversions) -> list[tuple]:
    rows = []
    for number, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        fields = line.split(",")
        if len(fields) != width:
            raise DomainError(f"{path}:{number}: expected {width} comma-separated fields, got {line!r}")
        try:
            rows.append(tuple(convert(field) for convert, field in zip(conversions, fields)))
        except ValueError:
            raise DomainError(f"{path}:{number}: malformed entry {line!r}") from None
    return rows


def format_network(net: Network) -> list[str]:
    if isinstance(net, UndirectedNetwork):
        return [f"{UNDIRECTED} n={net.n}"] + [f"{u},{v},{w!r}" for u, v, w in net.edges]
    return [f"{DIRECTED} n={net.n}"] + [f"{i},{j},{w!r}" for i, j, w in net.entries]


def write_network(path, net: Network) -> None:
    """
    Writes a network file.

    Raises:
        ReportIOError: If the file cannot be written.
    """
    _write_lines(path, format_network(net))


def read_network(path) -> Network:
    """
    Reads a directed or undirected network file.

    Raises:
        ReportIOError: If the file cannot be read.
        DomainError: If the content is malformed, with the offending line number.
    """
    lines = _read_lines(path)
    if not lines:
        raise DomainError(f"{path}: empty network file")
    kind, n = _parse_header(path, lines[0])
    rows = _parse_rows(path, lines, 3, (int, int, float))
    try:
        if kind == DIRECTED:
            return DirectedNetwork.from_entries(n, rows)
        if kind == UNDIRECTED:
            return UndirectedNetwork.from_edges(n, rows)
    except DomainError as e:
        raise DomainError(f"{path}: {e}") from None
    raise DomainError(f"{path}:1: unknown network kind {kind!r}")


def write_split_map(path, split_map: SplitMap) -> None:
    lines = [f"{SPLIT} n={split_map.n}"] + [f"{o},{p},{m}" for o, p, m in split_map.rows()]
    _write_lines(path, lines)


def read_split_map(path) -> SplitMap:
    """
    Reads a split map written by write_split_map.

    Raises:
        ReportIOError: If the file cannot be read.
        DomainError: If the content is malformed.
    """
    lines = _read_lines(path)
    if not lines:
        raise DomainError(f"{path}: empty split map file")
    kind, n = _parse_header(path, lines[0])
    if kind != SPLIT:
        raise DomainError(f"{path}:1: expected a '{SPLIT}' header, got {kind!r}")
    return SplitMap.from_rows(n, _parse_rows(path, lines, 3, (int, int, int)))
