"""
Network data model shared by every module.

A DirectedNetwork is a sparse weighted digraph on vertices 0..n-1, equivalently a sparse
non-Hermitian n x n matrix. An UndirectedNetwork is a sparse symmetric weighted graph without
self-loops. Both are immutable and kept in canonical form: entries sorted by (row, column),
no duplicate pairs, no explicit zeros, finite weights only.
"""
from __future__ import annotations

from dataclasses import dataclass, asdict
from typing import Iterable

import numpy as np
from scipy import sparse

from config_manager import get_config
from exceptions import DomainError, SizeError


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


def _canonical_order(first: np.ndarray, second: np.ndarray) -> np.ndarray:
    return np.lexsort((second, first))


def _check_indices(n: int, *index_arrays: np.ndarray) -> None:
    for indices in index_arrays:
        if indices.size and (indices.min() < 0 or indices.max() >= n):
            raise DomainError(f"vertex index out of range [0, {n})")


def _check_weights(weights: np.ndarray) -> None:
    if not np.all(np.isfinite(weights)):
        raise DomainError("weights must be finite")
    if np.any(weights == 0):
        raise DomainError("explicit zero weights are not allowed; drop the entry instead")


def _check_unique(first: np.ndarray, second: np.ndarray) -> None:
    if first.size > 1:
        same = (first[1:] == first[:-1]) & (second[1:] == second[:-1])
        if np.any(same):
            k = int(np.argmax(same))
            raise DomainError(f"duplicate entry for pair ({first[k]}, {second[k]})")


@dataclass(frozen=True, eq=False)
class DirectedNetwork:
    """
    Sparse weighted digraph / non-Hermitian matrix.

    Attributes:
        n (int): Vertex count.
        rows (np.ndarray): Row (source) index of each entry.
        cols (np.ndarray): Column (target) index of each entry.
        weights (np.ndarray): Weight of each entry.
    """
    n: int
    rows: np.ndarray
    cols: np.ndarray
    weights: np.ndarray

    @classmethod
    def from_arrays(cls, n: int, rows, cols, weights) -> "DirectedNetwork":
        """
        Builds a canonical network from parallel index/weight arrays.

        Args:
            n (int): Vertex count (positive).
            rows, cols: Integer index sequences in [0, n).
            weights: Real weights, finite and nonzero.

        Returns:
            DirectedNetwork: The network with entries sorted by (row, column).

        Raises:
            DomainError: On a bad vertex count, out-of-range index, zero or non-finite
                weight, or a duplicated (row, column) pair.
        """
        n = int(n)
        if n <= 0:
            raise DomainError(f"vertex count must be positive, got {n}")
        rows = np.asarray(rows, dtype=np.int64).ravel()
        cols = np.asarray(cols, dtype=np.int64).ravel()
        weights = np.asarray(weights, dtype=np.float64).ravel()
        if not (rows.size == cols.size == weights.size):
            raise DomainError("rows, cols and weights must have equal length")
        _check_indices(n, rows, cols)
        _check_weights(weights)
        order = _canonical_order(rows, cols)
        rows, cols, weights = rows[order], cols[order], weights[order]
        _check_unique(rows, cols)
        return cls(n, _frozen(rows), _frozen(cols), _frozen(weights))

    @classmethod
    def from_entries(cls, n: int, entries: Iterable[tuple[int, int, float]]) -> "DirectedNetwork":
        """Builds a network from (i, j, w) triples."""
        entries = list(entries)
        if not entries:
            return cls.empty(n)
        rows, cols, weights = zip(*entries)
        return cls.from_arrays(n, rows, cols, weights)

    @classmethod
    def empty(cls, n: int) -> "DirectedNetwork":
        return cls.from_arrays(n, [], [], [])

    @property
    def entry_count(self) -> int:
        return int(self.weights.size)

    @property
    def entries(self) -> list[tuple[int, int, float]]:
        return [(int(i), int(j), float(w)) for i, j, w in zip(self.rows, self.cols, self.weights)]

    def is_indicator(self) -> bool:
        return bool(np.all(self.weights == 1.0))

    def indicator(self) -> "DirectedNetwork":
        """Returns the 0/1 support of the network."""
        return DirectedNetwork(self.n, self.rows, self.cols, _frozen(np.ones_like(self.weights)))

    def abs(self) -> "DirectedNetwork":
        return DirectedNetwork(self.n, self.rows, self.cols, _frozen(np.abs(self.weights)))

    def transpose(self) -> "DirectedNetwork":
        return DirectedNetwork.from_arrays(self.n, self.cols, self.rows, self.weights)

    def max_abs_weight(self) -> float:
        return float(np.abs(self.weights).max()) if self.weights.size else 0.0

    def self_loop_count(self) -> int:
        return int(np.count_nonzero(self.rows == self.cols))

    def select(self, mask: np.ndarray) -> "DirectedNetwork":
        """Keeps the entries where mask is true. Canonical order is preserved."""
        return DirectedNetwork(self.n, _frozen(self.rows[mask]), _frozen(self.cols[mask]),
                               _frozen(self.weights[mask]))

    def to_sparse(self) -> sparse.csr_matrix:
        return sparse.csr_matrix((self.weights, (self.rows, self.cols)), shape=(self.n, self.n))

    def __eq__(self, other) -> bool:
        if not isinstance(other, DirectedNetwork):
            return NotImplemented
        return (self.n == other.n and np.array_equal(self.rows, other.rows)
                and np.array_equal(self.cols, other.cols)
                and np.array_equal(self.weights, other.weights))

    __hash__ = None

    def __repr__(self) -> str:
        return f"DirectedNetwork(n={self.n}, entries={self.entry_count})"


@dataclass(frozen=True, eq=False)
class UndirectedNetwork:
    """
    Sparse symmetric weighted graph without self-loops.

    Attributes:
        n (int): Vertex count.
        us (np.ndarray): Smaller endpoint of each edge.
        vs (np.ndarray): Larger endpoint of each edge (us < vs).
        weights (np.ndarray): Edge weights.
    """
    n: int
    us: np.ndarray
    vs: np.ndarray
    weights: np.ndarray

    @classmethod
    def from_arrays(cls, n: int, us, vs, weights) -> "UndirectedNetwork":
        """
        Builds a canonical undirected network. Endpoint order within a pair is normalized.

        Raises:
            DomainError: On a self-loop, duplicate pair, out-of-range index, zero or
                non-finite weight.
        """
        n = int(n)
        if n <= 0:
            raise DomainError(f"vertex count must be positive, got {n}")
        us = np.asarray(us, dtype=np.int64).ravel()
        vs = np.asarray(vs, dtype=np.int64).ravel()
        weights = np.asarray(weights, dtype=np.float64).ravel()
        if not (us.size == vs.size == weights.size):
            raise DomainError("us, vs and weights must have equal length")
        _check_indices(n, us, vs)
        _check_weights(weights)
        if np.any(us == vs):
            raise DomainError("undirected networks cannot contain self-loops")
        low, high = np.minimum(us, vs), np.maximum(us, vs)
        order = _canonical_order(low, high)
        low, high, weights = low[order], high[order], weights[order]
        _check_unique(low, high)
        return cls(n, _frozen(low), _frozen(high), _frozen(weights))

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int, float]]) -> "UndirectedNetwork":
        edges = list(edges)
        if not edges:
            return cls.empty(n)
        us, vs, weights = zip(*edges)
        return cls.from_arrays(n, us, vs, weights)

    @classmethod
    def empty(cls, n: int) -> "UndirectedNetwork":
        return cls.from_arrays(n, [], [], [])

    @property
    def edge_count(self) -> int:
        return int(self.weights.size)

    @property
    def edges(self) -> list[tuple[int, int, float]]:
        return [(int(u), int(v), float(w)) for u, v, w in zip(self.us, self.vs, self.weights)]

    def select(self, mask: np.ndarray) -> "UndirectedNetwork":
        return UndirectedNetwork(self.n, _frozen(self.us[mask]), _frozen(self.vs[mask]),
                                 _frozen(self.weights[mask]))

    def to_directed(self) -> DirectedNetwork:
        """Lifts every edge {u, v} to the two directed entries (u, v) and (v, u)."""
        rows = np.concatenate([self.us, self.vs])
        cols = np.concatenate([self.vs, self.us])
        return DirectedNetwork.from_arrays(self.n, rows, cols, np.concatenate([self.weights, self.weights]))

    def to_sparse(self) -> sparse.csr_matrix:
        return self.to_directed().to_sparse()

    def max_abs_weight(self) -> float:
        return float(np.abs(self.weights).max()) if self.weights.size else 0.0

    def __eq__(self, other) -> bool:
        if not isinstance(other, UndirectedNetwork):
            return NotImplemented
        return (self.n == other.n and np.array_equal(self.us, other.us)
                and np.array_equal(self.vs, other.vs)
                and np.array_equal(self.weights, other.weights))

    __hash__ = None

    def __repr__(self) -> str:
        return f"UndirectedNetwork(n={self.n}, edges={self.edge_count})"


Network = DirectedNetwork | UndirectedNetwork


@dataclass(frozen=True)
class ComponentStats:
    """
    Statistics of one weakly connected component.

    excess is measured on the loop-free symmetrization: simple edges minus vertices, so a tree
    has excess -1. edge_count counts the entries of the original network inside the component
    (directed entries with each self-loop once, or undirected edges).
    For directed components excess is in general not edge_count - vertex_count.
    """
    vertex_count: int
    edge_count: int
    excess: int
    self_loop_count: int
    max_degree: int

    def to_dict(self) -> dict:
        return asdict(self)


def dense_matrix(net: Network, cap: int | None = None) -> np.ndarray:
    """
    Expands a network into its dense n x n matrix.

    Args:
        net (Network): Directed or undirected network.
        cap (int, optional): Largest accepted n. Defaults to the configured dense cap.

    Returns:
        np.ndarray: M with M[i, j] = w for each entry (both orientations for undirected edges).

    Raises:
        SizeError: If n exceeds the cap.
    """
    cap = get_config().dense_cap if cap is None else cap
    if net.n > cap:
        raise SizeError(f"n={net.n} exceeds the dense cap {cap}")
    matrix = np.zeros((net.n, net.n), dtype=np.float64)
    if isinstance(net, UndirectedNetwork):
        matrix[net.us, net.vs] = net.weights
        matrix[net.vs, net.us] = net.weights
    else:
        matrix[net.rows, net.cols] = net.weights
    return matrix


def from_dense(matrix: np.ndarray) -> DirectedNetwork:
    """Inverse of dense_matrix for directed networks: nonzero cells become entries."""
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise DomainError("expected a square matrix")
    rows, cols = np.nonzero(matrix)
    return DirectedNetwork.from_arrays(matrix.shape[0], rows, cols, matrix[rows, cols])


def _index_set(indices, n: int, label: str) -> np.ndarray:
    indices = np.unique(np.asarray(list(indices), dtype=np.int64))
    if indices.size and (indices[0] < 0 or indices[-1] >= n):
        raise DomainError(f"{label} index out of range [0, {n})")
    return indices


def minor(net: DirectedNetwork, rows, cols) -> DirectedNetwork:
    """
    Extracts the submatrix on the given row and column index sets.

    Surviving rows and columns are re-indexed by their rank in the sorted index set. A
    rectangular minor is padded with zero rows or columns to the square of side
    max(|rows|, |cols|), which leaves every singular value unchanged.

    Args:
        net (DirectedNetwork): The full network.
        rows, cols: Index collections within [0, n). Duplicates are ignored.

    Returns:
        DirectedNetwork: The minor. An empty selection gives the empty network on one vertex.

    Raises:
        DomainError: If an index is out of range.
    """
    row_set = _index_set(rows, net.n, "row")
    col_set = _index_set(cols, net.n, "column")
    size = max(row_set.size, col_set.size, 1)
    row_pos = np.searchsorted(row_set, net.rows)
    col_pos = np.searchsorted(col_set, net.cols)
    keep_rows = (row_pos < row_set.size) & (row_set[np.minimum(row_pos, max(row_set.size - 1, 0))] == net.rows) \
        if row_set.size else np.zeros(net.entry_count, dtype=bool)
    keep_cols = (col_pos < col_set.size) & (col_set[np.minimum(col_pos, max(col_set.size - 1, 0))] == net.cols) \
        if col_set.size else np.zeros(net.entry_count, dtype=bool)
    keep = keep_rows & keep_cols
    return DirectedNetwork.from_arrays(size, row_pos[keep], col_pos[keep], net.weights[keep])
