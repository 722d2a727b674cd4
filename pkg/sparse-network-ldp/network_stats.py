"""
Structural statistics of sampled networks: degree profiles, weakly connected components and
the degree level sets used by the star-counting events.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import connected_components

from exceptions import DomainError
from network_model import ComponentStats, DirectedNetwork, Network, UndirectedNetwork

MIN_LOGLOG_N = 16


@dataclass(frozen=True)
class DegreeProfile:
    """
    Per-vertex degrees. For a directed network d = max(d_in, d_out) and a self-loop adds one
    to both d_in and d_out of its vertex. For an undirected network d_in = d_out = d.
    """
    d_in: np.ndarray
    d_out: np.ndarray

    @property
    def d(self) -> np.ndarray:
        return np.maximum(self.d_in, self.d_out)

    @property
    def d1(self) -> int:
        return int(self.d.max()) if self.d.size else 0

    def to_dict(self) -> dict:
        return {"d_in": self.d_in.tolist(), "d_out": self.d_out.tolist(),
                "d": self.d.tolist(), "d1": self.d1}


def degree_profile(net: Network) -> DegreeProfile:
    """Exact in/out/max degree of every vertex."""
    if isinstance(net, UndirectedNetwork):
        degree = (np.bincount(net.us, minlength=net.n) + np.bincount(net.vs, minlength=net.n))
        return DegreeProfile(degree, degree.copy())
    return DegreeProfile(np.bincount(net.cols, minlength=net.n),
                         np.bincount(net.rows, minlength=net.n))


def simple_pairs(net: Network) -> tuple[np.ndarray, np.ndarray]:
    """Returns the loop-free, deduplicated unordered pairs (u < v) underlying a network."""
    if isinstance(net, UndirectedNetwork):
        return net.us, net.vs
    off = net.rows != net.cols
    low = np.minimum(net.rows[off], net.cols[off])
    high = np.maximum(net.rows[off], net.cols[off])
    if low.size == 0:
        return low, high
    keys = np.unique(low * net.n + high)
    return np.divmod(keys, net.n)


def component_labels(net: Network) -> tuple[int, np.ndarray]:
    """
    Labels weakly connected components, numbered by their smallest vertex.

    Returns:
        tuple: (component count, label per vertex).
    """
    us, vs = simple_pairs(net)
    graph = sparse.csr_matrix((np.ones(us.size), (us, vs)), shape=(net.n, net.n))
    count, labels = connected_components(graph, directed=True, connection="weak")
    # Relabel so that component k contains the k-th smallest "first vertex".
    first_vertex = np.full(count, net.n, dtype=np.int64)
    np.minimum.at(first_vertex, labels, np.arange(net.n))
    rank = np.empty(count, dtype=np.int64)
    rank[np.argsort(first_vertex, kind="stable")] = np.arange(count)
    return count, rank[labels]


def components(net: Network) -> list[ComponentStats]:
    """
    Weakly connected components with their statistics, isolated vertices included as
    singletons. Components are ordered by their smallest vertex.

    edge_count counts the network's own entries (directed entries, each self-loop once), so
    the edge counts sum to the entry count. excess is taken on the loop-free symmetrization.
    """
    count, labels = component_labels(net)
    vertex_counts = np.bincount(labels, minlength=count)
    us, vs = simple_pairs(net)
    simple_counts = np.bincount(labels[us], minlength=count)
    if isinstance(net, UndirectedNetwork):
        edge_counts = simple_counts
        loop_counts = np.zeros(count, dtype=np.int64)
    else:
        edge_counts = np.bincount(labels[net.rows], minlength=count)
        loops = net.rows[net.rows == net.cols]
        loop_counts = np.bincount(labels[loops], minlength=count)
    max_degree = np.zeros(count, dtype=np.int64)
    np.maximum.at(max_degree, labels, degree_profile(net).d)
    return [
        ComponentStats(int(vertex_counts[k]), int(edge_counts[k]),
                       int(simple_counts[k] - vertex_counts[k]), int(loop_counts[k]), int(max_degree[k]))
        for k in range(count)
    ]


def degree_scale(n: int) -> float:
    """t_n = log n / log log n, natural logarithms."""
    if n < MIN_LOGLOG_N:
        raise DomainError(f"degree scale needs n >= {MIN_LOGLOG_N}, got {n}")
    return math.log(n) / math.log(math.log(n))


def degree_threshold(gamma: float, n: int) -> int:
    """g(gamma) = ceil(gamma * t_n)."""
    return int(math.ceil(gamma * degree_scale(n)))


def level_count(kappa: float) -> int:
    """The integer m with m * kappa < 1 <= (m + 1) * kappa."""
    if not 0 < kappa < 1:
        raise DomainError(f"kappa must lie in (0, 1), got {kappa}")
    m = int(math.ceil(1.0 / kappa)) - 1
    while (m + 1) * kappa < 1:
        m += 1
    while m > 0 and m * kappa >= 1:
        m -= 1
    return m


@dataclass(frozen=True)
class LevelSets:
    """
    Degree level set sizes |D_{i kappa}| for i = 0..m and |D_{1 + kappa}|.

    Attributes:
        thresholds (tuple[int, ...]): g(i kappa) for i = 0..m.
        counts (tuple[int, ...]): Matching level set sizes.
        top_threshold (int): g(1 + kappa).
        top_count (int): |D_{1 + kappa}|.
    """
    kappa: float
    thresholds: tuple[int, ...]
    counts: tuple[int, ...]
    top_threshold: int
    top_count: int

    def to_dict(self) -> dict:
        return {"kappa": self.kappa, "thresholds": list(self.thresholds), "counts": list(self.counts),
                "top_threshold": self.top_threshold, "top_count": self.top_count}


def degree_level_sets(u: UndirectedNetwork, kappa: float, n: int) -> LevelSets:
    """
    Counts the vertices of u whose degree reaches g(i kappa), i = 0..m, and g(1 + kappa).

    Only vertices carrying at least one edge are counted, so level 0 is the number of
    non-isolated vertices and the empty graph gives all zeros.

    Args:
        u (UndirectedNetwork): The graph, typically the symmetrized large-weight support.
        kappa (float): Grid step in (0, 1).
        n (int): Size used in t_n, at least 16.

    Raises:
        DomainError: If kappa is outside (0, 1) or n < 16.
    """
    m = level_count(kappa)
    t_n = degree_scale(n)
    degree = degree_profile(u).d
    thresholds = tuple(int(math.ceil(i * kappa * t_n)) for i in range(m + 1))
    counts = tuple(int(np.count_nonzero(degree >= max(g, 1))) for g in thresholds)
    top = int(math.ceil((1 + kappa) * t_n))
    return LevelSets(kappa, thresholds, counts, top, int(np.count_nonzero(degree >= top)))
