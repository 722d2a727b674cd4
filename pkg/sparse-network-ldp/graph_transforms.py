"""
Norm-controlled graph transformations: symmetrization, vertex splitting, clique reduction and
star decomposition.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from exceptions import DomainError
from network_model import ComponentStats, DirectedNetwork, UndirectedNetwork
from network_stats import component_labels, components, degree_profile

logger = logging.getLogger(__name__)


def symmetrize(a: DirectedNetwork) -> UndirectedNetwork:
    """
    Symmetrization: for i != j the edge {i, j} gets max(A_ij, A_ji), an absent entry counting
    as 0. The diagonal is dropped, and so are pairs whose maximum is 0.

    Args:
        a (DirectedNetwork): Input network.

    Returns:
        UndirectedNetwork: The symmetrization on the same vertex set.
    """
    off = a.rows != a.cols
    low = np.minimum(a.rows[off], a.cols[off])
    high = np.maximum(a.rows[off], a.cols[off])
    weights = a.weights[off]
    if weights.size == 0:
        return UndirectedNetwork.empty(a.n)
    keys, inverse, counts = np.unique(low * a.n + high, return_inverse=True, return_counts=True)
    best = np.full(keys.size, -np.inf)
    np.maximum.at(best, inverse, weights)
    one_sided = counts == 1
    best[one_sided] = np.maximum(best[one_sided], 0.0)
    keep = best != 0
    us, vs = np.divmod(keys[keep], a.n)
    return UndirectedNetwork.from_arrays(a.n, us, vs, best[keep])


@dataclass(frozen=True)
class SplitMap:
    """
    Provenance of a vertex split.

    Attributes:
        n (int): Vertex count of the original network.
        plus (np.ndarray): Split id of v+ for each original v, -1 if v has no out-edge.
        minus (np.ndarray): Split id of v- for each original v, -1 if v has no in-edge.
        origin (np.ndarray): Original vertex of each split vertex.
        sign (np.ndarray): +1 for an out-side copy, -1 for an in-side copy.
    """
    n: int
    plus: np.ndarray
    minus: np.ndarray
    origin: np.ndarray
    sign: np.ndarray

    @property
    def vertex_count(self) -> int:
        return int(self.origin.size)

    def rows(self) -> list[tuple[int, int, int]]:
        """(orig, plus, minus) for every original vertex that survives the split."""
        kept = np.flatnonzero((self.plus >= 0) | (self.minus >= 0))
        return [(int(v), int(self.plus[v]), int(self.minus[v])) for v in kept]

    @classmethod
    def from_rows(cls, n: int, rows: list[tuple[int, int, int]]) -> "SplitMap":
        plus = np.full(n, -1, dtype=np.int64)
        minus = np.full(n, -1, dtype=np.int64)
        for orig, p, m in rows:
            if not 0 <= orig < n or p < -1 or m < -1:
                raise DomainError(f"bad split map row ({orig}, {p}, {m}) for n={n}")
            plus[orig], minus[orig] = p, m
        size = int(max(plus.max(initial=-1), minus.max(initial=-1)) + 1)
        origin = np.full(size, -1, dtype=np.int64)
        sign = np.zeros(size, dtype=np.int64)
        for copies, s in ((plus, 1), (minus, -1)):
            present = np.flatnonzero(copies >= 0)
            origin[copies[present]] = present
            sign[copies[present]] = s
        if np.any(origin < 0):
            raise DomainError("split map does not cover a contiguous id range")
        return cls(n, plus, minus, origin, sign)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SplitMap):
            return NotImplemented
        return self.n == other.n and all(np.array_equal(getattr(self, f), getattr(other, f))
                                         for f in ("plus", "minus", "origin", "sign"))

    __hash__ = None


def vertex_split(w: DirectedNetwork) -> tuple[DirectedNetwork, SplitMap]:
    """
    Splits every vertex v into an out-side copy v+ and an in-side copy v-.

    Raw ids are 2v for v+ and 2v+1 for v-, then compacted to 0..N-1 in that order. A vertex
    with only out-edges (only in-edges) keeps only v+ (v-). Isolated vertices are dropped and a
    self-loop at v becomes the edge v+ -> v-. Every entry (i, j, w) becomes (i+, j-, w), so
    the result is bipartite from + copies to - copies.

    Returns:
        tuple: (split network W', SplitMap). W' has max(N, 1) vertices, N the retained count.
    """
    has_out = np.bincount(w.rows, minlength=w.n) > 0
    has_in = np.bincount(w.cols, minlength=w.n) > 0
    present = np.empty(2 * w.n, dtype=bool)
    present[0::2] = has_out
    present[1::2] = has_in
    compact = np.cumsum(present) - 1
    compact[~present] = -1
    plus, minus = compact[0::2].copy(), compact[1::2].copy()
    raw = np.flatnonzero(present)
    origin, sign = raw // 2, np.where(raw % 2 == 0, 1, -1)
    split_map = SplitMap(w.n, plus, minus, origin, sign)
    split = DirectedNetwork.from_arrays(max(raw.size, 1), plus[w.rows], minus[w.cols], w.weights)
    return split, split_map


@dataclass(frozen=True)
class ReductionResult:
    h: UndirectedNetwork
    split_map: SplitMap
    components: list[ComponentStats]


def clique_reduce(w: DirectedNetwork) -> ReductionResult:
    """
    Clique reduction H = symmetrize(vertex_split(W)).

    H is triangle-free, carries exactly the edge weights of W, and ||W|| <= ||H||.

    Raises:
        DomainError: If W has a negative weight. Take W.abs() first.
    """
    if np.any(w.weights < 0):
        raise DomainError("clique reduction needs nonnegative weights; pass w.abs()")
    split, split_map = vertex_split(w)
    h = symmetrize(split)
    stats = [c for c in components(h) if c.edge_count > 0]
    return ReductionResult(h, split_map, stats)


def count_triangles(u: UndirectedNetwork) -> int:
    """Exhaustive triangle count of the unweighted graph underlying u."""
    adjacency = (u.to_sparse() != 0).astype(np.int64)
    closed = (adjacency @ adjacency).multiply(adjacency)
    return int(closed.sum()) // 6


@dataclass(frozen=True)
class ReductionAudit:
    """Measured quantities and verdicts for the structural properties of a clique reduction."""
    edges_w: int
    edges_h: int
    vertices_w: int
    vertices_h: int
    d1_w: int
    d1_h: int
    triangles: int
    weights_rearranged: bool
    excess_violations: int

    @property
    def edge_count_preserved(self) -> bool:
        return self.edges_w == self.edges_h

    @property
    def vertex_bound(self) -> bool:
        return self.vertices_h <= 2 * self.vertices_w

    @property
    def degree_bound(self) -> bool:
        return self.d1_h <= self.d1_w

    @property
    def triangle_free(self) -> bool:
        return self.triangles == 0

    @property
    def excess_bound(self) -> bool:
        return self.excess_violations == 0

    @property
    def passed(self) -> bool:
        return (self.edge_count_preserved and self.vertex_bound and self.degree_bound
                and self.triangle_free and self.weights_rearranged and self.excess_bound)

    def to_dict(self) -> dict:
        return {
            "edges_w": self.edges_w, "edges_h": self.edges_h,
            "vertices_w": self.vertices_w, "vertices_h": self.vertices_h,
            "d1_w": self.d1_w, "d1_h": self.d1_h, "triangles": self.triangles,
            "edge_count_preserved": self.edge_count_preserved, "vertex_bound": self.vertex_bound,
            "degree_bound": self.degree_bound, "triangle_free": self.triangle_free,
            "weights_rearranged": self.weights_rearranged, "excess_bound": self.excess_bound,
            "passed": self.passed,
        }


def audit_reduction(w: DirectedNetwork, result: ReductionResult) -> ReductionAudit:
    """
    Checks the structural properties of a clique reduction of w.

    Vertex counts are taken over non-isolated vertices. The per-component excess bound
    excess(H_i) <= 2 * max(excess(sym(W_c)), 0) + S(W_c) is checked against the weak component W_c of W
    that contains the origins of H_i. A tree component has excess -1, hence the floor at 0.
    """
    h, split_map = result.h, result.split_map
    profile_w = degree_profile(w)
    vertices_w = int(np.count_nonzero(profile_w.d))
    same_weights = bool(np.array_equal(np.sort(w.weights), np.sort(h.weights)))

    violations = 0
    if h.edge_count:
        w_stats = components(w)
        _, w_labels = component_labels(w)
        count_h, h_labels = component_labels(h)
        h_stats = components(h)
        for k in range(count_h):
            if h_stats[k].edge_count == 0:
                continue
            member = int(np.flatnonzero(h_labels == k)[0])
            source = w_stats[w_labels[split_map.origin[member]]]
            if h_stats[k].excess > 2 * max(source.excess, 0) + source.self_loop_count:
                violations += 1
                logger.warning("excess bound violated on reduced component %d", k)
    return ReductionAudit(
        edges_w=w.entry_count, edges_h=h.edge_count,
        vertices_w=vertices_w, vertices_h=split_map.vertex_count,
        d1_w=profile_w.d1, d1_h=degree_profile(h).d1,
        triangles=count_triangles(h), weights_rearranged=same_weights,
        excess_violations=violations,
    )


@dataclass(frozen=True)
class StarDecomposition:
    """
    Vertex-disjoint stars plus a remainder. success means the remainder's maximum degree is
    below the threshold.
    """
    stars: list[UndirectedNetwork]
    hubs: list[int]
    remainder: UndirectedNetwork
    threshold: int
    success: bool

    def star_union(self) -> UndirectedNetwork:
        """All star edges as one network."""
        if not self.stars:
            return UndirectedNetwork.empty(self.remainder.n)
        return UndirectedNetwork.from_arrays(
            self.remainder.n,
            np.concatenate([s.us for s in self.stars]),
            np.concatenate([s.vs for s in self.stars]),
            np.concatenate([s.weights for s in self.stars]),
        )


def star_decompose(u: UndirectedNetwork, threshold: int) -> StarDecomposition:
    """
    Greedy star decomposition.

    Vertices are visited by descending degree, ties broken by index. A vertex of degree at
    least `threshold` that is still unclaimed becomes a hub and claims its unclaimed
    neighbours as leaves; a hub without unclaimed neighbours is skipped. Every edge of u lands
    in exactly one star or in the remainder.

    Args:
        u (UndirectedNetwork): Graph to decompose.
        threshold (int): Minimum hub degree, at least 1.

    Returns:
        StarDecomposition: Stars (over the same vertex set), hubs, remainder and success flag.

    Raises:
        DomainError: If threshold < 1.
    """
    if threshold < 1:
        raise DomainError(f"star threshold must be >= 1, got {threshold}")
    degree = degree_profile(u).d
    adjacency = u.to_sparse()
    claimed = np.zeros(u.n, dtype=bool)
    hub_of = np.full(u.n, -1, dtype=np.int64)
    hubs = []
    order = np.lexsort((np.arange(u.n), -degree))
    for v in order:
        if degree[v] < threshold:
            break
        if claimed[v]:
            continue
        neighbours = adjacency.indices[adjacency.indptr[v]:adjacency.indptr[v + 1]]
        leaves = neighbours[~claimed[neighbours]]
        if leaves.size == 0:
            continue
        claimed[v] = True
        claimed[leaves] = True
        hub_of[leaves] = v
        hubs.append(int(v))

    is_hub = np.zeros(u.n, dtype=bool)
    is_hub[hubs] = True
    star_edge = (is_hub[u.us] & (hub_of[u.vs] == u.us)) | (is_hub[u.vs] & (hub_of[u.us] == u.vs))
    centre = np.where(is_hub[u.us] & (hub_of[u.vs] == u.us), u.us, u.vs)
    stars = [u.select(star_edge & (centre == hub)) for hub in hubs]
    remainder = u.select(~star_edge)
    success = degree_profile(remainder).d1 < threshold
    logger.debug("star decomposition: %d stars, remainder d1=%d, threshold=%d",
                 len(stars), degree_profile(remainder).d1, threshold)
    return StarDecomposition(stars, hubs, remainder, int(threshold), bool(success))
