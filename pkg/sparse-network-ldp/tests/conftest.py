"""Shared fixtures and hypothesis strategies."""
from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

PROJECT_DIR = Path(__file__).resolve().parents[1]
if str(PROJECT_DIR) not in sys.path:
    sys.path.insert(0, str(PROJECT_DIR))

from network_model import DirectedNetwork, UndirectedNetwork  # noqa: E402
from random_generator import RngHandle, WeibullSpec, attach_weights, sample_digraph  # noqa: E402

PROPERTY_SETTINGS = settings(
    max_examples=150,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)

_WEIGHT = st.floats(min_value=0.05, max_value=20.0, allow_nan=False, allow_infinity=False)
_SIGNED_WEIGHT = st.one_of(_WEIGHT, _WEIGHT.map(lambda w: -w))


@st.composite
def directed_networks(draw, max_n: int = 8, nonnegative: bool = True, allow_loops: bool = True):
    n = draw(st.integers(min_value=1, max_value=max_n))
    cells = [(i, j) for i in range(n) for j in range(n) if allow_loops or i != j]
    chosen = draw(st.lists(st.sampled_from(cells), unique=True, max_size=len(cells))) if cells else []
    weight = _WEIGHT if nonnegative else _SIGNED_WEIGHT
    weights = draw(st.lists(weight, min_size=len(chosen), max_size=len(chosen)))
    return DirectedNetwork.from_entries(n, [(i, j, w) for (i, j), w in zip(chosen, weights)])


@st.composite
def undirected_networks(draw, max_n: int = 10):
    n = draw(st.integers(min_value=2, max_value=max_n))
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True, max_size=len(pairs)))
    weights = draw(st.lists(_WEIGHT, min_size=len(chosen), max_size=len(chosen)))
    return UndirectedNetwork.from_edges(n, [(u, v, w) for (u, v), w in zip(chosen, weights)])


def random_network(n: int, p: float, seed: int, alpha: float = 1.0, stream: int = 0) -> DirectedNetwork:
    """A seeded weighted Erdos-Renyi network."""
    handle = RngHandle(seed, stream)
    x = sample_digraph(n, p, handle.substream(0))
    return attach_weights(x, WeibullSpec(alpha), handle.substream(1))


@pytest.fixture
def both_sided_triangle() -> DirectedNetwork:
    return DirectedNetwork.from_entries(3, [(i, j, 1.0) for i in range(3) for j in range(3) if i != j])


@pytest.fixture
def split_example() -> DirectedNetwork:
    """
    Ten-vertex example a..j -> 0..9 with three both-sided pairs and a self-loop at d:
    b->c, c->a, c->h, h->g, h->i, j->i, h->d, e->j, e->f, j->d, c<->d, d<->i, c<->i, d->d.
    """
    a, b, c, d, e, f, g, h, i, j = range(10)
    arcs = [(b, c), (c, a), (c, h), (h, g), (h, i), (j, i), (h, d), (e, j), (e, f), (j, d),
            (c, d), (d, c), (d, i), (i, d), (c, i), (i, c), (d, d)]
    return DirectedNetwork.from_entries(10, [(u, v, 1.0 + k / 10) for k, (u, v) in enumerate(arcs)])


def dense_norm(net) -> float:
    """numpy oracle for the largest singular value."""
    from network_model import dense_matrix

    return float(np.linalg.norm(dense_matrix(net), 2))
