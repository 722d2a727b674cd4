"""
Seeded generation of Erdos-Renyi digraphs and Weibull edge weights.

Every draw comes from an RngHandle: a (master_seed, stream_index) pair, optionally refined by a
path of substream tags. Handles are plain values, so they can be sent to worker processes and
replayed bit-for-bit on the same build.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from exceptions import DomainError
from network_model import DirectedNetwork

logger = logging.getLogger(__name__)

SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class RngHandle:
    """
    Identifies one independent random stream.

    Attributes:
        master_seed (int): 64-bit experiment seed.
        stream_index (int): 64-bit stream number, e.g. a trial index.
        path (tuple[int, ...]): Substream tags appended by substream().
    """
    master_seed: int
    stream_index: int = 0
    path: tuple[int, ...] = ()

    def __post_init__(self):
        for name in ("master_seed", "stream_index"):
            value = getattr(self, name)
            if not 0 <= value <= SEED_MASK:
                raise DomainError(f"{name} must be a 64-bit unsigned integer, got {value}")
        if any(tag < 0 for tag in self.path):
            raise DomainError("substream tags must be non-negative")

    def substream(self, tag: int) -> "RngHandle":
        """Returns the child stream `tag` of this stream."""
        return RngHandle(self.master_seed, self.stream_index, self.path + (int(tag),))

    def generator(self) -> np.random.Generator:
        """Returns a fresh Generator positioned at the start of this stream."""
        seed_seq = np.random.SeedSequence(entropy=self.master_seed,
                                          spawn_key=(self.stream_index, *self.path))
        return np.random.Generator(np.random.PCG64(seed_seq))


@dataclass(frozen=True)
class WeibullSpec:
    """
    Symmetric Weibull weight law with P(|W| > t) = exp(-t**alpha), optionally conditioned on
    |W| > threshold.
    """
    alpha: float
    threshold: float | None = None

    def __post_init__(self):
        if not (math.isfinite(self.alpha) and self.alpha > 0):
            raise DomainError(f"alpha must be a positive real, got {self.alpha}")
        if self.threshold is not None and not (math.isfinite(self.threshold) and self.threshold >= 0):
            raise DomainError(f"threshold must be a finite real >= 0, got {self.threshold}")

    def survival(self, t: float) -> float:
        """Exact P(|W| > t) under this law."""
        tau = self.threshold or 0.0
        if t <= tau:
            return 1.0
        return math.exp(-(t ** self.alpha - tau ** self.alpha))


def _probability(p: float) -> float:
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"edge probability must lie in [0, 1], got {p}")
    return p


def sample_digraph(n: int, p: float, rng: RngHandle) -> DirectedNetwork:
    """
    Samples the indicator matrix of G(n, p) on ordered pairs, self-loops included.

    The n*n cells are scanned in row-major order with geometric gaps between successive
    present cells, so the cost is proportional to the number of edges.

    Args:
        n (int): Vertex count.
        p (float): Edge probability in [0, 1].
        rng (RngHandle): Stream to draw from.

    Returns:
        DirectedNetwork: 0/1 network.

    Raises:
        DomainError: If p is outside [0, 1] or n is not positive.
    """
    p = _probability(p)
    if n <= 0:
        raise DomainError(f"vertex count must be positive, got {n}")
    cells = n * n
    if p == 0.0:
        return DirectedNetwork.empty(n)
    if p == 1.0:
        positions = np.arange(cells, dtype=np.int64)
    else:
        gen = rng.generator()
        mean = p * cells
        batch = int(mean + 6.0 * math.sqrt(mean) + 64)
        chunks = []
        last = -1
        while last < cells:
            gaps = gen.geometric(p, size=batch)
            chunk = last + np.cumsum(gaps, dtype=np.int64)
            chunks.append(chunk)
            last = int(chunk[-1])
        positions = np.concatenate(chunks)
        positions = positions[positions < cells]
    rows, cols = np.divmod(positions, n)
    logger.debug("sampled G(%d, %.3g): %d edges", n, p, positions.size)
    # Row-major positions are already in canonical order.
    return DirectedNetwork(n, _readonly(rows), _readonly(cols), _readonly(np.ones(positions.size)))


def _readonly(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


def sample_weibull_array(spec: WeibullSpec, rng: RngHandle, size: int) -> np.ndarray:
    """
    Draws `size` independent weights by exact inverse transform.

    With E standard exponential, |W| = (tau**alpha + E)**(1/alpha) has survival
    exp(-(t**alpha - tau**alpha)) above tau, which is the law conditioned on |W| > tau
    (tau = 0 gives the unconditioned law). The sign is an independent fair coin.
    """
    gen = rng.generator()
    exponentials = gen.standard_exponential(size)
    signs = np.where(gen.random(size) < 0.5, -1.0, 1.0)
    tau = spec.threshold or 0.0
    magnitude = (tau ** spec.alpha + exponentials) ** (1.0 / spec.alpha)
    # Keep draws strictly above tau and away from an explicit zero weight.
    floor = np.nextafter(tau, np.inf) if tau > 0 else np.finfo(np.float64).tiny
    magnitude = np.maximum(magnitude, floor)
    return signs * magnitude


def sample_weibull(spec: WeibullSpec, rng: RngHandle) -> float:
    """Draws a single weight; the first draw of the stream `rng`."""
    return float(sample_weibull_array(spec, rng, 1)[0])


def attach_weights(x: DirectedNetwork, spec: WeibullSpec, rng: RngHandle) -> DirectedNetwork:
    """
    Forms Z = X (entrywise) Y by giving every entry of the indicator network x an independent
    weight from spec. The entry set is unchanged.

    Raises:
        DomainError: If x is not a 0/1 network.
    """
    if not x.is_indicator():
        raise DomainError("attach_weights expects a 0/1 indicator network")
    weights = sample_weibull_array(spec, rng, x.entry_count)
    return DirectedNetwork(x.n, x.rows, x.cols, _readonly(weights))


def truncate_split(z: DirectedNetwork, tau: float) -> tuple[DirectedNetwork, DirectedNetwork]:
    """
    Splits z into the entries with |w| > tau and those with |w| <= tau.

    Returns:
        tuple: (large part, small part). Their supports are disjoint and cover z.
    """
    if not tau >= 0:
        raise DomainError(f"truncation level must be >= 0, got {tau}")
    large = np.abs(z.weights) > tau
    return z.select(large), z.select(~large)


def truncation_level(n: int, alpha: float, epsilon: float) -> float:
    """Returns (epsilon * log log n) ** (1 / alpha), the large/small weight boundary."""
    if n < 16:
        raise DomainError(f"truncation level needs n >= 16, got {n}")
    if not (alpha > 0 and epsilon > 0):
        raise DomainError("alpha and epsilon must be positive")
    return (epsilon * math.log(math.log(n))) ** (1.0 / alpha)
