"""
Event indicators on sampled networks.

A census measures every quantity behind the structural events (maximum degree, component
sizes and excess, star decomposition, degree level sets, edge count, self-loops per
component) and compares each one with its threshold. Flags are keyed by short event names:

    D  max degree of the symmetrized large-weight support <= (1 + delta1) t_n
    C  largest component <= (1 + delta2) / epsilon * t_n
    E  largest component excess <= delta3
    W  greedy star decomposition at g(kappa) leaves a remainder of degree < g(kappa)
    P  |D_{i kappa}| <= n^(1 - i kappa + kappa) for i = 0..m
    L  |D_{1 + kappa}| <= (1 + delta)^2 / kappa
    R  max degree < g(1 + kappa)
    M  |E(X)| >= d n / 2
    F  every component has fewer than delta4 self-loops
    B  ||X|| <= (1 + delta) sqrt(log n / log log n)   (optional, needs a norm)
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, asdict, field

from exceptions import DomainError
from graph_transforms import star_decompose, symmetrize
from network_model import DirectedNetwork
from network_stats import components, degree_level_sets, degree_profile, degree_scale, degree_threshold
from random_generator import RngHandle, truncate_split, truncation_level
from spectral_engine import spectral_norm_power

logger = logging.getLogger(__name__)

EVENTS = ("D", "C", "E", "W", "P", "L", "R", "M", "F")
DEFAULT_KAPPA = 0.5
NORM_TOL = 1e-8
NORM_MAX_ITER = 5_000


@dataclass(frozen=True)
class CensusParams:
    """
    Thresholds for an event census. Unset delta1..delta4 default to (1+delta)^2 - 1 for the
    first three and 1 + (1+delta)^2 for delta4.
    """
    d: float
    alpha: float
    delta: float
    epsilon: float | None = None
    kappa: float = DEFAULT_KAPPA
    delta1: float | None = None
    delta2: float | None = None
    delta3: float | None = None
    delta4: float | None = None

    def __post_init__(self):
        if not self.d >= 0:
            raise DomainError(f"d must be non-negative, got {self.d}")
        if not self.alpha > 0:
            raise DomainError(f"alpha must be positive, got {self.alpha}")
        if not self.delta >= 0:
            raise DomainError(f"delta must be non-negative, got {self.delta}")
        if self.epsilon is not None and not self.epsilon > 0:
            raise DomainError(f"epsilon must be positive, got {self.epsilon}")
        if not 0 < self.kappa < 1:
            raise DomainError(f"kappa must lie in (0, 1), got {self.kappa}")
        growth = (1 + self.delta) ** 2
        for name, default in (("delta1", growth - 1), ("delta2", growth - 1),
                              ("delta3", growth - 1), ("delta4", 1 + growth)):
            if getattr(self, name) is None:
                object.__setattr__(self, name, default)
            elif not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive, got {getattr(self, name)}")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class EventCensus:
    """Flags plus every measured quantity and threshold behind them."""
    n: int
    params: CensusParams
    t_n: float
    truncation: float | None
    edge_count: int
    large_edge_count: int
    d1: int
    max_component: int
    max_excess: int
    star_threshold: int
    star_count: int
    remainder_d1: int
    level_thresholds: tuple[int, ...]
    level_counts: tuple[int, ...]
    level_bounds: tuple[float, ...]
    top_threshold: int
    top_count: int
    max_component_loops: int
    norm: float | None
    flags: dict[str, bool] = field(default_factory=dict)

    def to_dict(self) -> dict:
        data = asdict(self)
        data["params"] = self.params.to_dict()
        for key in ("level_thresholds", "level_counts", "level_bounds"):
            data[key] = list(data[key])
        return data


def event_census(x: DirectedNetwork, params: CensusParams, rng: RngHandle | None = None,
                 with_norm: bool = False) -> EventCensus:
    """
    Evaluates every event on x.

    If x carries weights and params.epsilon is set, the large-weight part (|w| above
    (epsilon log log n)^(1/alpha)) is analysed; otherwise the whole support is. M and B always
    use the full support X.

    Args:
        x (DirectedNetwork): Indicator or weighted network, n >= 16.
        params (CensusParams): Thresholds.
        rng (RngHandle, optional): Start-vector stream for the B norm.
        with_norm (bool): Whether to evaluate B (costs one power iteration).

    Returns:
        EventCensus: Flags and measurements.

    Raises:
        DomainError: If n < 16.
    """
    n = x.n
    t_n = degree_scale(n)
    support = x.indicator()
    truncation = None
    large = support
    if params.epsilon is not None and not x.is_indicator():
        truncation = truncation_level(n, params.alpha, params.epsilon)
        large = truncate_split(x, truncation)[0].indicator()
    symmetric = symmetrize(large)
    epsilon = params.epsilon or 1.0

    d1 = degree_profile(symmetric).d1
    stats = components(large)
    max_component = max(c.vertex_count for c in stats)
    max_excess = max(c.excess for c in stats)
    max_loops = max(c.self_loop_count for c in stats)

    star_threshold = degree_threshold(params.kappa, n)
    decomposition = star_decompose(symmetric, max(star_threshold, 1))
    levels = degree_level_sets(symmetric, params.kappa, n)
    level_bounds = tuple(n ** (1 - i * params.kappa + params.kappa) for i in range(len(levels.counts)))

    growth = (1 + params.delta) ** 2
    flags = {
        "D": d1 <= (1 + params.delta1) * t_n,
        "C": max_component <= (1 + params.delta2) / epsilon * t_n,
        "E": max_excess <= params.delta3,
        "W": decomposition.success,
        "P": all(count <= bound for count, bound in zip(levels.counts, level_bounds)),
        "L": levels.top_count <= growth / params.kappa,
        "R": d1 < levels.top_threshold,
        "M": support.entry_count >= params.d * n / 2,
        "F": max_loops < params.delta4,
    }
    norm = None
    if with_norm:
        norm = spectral_norm_power(support, NORM_TOL, NORM_MAX_ITER, rng).value
        flags["B"] = norm <= (1 + params.delta) * math.sqrt(math.log(n) / math.log(math.log(n)))
    logger.debug("census n=%d: %s", n, "".join(k for k, ok in flags.items() if not ok) or "all hold")
    return EventCensus(
        n=n, params=params, t_n=t_n, truncation=truncation,
        edge_count=support.entry_count, large_edge_count=large.entry_count,
        d1=d1, max_component=max_component, max_excess=max_excess,
        star_threshold=star_threshold, star_count=len(decomposition.stars),
        remainder_d1=degree_profile(decomposition.remainder).d1,
        level_thresholds=levels.thresholds, level_counts=levels.counts, level_bounds=level_bounds,
        top_threshold=levels.top_threshold, top_count=levels.top_count,
        max_component_loops=max_loops, norm=norm, flags=flags,
    )
