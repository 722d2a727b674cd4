"""
Largest singular values (operator norms) of networks.

Three engines: a dense cyclic-Jacobi oracle on the Gram matrix, a sparse power iteration on
v -> Z^T (Z v), and the closed form for weighted directed stars. A small subspace iteration
gives an approximate spectral radius for the sanity inequality rho(Z) <= ||Z||.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, asdict

import numpy as np

from config_manager import get_config
from exceptions import DomainError, NumericError, SizeError
from network_model import DirectedNetwork, Network, UndirectedNetwork, dense_matrix, minor
from random_generator import RngHandle

logger = logging.getLogger(__name__)

JACOBI_TOL = 1e-12
JACOBI_MAX_SWEEPS = 64
POWER_TOL = 1e-10
POWER_MAX_ITER = 10_000
# Relative change at which successive estimates only differ by rounding.
POWER_ROUNDOFF = 1e-14
RADIUS_TOL = 1e-6
RADIUS_MAX_ITER = 5_000
AUTO_DENSE_LIMIT = 200
# Above this many row-pair products the Gram matrix is formed in float64 by BLAS instead.
GRAM_PAIR_LIMIT = 20_000_000
ENGINES = ("dense", "power", "auto")


@dataclass(frozen=True)
class NormResult:
    """
    Outcome of a norm computation.

    Attributes:
        value (float): The computed largest singular value (or spectral radius).
        engine (str): dense, power, star or radius.
        iterations (int): Sweeps (dense) or iterations (power, radius).
        residual (float): Final off-diagonal ratio or relative change.
        converged (bool): Whether the tolerance was met.
        approximate (bool): True for the spectral-radius path.
    """
    value: float
    engine: str
    iterations: int
    residual: float
    converged: bool = True
    approximate: bool = False

    def to_dict(self) -> dict:
        return asdict(self)


def _as_directed(net: Network) -> DirectedNetwork:
    return net.to_directed() if isinstance(net, UndirectedNetwork) else net


def gram_matrix(net: Network, cap: int | None = None) -> np.ndarray:
    """
    Returns Z^T Z as a dense float64 matrix, accumulated in extended precision.

    Each row i of Z contributes the outer product of its nonzeros, so the work is the sum of
    squared row lengths.

    Raises:
        SizeError: If n exceeds the dense cap.
    """
    z = _as_directed(net)
    cap = get_config().dense_cap if cap is None else cap
    if z.n > cap:
        raise SizeError(f"n={z.n} exceeds the dense cap {cap}")
    lengths = np.bincount(z.rows, minlength=z.n)
    per_entry = lengths[z.rows]
    if int(np.sum(per_entry)) > GRAM_PAIR_LIMIT:
        logger.debug("Gram pair limit exceeded; forming Z^T Z in float64")
        matrix = dense_matrix(z, cap)
        return matrix.T @ matrix
    starts = np.concatenate([[0], np.cumsum(lengths)[:-1]])
    left = np.repeat(np.arange(z.entry_count), per_entry)
    group_start = np.repeat(np.cumsum(per_entry) - per_entry, per_entry)
    right = starts[z.rows[left]] + (np.arange(left.size) - group_start)
    gram = np.zeros((z.n, z.n), dtype=np.longdouble)
    weights = z.weights.astype(np.longdouble)
    np.add.at(gram, (z.cols[left], z.cols[right]), weights[left] * weights[right])
    return gram.astype(np.float64)


def _round_robin(size: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Circle-method schedule: size - 1 rounds of size / 2 disjoint pairs covering all pairs."""
    players = list(range(size))
    rounds = []
    for _ in range(size - 1):
        half = size // 2
        rounds.append((np.array(players[:half]), np.array(players[size - 1:half - 1:-1])))
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def jacobi_eigenvalues(matrix: np.ndarray, tol: float = JACOBI_TOL,
                       max_sweeps: int = JACOBI_MAX_SWEEPS) -> tuple[np.ndarray, int, float]:
    """
    Eigenvalues of a real symmetric matrix by parallel cyclic Jacobi sweeps.

    Each sweep visits every index pair once, in rounds of disjoint pairs whose rotations are
    applied together. Iteration stops when every off-diagonal magnitude is below
    tol * max|A|.

    Returns:
        tuple: (eigenvalues in no particular order, sweeps used, final off-diagonal ratio).

    Raises:
        NumericError: If max_sweeps sweeps do not reach the tolerance.
    """
    a = np.array(matrix, dtype=np.float64)
    n = a.shape[0]
    scale = float(np.abs(a).max()) if a.size else 0.0
    if n < 2 or scale == 0.0:
        return np.diag(a).copy(), 0, 0.0
    size = n + (n % 2)
    if size != n:
        a = np.pad(a, ((0, 1), (0, 1)))
    schedule = _round_robin(size)
    off_mask = ~np.eye(size, dtype=bool)

    def off_ratio() -> float:
        return float(np.abs(a[off_mask]).max()) / scale

    ratio = off_ratio()
    sweeps = 0
    while ratio >= tol:
        if sweeps == max_sweeps:
            raise NumericError(f"Jacobi did not converge in {max_sweeps} sweeps (off-diagonal ratio {ratio:.3e})")
        for p, q in schedule:
            apq = a[p, q]
            app, aqq = a[p, p], a[q, q]
            active = apq != 0
            theta = np.where(active, (aqq - app) / (2.0 * np.where(active, apq, 1.0)), 0.0)
            t = np.where(active, np.where(theta >= 0, 1.0, -1.0) / (np.abs(theta) + np.hypot(theta, 1.0)), 0.0)
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            row_p, row_q = a[p, :].copy(), a[q, :].copy()
            a[p, :] = c[:, None] * row_p - s[:, None] * row_q
            a[q, :] = s[:, None] * row_p + c[:, None] * row_q
            col_p, col_q = a[:, p].copy(), a[:, q].copy()
            a[:, p] = col_p * c[None, :] - col_q * s[None, :]
            a[:, q] = col_p * s[None, :] + col_q * c[None, :]
            a[p, q] = 0.0
            a[q, p] = 0.0
        sweeps += 1
        ratio = off_ratio()
    return np.diag(a)[:n].copy(), sweeps, ratio


def spectral_norm_dense(net: Network, cap: int | None = None) -> NormResult:
    """
    Largest singular value from the dense Gram matrix and Jacobi eigenvalues.

    Raises:
        SizeError: If n exceeds the dense cap.
        NumericError: If the Jacobi sweeps do not converge.
    """
    if net.weights.size == 0:
        return NormResult(0.0, "dense", 0, 0.0)
    eigenvalues, sweeps, ratio = jacobi_eigenvalues(gram_matrix(net, cap))
    value = math.sqrt(max(float(eigenvalues.max()), 0.0))
    return NormResult(value, "dense", sweeps, ratio)


def spectral_norm_power(net: Network, tol: float = POWER_TOL, max_iter: int = POWER_MAX_ITER,
                        rng: RngHandle | None = None) -> NormResult:
    """
    Largest singular value by power iteration on v -> Z^T (Z v) with sparse products.

    The estimate at each step is ||Z v|| for the current unit vector v, the square root of the
    Rayleigh quotient of Z^T Z. The estimates increase geometrically towards the norm, so with
    c the ratio of the last two relative changes the distance still to go is about
    change * c / (1 - c). Iteration stops once both the change and that remaining distance are
    below tol, or the change reaches rounding level. When max_iter is reached the last estimate
    is returned unconverged.

    Args:
        net (Network): Directed or undirected network.
        tol (float): Relative tolerance, positive.
        max_iter (int): Iteration cap.
        rng (RngHandle, optional): Stream for the start vector. Defaults to seed 0.

    Raises:
        DomainError: If tol <= 0 or max_iter < 1.
    """
    if not tol > 0:
        raise DomainError(f"tolerance must be positive, got {tol}")
    if max_iter < 1:
        raise DomainError(f"max_iter must be >= 1, got {max_iter}")
    if net.weights.size == 0 or not np.any(net.weights):
        return NormResult(0.0, "power", 0, 0.0)
    z = net.to_sparse()
    zt = z.T.tocsr()
    gen = (rng or RngHandle(0)).generator()
    v = gen.standard_normal(net.n)
    v /= np.linalg.norm(v)
    estimate = 0.0
    residual = math.inf
    previous = math.inf
    for iteration in range(1, max_iter + 1):
        image = z @ v
        sigma = float(np.linalg.norm(image))
        back = zt @ image
        back_norm = float(np.linalg.norm(back))
        if sigma == 0.0 or back_norm == 0.0:
            # Start vector fell in the kernel; restart from a fresh draw.
            v = gen.standard_normal(net.n)
            v /= np.linalg.norm(v)
            continue
        change = abs(sigma - estimate) / sigma
        estimate = sigma
        v = back / back_norm
        contraction = change / previous if previous > 0 else 0.0
        remaining = change * contraction / (1.0 - contraction) if contraction < 1.0 else math.inf
        residual = max(change, remaining)
        previous = change
        if change <= POWER_ROUNDOFF:
            return NormResult(estimate, "power", iteration, change)
        if residual < tol:
            return NormResult(estimate, "power", iteration, residual)
    logger.warning("power iteration unconverged after %d iterations (residual %.3e)", max_iter, residual)
    return NormResult(estimate, "power", max_iter, residual, converged=False)


def spectral_norm(net: Network, engine: str = "auto", tol: float = POWER_TOL,
                  max_iter: int = POWER_MAX_ITER, rng: RngHandle | None = None) -> NormResult:
    """
    Dispatches to an engine. auto picks dense for n <= 200 within the dense cap, power otherwise.
    """
    if engine not in ENGINES:
        raise DomainError(f"unknown engine {engine!r}; choose from {', '.join(ENGINES)}")
    if engine == "auto":
        engine = "dense" if net.n <= min(AUTO_DENSE_LIMIT, get_config().dense_cap) else "power"
    if engine == "dense":
        return spectral_norm_dense(net)
    return spectral_norm_power(net, tol, max_iter, rng)


def directed_star_norm(out_weights, in_weights) -> float:
    """
    Norm of a weighted directed star: sqrt(max(sum a_i^2, sum b_i^2)) for out-weights a and
    in-weights b at the hub.
    """
    a = np.asarray(out_weights, dtype=np.float64)
    b = np.asarray(in_weights, dtype=np.float64)
    return math.sqrt(max(float(np.dot(a, a)), float(np.dot(b, b))))


def directed_star(out_weights, in_weights) -> DirectedNetwork:
    """Builds the star with hub 0, out-leaves 1..p and in-leaves p+1..p+q."""
    a, b = list(out_weights), list(in_weights)
    entries = [(0, i + 1, w) for i, w in enumerate(a)]
    entries += [(len(a) + j + 1, 0, w) for j, w in enumerate(b)]
    return DirectedNetwork.from_entries(len(a) + len(b) + 1, entries)


def spectral_radius_dense(net: Network, cap: int | None = None, rng: RngHandle | None = None,
                          tol: float = RADIUS_TOL, max_iter: int = RADIUS_MAX_ITER) -> NormResult:
    """
    Approximate largest eigenvalue modulus.

    Runs a two-column orthogonal subspace iteration so that a complex-conjugate dominant pair
    is captured in real arithmetic, and reads the moduli off the 2 x 2 projection Q^T Z Q.
    The estimate never exceeds ||Z||. The result is always flagged approximate.

    Raises:
        SizeError: If n exceeds the radius cap.
    """
    cap = get_config().radius_cap if cap is None else cap
    if net.n > cap:
        raise SizeError(f"n={net.n} exceeds the spectral radius cap {cap}")
    if net.weights.size == 0:
        return NormResult(0.0, "radius", 0, 0.0, approximate=True)
    matrix = dense_matrix(net, cap)
    gen = (rng or RngHandle(0)).generator()
    q, _ = np.linalg.qr(gen.standard_normal((net.n, min(2, net.n))))
    estimate = math.inf
    residual = math.inf
    for iteration in range(1, max_iter + 1):
        q, _ = np.linalg.qr(matrix @ q)
        projected = q.T @ matrix @ q
        rho = float(np.abs(np.linalg.eigvals(projected)).max())
        residual = abs(rho - estimate) / rho if rho > 0 else (0.0 if estimate == 0 else math.inf)
        estimate = rho
        if residual < tol:
            return NormResult(estimate, "radius", iteration, residual, approximate=True)
    logger.debug("spectral radius iteration unconverged (residual %.3e)", residual)
    return NormResult(estimate, "radius", max_iter, residual, converged=False, approximate=True)


@dataclass(frozen=True)
class SandwichResult:
    """Norms of the inner square minor, the rectangular block and its square container."""
    rows: int
    cols: int
    inner: float
    block: float
    container: float

    @property
    def holds(self) -> bool:
        slack = 1e-9 * max(self.container, 1.0)
        return self.inner <= self.block + slack and self.block <= self.container + slack

    def to_dict(self) -> dict:
        return {**asdict(self), "holds": self.holds}


def rectangular_sandwich(net: DirectedNetwork, rows: int, cols: int) -> SandwichResult:
    """
    Brackets the norm of the top-left rows x cols block between the min(rows, cols) square
    minor and the max(rows, cols) square container.

    Raises:
        DomainError: If the block does not fit in the network.
    """
    if not (1 <= rows <= net.n and 1 <= cols <= net.n):
        raise DomainError(f"block {rows}x{cols} does not fit in n={net.n}")
    small, large = min(rows, cols), max(rows, cols)
    inner = spectral_norm_dense(minor(net, range(small), range(small))).value
    block = spectral_norm_dense(minor(net, range(rows), range(cols))).value
    container = spectral_norm_dense(minor(net, range(large), range(large))).value
    return SandwichResult(rows, cols, inner, block, container)
