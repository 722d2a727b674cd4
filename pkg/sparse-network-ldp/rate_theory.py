"""
Closed-form quantities for the largest singular value of sparse Weibull networks: typical
values, tail rate functions, the variational functions phi and psi, the heavy-tail exponent
f, and the entropy and binomial tail estimates they rest on.
"""
from __future__ import annotations

import logging
import math
from functools import lru_cache
from dataclasses import dataclass, asdict

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import gammaln, logsumexp, xlogy

from exceptions import DomainError
from random_generator import RngHandle

logger = logging.getLogger(__name__)

LIGHT = "light"
HEAVY = "heavy"
UPPER = "upper"
LOWER = "lower"

PHI_STARTS = 50
PHI_STEPS = 4000
PHI_TOLERANCE = 1e-6
PHI_SEED = 0x5EED
EXACT_TAIL_MAX_M = 10_000
LATTICE_TOL = 1e-12
ENTROPY_CONSTANT = 0.05


def regime(alpha: float) -> str:
    """light for alpha > 2, heavy for 0 < alpha <= 2."""
    if not alpha > 0:
        raise DomainError(f"alpha must be positive, got {alpha}")
    return LIGHT if alpha > 2 else HEAVY


def holder_conjugate(alpha: float) -> float:
    """beta = alpha / (alpha - 1), so that (1 - alpha)(1 - beta) = 1."""
    if not alpha > 1:
        raise DomainError(f"the Hoelder conjugate needs alpha > 1, got {alpha}")
    return alpha / (alpha - 1)


def _require_light(alpha: float) -> None:
    if not alpha > 2:
        raise DomainError(f"light-tailed formula needs alpha > 2, got {alpha}")


def b_alpha(alpha: float) -> float:
    """Light-tailed constant 2^(1/a) a^(-1/2) (a - 2)^(1/2 - 1/a)."""
    _require_light(alpha)
    return 2 ** (1 / alpha) * alpha ** -0.5 * (alpha - 2) ** (0.5 - 1 / alpha)


def b_alpha_appendix(alpha: float) -> float:
    """The same constant written as (2/a)^(1/a) (1 - 2/a)^(1/2 - 1/a)."""
    _require_light(alpha)
    return (2 / alpha) ** (1 / alpha) * (1 - 2 / alpha) ** (0.5 - 1 / alpha)


def lambda_light(n: float, alpha: float) -> float:
    """
    Typical norm for alpha > 2: B_alpha (log n)^(1/2) / (log log n)^(1/2 - 1/alpha).

    Raises:
        DomainError: If alpha <= 2 or n < 3.
    """
    _require_light(alpha)
    if n < 3:
        raise DomainError(f"lambda_light needs n >= 3, got {n}")
    log_n = math.log(n)
    return b_alpha(alpha) * math.sqrt(log_n) / math.log(log_n) ** (0.5 - 1 / alpha)


def lambda_heavy(n: float, alpha: float) -> float:
    """
    Typical norm for 0 < alpha <= 2: (log n)^(1/alpha).

    Raises:
        DomainError: If alpha is outside (0, 2] or n <= 1.
    """
    if not 0 < alpha <= 2:
        raise DomainError(f"heavy-tailed formula needs 0 < alpha <= 2, got {alpha}")
    if not n > 1:
        raise DomainError(f"lambda_heavy needs n > 1, got {n}")
    return math.log(n) ** (1 / alpha)


def typical_value(n: float, alpha: float) -> float:
    return lambda_light(n, alpha) if regime(alpha) == LIGHT else lambda_heavy(n, alpha)


@dataclass(frozen=True)
class RateQuery:
    """
    Parameter bundle for the closed-form evaluations.

    Attributes:
        alpha (float): Weibull shape, positive.
        delta (float): Deviation, greater than -1.
        n (int, optional): Size, at least 3 when given.
        epsilon (float, optional): Truncation parameter, positive.
        kappa (float, optional): Level-set grid step, positive.
    """
    alpha: float
    delta: float
    n: int | None = None
    epsilon: float | None = None
    kappa: float | None = None

    def __post_init__(self):
        if not (math.isfinite(self.alpha) and self.alpha > 0):
            raise DomainError(f"alpha must be positive, got {self.alpha}")
        if not (math.isfinite(self.delta) and self.delta > -1):
            raise DomainError(f"delta must exceed -1, got {self.delta}")
        if self.n is not None and self.n < 3:
            raise DomainError(f"n must be at least 3, got {self.n}")
        for name in ("epsilon", "kappa"):
            value = getattr(self, name)
            if value is not None and not value > 0:
                raise DomainError(f"{name} must be positive, got {value}")

    @property
    def regime(self) -> str:
        return regime(self.alpha)

    @property
    def beta(self) -> float:
        return holder_conjugate(self.alpha)


@dataclass(frozen=True)
class RateValue:
    value: float
    regime: str
    tail: str

    def to_dict(self) -> dict:
        return asdict(self)


def rate(query: RateQuery, tail: str) -> RateValue:
    """
    Tail rate of ||Z|| on the log n scale.

    light upper (1+d)^2 - 1, light lower 1 - (1-d)^2, heavy upper (1+d)^a - 1,
    heavy lower 1 - (1-d)^a. The upper tail needs d >= 0 and the lower tail 0 < d < 1.

    Raises:
        DomainError: On an unknown tail or delta out of range for it.
    """
    delta = query.delta
    exponent = 2.0 if query.regime == LIGHT else query.alpha
    if tail == UPPER:
        if delta < 0:
            raise DomainError(f"upper tail needs delta >= 0, got {delta}")
        value = (1 + delta) ** exponent - 1
    elif tail == LOWER:
        if not 0 < delta < 1:
            raise DomainError(f"lower tail needs 0 < delta < 1, got {delta}")
        value = 1 - (1 - delta) ** exponent
    else:
        raise DomainError(f"tail must be {UPPER!r} or {LOWER!r}, got {tail!r}")
    return RateValue(value, query.regime, tail)


@dataclass(frozen=True)
class PhiResult:
    """
    phi_theta(k) with its two estimates. disagreement is set when the local search beats the
    uniform-support candidates by more than the tolerance.
    """
    theta: float
    k: int
    value: float
    candidate_value: float
    candidate_support: int
    search_value: float
    disagreement: bool

    def to_dict(self) -> dict:
        return asdict(self)


def phi_objective(v: np.ndarray, theta: float) -> np.ndarray:
    """sum_{i != j} v_i^theta v_j^theta along the last axis."""
    powered = np.power(v, theta)
    return powered.sum(axis=-1) ** 2 - np.power(v, 2 * theta).sum(axis=-1)


def project_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection of each row onto the probability simplex."""
    k = v.shape[-1]
    ordered = -np.sort(-v, axis=-1)
    cumulative = np.cumsum(ordered, axis=-1) - 1.0
    ranks = np.arange(1, k + 1)
    positive = ordered - cumulative / ranks > 0
    last = k - 1 - np.argmax(positive[..., ::-1], axis=-1)
    shift = np.take_along_axis(cumulative, last[..., None], axis=-1) / (last[..., None] + 1)
    return np.maximum(v - shift, 0.0)


def _phi_search(theta: float, k: int) -> float:
    gen = RngHandle(PHI_SEED, k).generator()
    starts = np.zeros((PHI_STARTS, k))
    for row in starts:
        size = int(gen.integers(2, k + 1))
        support = gen.choice(k, size=size, replace=False)
        row[support] = gen.dirichlet(np.ones(size))
    v = starts
    value = phi_objective(v, theta)
    step = np.full(PHI_STARTS, 0.5 / theta)
    for _ in range(PHI_STEPS):
        s = np.power(v, theta).sum(axis=-1, keepdims=True)
        grad = 2 * theta * (np.power(v, theta - 1) * s - np.power(v, 2 * theta - 1))
        trial = project_simplex(v + step[:, None] * grad)
        trial_value = phi_objective(trial, theta)
        better = trial_value > value
        v = np.where(better[:, None], trial, v)
        value = np.where(better, trial_value, value)
        step = np.where(better, np.minimum(step * 1.2, 1.0), step * 0.5)
        if np.all(step < 1e-14):
            break
    return float(value.max())


@lru_cache(maxsize=256)
def phi(theta: float, k: int) -> PhiResult:
    """
    phi_theta(k) = sup over the simplex in R^k of sum_{i != j} v_i^theta v_j^theta.

    The uniform vector on m coordinates gives m(m-1) m^(-2 theta); the best m in 2..k is
    cross-checked by projected gradient ascent from random simplex starts and the larger value
    is returned.

    Raises:
        DomainError: If theta < 1 or k < 2.
    """
    if not theta >= 1:
        raise DomainError(f"theta must be >= 1, got {theta}")
    if k < 2 or int(k) != k:
        raise DomainError(f"k must be an integer >= 2, got {k}")
    k = int(k)
    sizes = np.arange(2, k + 1)
    candidates = sizes * (sizes - 1) * np.power(sizes, -2.0 * theta)
    best = int(np.argmax(candidates))
    candidate = float(candidates[best])
    search = _phi_search(theta, k)
    disagreement = search - candidate > PHI_TOLERANCE
    if disagreement:
        logger.warning("phi_%g(%d): local search %.9g beats uniform candidates %.9g",
                       theta, k, search, candidate)
    return PhiResult(theta, k, max(candidate, search), candidate, int(sizes[best]), search, disagreement)


def _require_psi_domain(alpha: float, delta: float) -> None:
    if not 1 < alpha <= 2:
        raise DomainError(f"psi needs 1 < alpha <= 2, got {alpha}")
    if not delta > 0:
        raise DomainError(f"psi needs delta > 0, got {delta}")


def psi(alpha: float, delta: float, k: int) -> float:
    """psi(k) = k(k-3)/2 + (1/2)(1+delta)^alpha phi_{beta/2}(k)^(1-alpha)."""
    _require_psi_domain(alpha, delta)
    beta = holder_conjugate(alpha)
    phi_value = phi(beta / 2, k).value
    return k * (k - 3) / 2 + 0.5 * (1 + delta) ** alpha * phi_value ** (1 - alpha)


def psi_min(alpha: float, delta: float, k_max: int) -> tuple[int, float]:
    """Scans k = 2..k_max and returns (argmin, min) of psi."""
    _require_psi_domain(alpha, delta)
    if k_max < 2:
        raise DomainError(f"k_max must be >= 2, got {k_max}")
    values = [(psi(alpha, delta, k), k) for k in range(2, k_max + 1)]
    value, k_star = min(values)
    return k_star, value


def _f_coefficient(alpha: float) -> float:
    return (2 / (alpha - 2)) * (1 - 2 / alpha) ** (alpha / 2)


def f_rate(alpha: float, rho: float, x: float) -> float:
    """f(x) = 1 - x - (1+rho)^a (2/(a-2)) (1-2/a)^(a/2) x^(1-a/2), for a > 2 and x > 0."""
    _require_light(alpha)
    if not x > 0:
        raise DomainError(f"x must be positive, got {x}")
    if not rho > -1:
        raise DomainError(f"rho must exceed -1, got {rho}")
    return 1 - x - (1 + rho) ** alpha * _f_coefficient(alpha) * x ** (1 - alpha / 2)


@dataclass(frozen=True)
class FMaxResult:
    gamma: float
    value: float
    numeric_gamma: float
    numeric_value: float

    def to_dict(self) -> dict:
        return asdict(self)


def gamma_params(alpha: float, delta: float) -> tuple[float, float]:
    """((1+delta)^2 (1-2/alpha), (1-delta)^2 (1-2/alpha)) for alpha > 2."""
    _require_light(alpha)
    return (1 + delta) ** 2 * (1 - 2 / alpha), (1 - delta) ** 2 * (1 - 2 / alpha)


def f_max(alpha: float, rho: float) -> FMaxResult:
    """
    Maximum of f over x > 0: value 1 - (1+rho)^2 at gamma = (1+rho)^2 (1 - 2/alpha), checked by
    a golden-section search over log x.
    """
    gamma = gamma_params(alpha, rho)[0]
    centre = math.log(gamma)
    found = minimize_scalar(lambda y: -f_rate(alpha, rho, math.exp(y)), method="golden",
                            bracket=(centre - 2.0, centre + 0.1, centre + 2.0), tol=1e-12)
    numeric_gamma = math.exp(found.x)
    return FMaxResult(gamma, 1 - (1 + rho) ** 2, numeric_gamma, f_rate(alpha, rho, numeric_gamma))


def weibull_sum_exponent(alpha: float, d: float, b: float, epsilon: float = 0.0,
                         conditioned: bool = False) -> float:
    """
    Exponent d^a (2/(a-2)) (1-2/a)^(a/2) b^(1-a/2) of a Weibull sum tail, minus b * epsilon
    for summands conditioned above the truncation level.
    """
    _require_light(alpha)
    if not (d > 0 and b > 0):
        raise DomainError("d and b must be positive")
    exponent = d ** alpha * _f_coefficient(alpha) * b ** (1 - alpha / 2)
    return exponent - b * epsilon if conditioned else exponent


def relative_entropy(p, q):
    """
    Bernoulli relative entropy I_p(q) = q log(q/p) + (1-q) log((1-q)/(1-p)).

    Continuous at q in {0, 1}. Accepts scalars or arrays.

    Raises:
        DomainError: If p is outside (0, 1) or q outside [0, 1].
    """
    p_arr = np.asarray(p, dtype=np.float64)
    q_arr = np.asarray(q, dtype=np.float64)
    if np.any((p_arr <= 0) | (p_arr >= 1)):
        raise DomainError("p must lie in (0, 1)")
    if np.any((q_arr < 0) | (q_arr > 1)):
        raise DomainError("q must lie in [0, 1]")
    value = xlogy(q_arr, q_arr / p_arr) + xlogy(1 - q_arr, (1 - q_arr) / (1 - p_arr))
    return float(value) if value.ndim == 0 else value


@dataclass(frozen=True)
class EntropyCertificate:
    constant: float
    minimum_ratio: float
    argmin_p: float
    argmin_q: float

    @property
    def holds(self) -> bool:
        return self.minimum_ratio >= self.constant

    def to_dict(self) -> dict:
        return {**asdict(self), "holds": self.holds}


def certify_entropy_constant(c: float = ENTROPY_CONSTANT, p_grid=None, fractions=None) -> EntropyCertificate:
    """
    Certifies I_p(q) >= c p on a grid of p in (0, 1/2] and q = fraction * p, fraction <= 1/2.
    """
    p_values = np.linspace(1e-3, 0.5, 500) if p_grid is None else np.asarray(p_grid, dtype=np.float64)
    fraction_values = np.linspace(0.0, 0.5, 51) if fractions is None else np.asarray(fractions, dtype=np.float64)
    if np.any(fraction_values > 0.5) or np.any(fraction_values < 0):
        raise DomainError("fractions must lie in [0, 1/2]")
    p_mesh, f_mesh = np.meshgrid(p_values, fraction_values)
    ratio = relative_entropy(p_mesh, f_mesh * p_mesh) / p_mesh
    index = np.unravel_index(np.argmin(ratio), ratio.shape)
    return EntropyCertificate(c, float(ratio[index]), float(p_mesh[index]), float(f_mesh[index] * p_mesh[index]))


def _check_binomial(m: int, q: float) -> None:
    if m < 1 or int(m) != m:
        raise DomainError(f"m must be a positive integer, got {m}")
    if not 0 < q < 1:
        raise DomainError(f"q must lie in (0, 1), got {q}")


def _side(q: float, theta: float, side: str | None) -> str:
    if not 0 < theta < 1:
        raise DomainError(f"theta must lie in (0, 1), got {theta}")
    natural = UPPER if theta > q else LOWER if theta < q else None
    if side is None:
        if natural is None:
            raise DomainError("theta equals q; pass side explicitly")
        return natural
    if side not in (UPPER, LOWER):
        raise DomainError(f"side must be {UPPER!r} or {LOWER!r}, got {side!r}")
    if natural is not None and natural != side:
        raise DomainError(f"theta={theta} lies on the wrong side of q={q} for the {side} tail")
    return side


def binomial_tail_bounds(m: int, q: float, theta: float, side: str | None = None) -> tuple[float, float]:
    """
    Sandwich e^{-m I_q(theta)} / sqrt(8 m theta (1-theta)) <= P <= e^{-m I_q(theta)} for
    P(Binom(m, q) >= m theta) (theta > q) or P(Binom(m, q) <= m theta) (theta < q).

    The lower bound applies when m * theta is an integer.

    Raises:
        DomainError: If theta lies on the wrong side of q for the requested tail.
    """
    _check_binomial(m, q)
    _side(q, theta, side)
    upper = math.exp(-m * relative_entropy(q, theta))
    return upper / math.sqrt(8 * m * theta * (1 - theta)), upper


def binomial_log_pmf(m: int, q: float, j: np.ndarray) -> np.ndarray:
    j = np.asarray(j, dtype=np.float64)
    return (gammaln(m + 1) - gammaln(j + 1) - gammaln(m - j + 1)
            + xlogy(j, q) + xlogy(m - j, 1 - q))


def binomial_log_sf(m: int, q: float, k: int) -> float:
    """log P(Binom(m, q) >= k), by log-sum-exp over the mass function."""
    _check_binomial(m, q)
    if k <= 0:
        return 0.0
    if k > m:
        return -math.inf
    return float(logsumexp(binomial_log_pmf(m, q, np.arange(k, m + 1))))


def binomial_exact_tail(m: int, q: float, theta: float, side: str | None = None) -> float:
    """
    Exact P(Binom(m, q) >= m theta) or P(Binom(m, q) <= m theta) by compensated summation.

    Raises:
        DomainError: If m exceeds 10^4 or theta lies on the wrong side of q.
    """
    _check_binomial(m, q)
    side = _side(q, theta, side)
    if m > EXACT_TAIL_MAX_M:
        raise DomainError(f"exact tail needs m <= {EXACT_TAIL_MAX_M}, got {m}")
    if side == UPPER:
        counts = np.arange(math.ceil(m * theta - LATTICE_TOL), m + 1)
    else:
        counts = np.arange(0, math.floor(m * theta + LATTICE_TOL) + 1)
    return math.fsum(np.exp(binomial_log_pmf(m, q, counts)))


def binomial_loglog_exponent(n: float, a: float, d: float, delta: float) -> float:
    """
    -log P(Binom(floor(a t_n), d/n) >= delta) / log n with t_n = log n / log log n.

    Raises:
        DomainError: If n < 16, d/n is not a probability, or the trial count is zero.
    """
    if n < 16:
        raise DomainError(f"n must be at least 16, got {n}")
    log_n = math.log(n)
    trials = math.floor(a * log_n / math.log(log_n))
    if trials < 1:
        raise DomainError("a * t_n must be at least 1")
    log_tail = binomial_log_sf(trials, d / n, math.ceil(delta))
    return -log_tail / log_n
