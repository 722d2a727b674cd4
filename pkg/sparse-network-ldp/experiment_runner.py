"""
Seeded Monte Carlo harness.

Every trial draws from its own stream RngHandle(master_seed, (n_position << 32) | trial), with
substreams 0 (graph), 1 (weights) and 2 (power-iteration start). Trial results therefore do not
depend on the number of worker processes, and reports are sorted by (n, trial) before any
aggregation.
"""
from __future__ import annotations

import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, asdict, field, fields
from functools import partial
from pathlib import Path

import numpy as np
import pandas as pd
from scipy.stats import linregress, t as student_t
from tqdm import tqdm

from config_manager import get_config
from event_census import EVENTS, CensusParams, event_census
from exceptions import DomainError, NumericError, ReportIOError
from random_generator import RngHandle, WeibullSpec, attach_weights, sample_digraph
from rate_theory import HEAVY, LIGHT, LOWER, UPPER, RateQuery, rate, regime, typical_value
from spectral_engine import spectral_norm_power

logger = logging.getLogger(__name__)

KINDS = ("lln", "upper-tail", "lower-tail", "census")
MIN_HITS_FOR_REGRESSION = 5
MAX_UNCONVERGED_FRACTION = 0.01
NEAR_THRESHOLD_FACTOR = 10.0
CONFIDENCE = 0.95
DEFAULT_LOWER_DELTAS = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)


@dataclass(frozen=True)
class ExperimentConfig:
    """
    Description of a seeded Monte Carlo run.

    Attributes:
        kind (str): lln, upper-tail, lower-tail or census.
        alpha (float): Weibull shape.
        d (float): Mean degree; edges appear with probability d / n.
        n_list (tuple[int, ...]): Strictly increasing sizes, each at least 16.
        trials (int): Trials per size.
        master_seed (int): Experiment seed.
        tol (float): Power-iteration relative tolerance.
        max_iter (int): Power-iteration cap.
        delta (float): Deviation for the tail runs and the census thresholds.
        epsilon (float, optional): Truncation parameter for the census.
        kappa (float): Level-set grid step for the census.
        lower_deltas (tuple[float, ...]): Deviations swept by the lower-tail run.
        workers (int): Worker processes; 1 runs in-process.
    """
    kind: str
    alpha: float
    d: float
    n_list: tuple[int, ...]
    trials: int
    master_seed: int = 0
    tol: float = 1e-6
    max_iter: int = 5_000
    delta: float = 0.5
    epsilon: float | None = None
    kappa: float = 0.5
    lower_deltas: tuple[float, ...] = DEFAULT_LOWER_DELTAS
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "n_list", tuple(int(n) for n in self.n_list))
        object.__setattr__(self, "lower_deltas", tuple(float(x) for x in self.lower_deltas))
        if self.kind not in KINDS:
            raise DomainError(f"unknown experiment kind {self.kind!r}; choose from {', '.join(KINDS)}")
        if self.trials < 1:
            raise DomainError(f"trials must be >= 1, got {self.trials}")
        if not self.n_list:
            raise DomainError("n_list must not be empty")
        if any(b <= a for a, b in zip(self.n_list, self.n_list[1:])):
            raise DomainError(f"n_list must be strictly increasing, got {list(self.n_list)}")
        if self.n_list[0] < 16:
            raise DomainError(f"every n must be at least 16, got {self.n_list[0]}")
        if not self.alpha > 0:
            raise DomainError(f"alpha must be positive, got {self.alpha}")
        if not 0 <= self.d <= self.n_list[0]:
            raise DomainError(f"d must lie in [0, n] for every n, got d={self.d}")
        if not self.tol > 0 or self.max_iter < 1:
            raise DomainError("tol must be positive and max_iter at least 1")
        if self.workers < 1:
            raise DomainError(f"workers must be >= 1, got {self.workers}")
        if len(self.n_list) > 1 << 31 or self.trials > 1 << 32:
            raise DomainError("too many sizes or trials for the stream layout")

    def stream(self, n_position: int, trial: int) -> RngHandle:
        return RngHandle(self.master_seed, (n_position << 32) | trial)

    def to_dict(self) -> dict:
        data = asdict(self)
        data["n_list"] = list(self.n_list)
        data["lower_deltas"] = list(self.lower_deltas)
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise DomainError(f"unknown config keys: {', '.join(sorted(unknown))}")
        return cls(**data)

    @classmethod
    def from_json_file(cls, path) -> "ExperimentConfig":
        path = Path(path)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError as e:
            raise ReportIOError(path, "no such file") from e
        except OSError as e:
            raise ReportIOError(path, e.strerror or str(e)) from e
        except json.JSONDecodeError as e:
            raise DomainError(f"{path}: invalid JSON ({e.msg} at line {e.lineno})") from None
        if not isinstance(data, dict):
            raise DomainError(f"{path}: expected a JSON object")
        return cls.from_dict(data)


@dataclass(frozen=True)
class NormTrial:
    n: int
    trial: int
    norm: float
    typical: float
    converged: bool
    residual: float
    max_entry: float

    @property
    def ratio(self) -> float:
        return self.norm / self.typical


def _sample_network(cfg: ExperimentConfig, n_position: int, n: int, trial: int, weighted: bool = True):
    handle = cfg.stream(n_position, trial)
    x = sample_digraph(n, cfg.d / n, handle.substream(0))
    if not weighted:
        return handle, x
    return handle, attach_weights(x, WeibullSpec(cfg.alpha), handle.substream(1))


def norm_trial(cfg: ExperimentConfig, task: tuple[int, int, int]) -> NormTrial:
    """One trial: sample Z, compute ||Z|| with the power engine."""
    n_position, n, trial = task
    handle, z = _sample_network(cfg, n_position, n, trial)
    result = spectral_norm_power(z, cfg.tol, cfg.max_iter, handle.substream(2))
    return NormTrial(n, trial, result.value, typical_value(n, cfg.alpha), result.converged,
                     result.residual, z.max_abs_weight())


def census_trial(cfg: ExperimentConfig, task: tuple[int, int, int]) -> tuple[int, int, dict[str, bool]]:
    """One trial: sample X (and weights if truncating) and evaluate the events."""
    n_position, n, trial = task
    _, net = _sample_network(cfg, n_position, n, trial, weighted=cfg.epsilon is not None)
    params = CensusParams(cfg.d, cfg.alpha, cfg.delta, cfg.epsilon, cfg.kappa)
    return n, trial, event_census(net, params).flags


def run_trials(cfg: ExperimentConfig, worker, progress: bool = True, workers: int | None = None) -> list:
    """
    Runs `worker(cfg, (n_position, n, trial))` over every task, serially or in a process pool.

    Returns:
        list: Results in (n, trial) order.
    """
    tasks = [(pos, n, trial) for pos, n in enumerate(cfg.n_list) for trial in range(cfg.trials)]
    workers = workers or cfg.workers
    job = partial(worker, cfg)
    bar = dict(total=len(tasks), desc=cfg.kind, disable=not progress, leave=False)
    if workers == 1:
        results = [job(task) for task in tqdm(tasks, **bar)]
    else:
        chunk = max(1, len(tasks) // (workers * 16))
        with ProcessPoolExecutor(max_workers=workers) as executor:
            results = list(tqdm(executor.map(job, tasks, chunksize=chunk), **bar))
    return sorted(results, key=lambda r: (r[0], r[1]) if isinstance(r, tuple) else (r.n, r.trial))


def _check_convergence(trials: list[NormTrial]) -> int:
    unconverged = sum(not t.converged for t in trials)
    if unconverged:
        logger.warning("%d of %d trials unconverged; excluded from statistics", unconverged, len(trials))
    if unconverged > MAX_UNCONVERGED_FRACTION * len(trials):
        raise NumericError(f"{unconverged} of {len(trials)} trials unconverged (limit "
                           f"{MAX_UNCONVERGED_FRACTION:.0%}); raise max_iter or loosen tol")
    return unconverged


@dataclass
class LLNReport:
    """Trial-level normalized norms ||Z|| / lambda(n) and their per-n statistics."""
    config: ExperimentConfig
    trials: list[NormTrial]
    unconverged: int
    wall_time: float = 0.0
    kind: str = "lln"

    def table(self) -> pd.DataFrame:
        return pd.DataFrame({
            "n": [t.n for t in self.trials],
            "trial": [t.trial for t in self.trials],
            "norm": [t.norm for t in self.trials],
            "lambda": [t.typical for t in self.trials],
            "ratio": [t.ratio for t in self.trials],
            "converged": [t.converged for t in self.trials],
        })

    def statistics(self) -> pd.DataFrame:
        """Per-n mean, std, min and max of the ratio over converged trials."""
        frame = self.table()
        frame = frame[frame["converged"]]
        stats = frame.groupby("n")["ratio"].agg(["count", "mean", "std", "min", "max"]).reset_index()
        stats["std"] = stats["std"].fillna(0.0)
        return stats

    def mean_ratio(self, n: int) -> float:
        stats = self.statistics().set_index("n")
        return float(stats.loc[n, "mean"])

    def summary(self) -> dict:
        return {"kind": self.kind, "unconverged": self.unconverged,
                "statistics": self.statistics().to_dict(orient="records")}


@dataclass
class TailReport:
    """
    Per-n hit counts for a tail event plus, for the upper tail, the log-log regression of the
    hit frequency on n.
    """
    config: ExperimentConfig
    tail: str
    rows: pd.DataFrame
    trials: list[NormTrial]
    unconverged: int
    predicted_slope: float | None
    slope: float | None = None
    intercept: float | None = None
    half_width: float | None = None
    regression_n: list[int] = field(default_factory=list)
    excluded_n: list[int] = field(default_factory=list)
    exploratory: bool = False
    sweep: pd.DataFrame | None = None
    monotone: bool | None = None
    wall_time: float = 0.0

    @property
    def kind(self) -> str:
        return f"{self.tail}-tail"

    def table(self) -> pd.DataFrame:
        return self.rows[["n", "trials", "hits", "p_hat", "se"]]

    def summary(self) -> dict:
        data = {
            "kind": self.kind, "unconverged": self.unconverged,
            "predicted_slope": self.predicted_slope, "slope": self.slope,
            "intercept": self.intercept, "half_width": self.half_width,
            "regression_n": self.regression_n, "excluded_n": self.excluded_n,
            "exploratory": self.exploratory, "rows": self.rows.to_dict(orient="records"),
        }
        if self.sweep is not None:
            data["sweep"] = self.sweep.to_dict(orient="records")
            data["monotone"] = self.monotone
        return data


@dataclass
class CensusReport:
    """Failure counts of each event per n."""
    config: ExperimentConfig
    rows: pd.DataFrame
    wall_time: float = 0.0
    kind: str = "census"

    def table(self) -> pd.DataFrame:
        return self.rows[["n", "trials", "event", "failures", "frequency"]]

    def frequency(self, n: int, event: str) -> float:
        match = self.rows[(self.rows["n"] == n) & (self.rows["event"] == event)]
        return float(match["frequency"].iloc[0])

    def failures(self, n: int, event: str) -> int:
        match = self.rows[(self.rows["n"] == n) & (self.rows["event"] == event)]
        return int(match["failures"].iloc[0])

    def summary(self) -> dict:
        return {"kind": self.kind, "rows": self.rows.to_dict(orient="records")}


def _hit_table(trials: list[NormTrial], hit) -> pd.DataFrame:
    records = []
    for n in sorted({t.n for t in trials}):
        usable = [t for t in trials if t.n == n and t.converged]
        hits = sum(hit(t) for t in usable)
        count = len(usable)
        p_hat = hits / count if count else math.nan
        se = math.sqrt(p_hat * (1 - p_hat) / count) if count else math.nan
        records.append({"n": n, "trials": count, "hits": hits, "p_hat": p_hat, "se": se})
    return pd.DataFrame(records, columns=["n", "trials", "hits", "p_hat", "se"])


def fit_tail_slope(rows: pd.DataFrame, min_hits: int = MIN_HITS_FOR_REGRESSION) -> dict:
    """
    Least-squares slope of log p_hat against log n over sizes with at least `min_hits` hits,
    with a two-sided t half-width when three or more sizes are used.
    """
    usable = rows[rows["hits"] >= min_hits]
    excluded = [int(n) for n in rows.loc[rows["hits"] < min_hits, "n"]]
    if excluded:
        logger.warning("sizes with fewer than %d hits excluded from the regression: %s", min_hits, excluded)
    result = {"slope": None, "intercept": None, "half_width": None,
              "regression_n": [int(n) for n in usable["n"]], "excluded_n": excluded}
    if len(usable) < 2:
        return result
    fit = linregress(np.log(usable["n"].to_numpy(float)), np.log(usable["p_hat"].to_numpy(float)))
    result["slope"], result["intercept"] = float(fit.slope), float(fit.intercept)
    if len(usable) > 2:
        quantile = student_t.ppf(0.5 + CONFIDENCE / 2, len(usable) - 2)
        result["half_width"] = float(quantile * fit.stderr)
    return result


def run_lln(cfg: ExperimentConfig, progress: bool = True) -> LLNReport:
    """
    ||Z|| / lambda_alpha(n) for every n and trial, lambda chosen by regime.

    Raises:
        NumericError: If more than 1% of the trials are unconverged.
    """
    start = time.perf_counter()
    trials = run_trials(cfg, norm_trial, progress)
    unconverged = _check_convergence(trials)
    return LLNReport(cfg, trials, unconverged, time.perf_counter() - start)


def run_upper_tail(cfg: ExperimentConfig, progress: bool = True) -> TailReport:
    """
    Frequencies of ||Z|| >= (1 + delta) lambda(n) and their log-log slope against n.

    The predicted slope is -rate. Light-tailed runs are allowed but flagged exploratory.
    Max-entry hits and near-threshold trials are counted alongside.
    """
    start = time.perf_counter()
    exploratory = regime(cfg.alpha) == LIGHT
    if exploratory:
        logger.warning("upper-tail run in the light-tailed regime is exploratory only")
    trials = run_trials(cfg, norm_trial, progress)
    unconverged = _check_convergence(trials)
    factor = 1 + cfg.delta
    rows = _hit_table(trials, lambda t: t.norm >= factor * t.typical)
    rows["max_entry_hits"] = _hit_table(trials, lambda t: t.max_entry >= factor * t.typical)["hits"]
    rows["near_threshold"] = _hit_table(
        trials, lambda t: abs(t.norm - factor * t.typical) < NEAR_THRESHOLD_FACTOR * cfg.tol * t.typical)["hits"]
    fit = fit_tail_slope(rows)
    predicted = -rate(RateQuery(cfg.alpha, cfg.delta), UPPER).value
    return TailReport(cfg, UPPER, rows, trials, unconverged, predicted, exploratory=exploratory,
                      wall_time=time.perf_counter() - start, **fit)


def run_lower_tail(cfg: ExperimentConfig, progress: bool = True) -> TailReport:
    """
    Frequencies of ||Z|| <= (1 - delta) lambda(n) for cfg.delta and for every delta in
    cfg.lower_deltas, from one set of norms. No exponent is fitted.

    Raises:
        DomainError: Outside the heavy-tailed regime or for delta outside (0, 1).
    """
    if regime(cfg.alpha) != HEAVY:
        raise DomainError("the lower-tail run needs a heavy-tailed alpha <= 2")
    for delta in (cfg.delta, *cfg.lower_deltas):
        if not 0 < delta < 1:
            raise DomainError(f"lower-tail deltas must lie in (0, 1), got {delta}")
    start = time.perf_counter()
    trials = run_trials(cfg, norm_trial, progress)
    unconverged = _check_convergence(trials)
    rows = _hit_table(trials, lambda t: t.norm <= (1 - cfg.delta) * t.typical)
    sweep_parts = []
    for delta in sorted(set(cfg.lower_deltas) | {cfg.delta}):
        part = _hit_table(trials, lambda t, delta=delta: t.norm <= (1 - delta) * t.typical)
        part.insert(1, "delta", delta)
        sweep_parts.append(part)
    sweep = pd.concat(sweep_parts, ignore_index=True).sort_values(["n", "delta"], kind="stable")
    monotone = bool(all(np.all(np.diff(group["p_hat"].to_numpy()) <= 0) for _, group in sweep.groupby("n")))
    return TailReport(cfg, LOWER, rows, trials, unconverged, None, sweep=sweep.reset_index(drop=True),
                      monotone=monotone, wall_time=time.perf_counter() - start)


def run_structure_census(cfg: ExperimentConfig, progress: bool = True) -> CensusReport:
    """Empirical failure frequency of every event for each n."""
    start = time.perf_counter()
    results = run_trials(cfg, census_trial, progress)
    records = []
    for n in cfg.n_list:
        flags = [f for size, _, f in results if size == n]
        for event in EVENTS:
            failures = sum(not f[event] for f in flags)
            records.append({"n": n, "trials": len(flags), "event": event,
                            "failures": failures, "frequency": failures / len(flags)})
    rows = pd.DataFrame(records, columns=["n", "trials", "event", "failures", "frequency"])
    return CensusReport(cfg, rows, time.perf_counter() - start)


RUNNERS = {
    "lln": run_lln,
    "upper-tail": run_upper_tail,
    "lower-tail": run_lower_tail,
    "census": run_structure_census,
}


def run_experiment(cfg: ExperimentConfig, progress: bool = True):
    """Runs the experiment named by cfg.kind."""
    logger.info("running %s: alpha=%g d=%g n=%s trials=%d seed=%d", cfg.kind, cfg.alpha, cfg.d,
                list(cfg.n_list), cfg.trials, cfg.master_seed)
    return RUNNERS[cfg.kind](cfg, progress)


def default_workers() -> int:
    return get_config().workers
