import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from config_manager import get_config
from event_census import CensusParams, event_census
from exceptions import DomainError, NumericError, ReportIOError, SizeError
from experiment_runner import KINDS, ExperimentConfig, run_experiment
from graph_transforms import audit_reduction, clique_reduce
from network_io import read_network, write_network, write_split_map
from network_model import DirectedNetwork
from random_generator import RngHandle, WeibullSpec, attach_weights, sample_digraph
from rate_theory import (
    RateQuery, binomial_exact_tail, binomial_loglog_exponent, binomial_tail_bounds,
    f_max, f_rate, gamma_params, lambda_heavy, lambda_light, phi, psi, psi_min, rate,
    relative_entropy, typical_value, weibull_sum_exponent,
)
from report_writer import BUILD_ID, default_report_path, emit_report, load_manifest, manifest_path, replay_manifest
from spectral_engine import ENGINES, POWER_MAX_ITER, POWER_TOL, spectral_norm

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_IO = 2
EXIT_NUMERIC = 3
THEORY_OPS = ("lambda", "rate", "phi", "psi", "f", "entropy", "binom", "gamma", "weibull-sum")


class CliParser(argparse.ArgumentParser):
    """ArgumentParser whose usage errors exit with the domain-error code and a one-line message."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_DOMAIN, f"error: usage: {message}\n")


def _emit(payload: dict) -> None:
    print(json.dumps(payload, default=_json_default))


def _json_default(value):
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"cannot serialize {type(value).__name__}")


def _require(args, *names: str) -> None:
    missing = [f"--{name.replace('_', '-')}" for name in names if getattr(args, name) is None]
    if missing:
        raise DomainError(f"--op {args.op} requires {', '.join(missing)}")


def _read_directed(path) -> DirectedNetwork:
    net = read_network(path)
    if not isinstance(net, DirectedNetwork):
        raise DomainError(f"{path}: expected a directed network file")
    return net


def cmd_sample(args) -> None:
    if args.n <= 0:
        raise DomainError(f"--n must be positive, got {args.n}")
    rng = RngHandle(args.seed, args.stream)
    x = sample_digraph(args.n, args.d / args.n, rng.substream(0))
    z = attach_weights(x, WeibullSpec(args.alpha, args.threshold), rng.substream(1))
    write_network(args.out, z)
    _emit({"n": z.n, "entries": z.entry_count, "out": str(args.out)})


def cmd_reduce(args) -> None:
    w = _read_directed(args.input)
    absolute = bool(np.any(w.weights < 0))
    if absolute:
        logger.info("negative weights present; reducing |W|")
        w = w.abs()
    result = clique_reduce(w)
    write_network(args.out, result.h)
    if args.emit_split_map:
        write_split_map(args.emit_split_map, result.split_map)
    norm_w = spectral_norm(w).value
    norm_h = spectral_norm(result.h).value
    _emit({
        "absolute": absolute,
        "h_vertices": result.split_map.vertex_count,
        "h_edges": result.h.edge_count,
        "components": [c.to_dict() for c in result.components],
        "audit": audit_reduction(w, result).to_dict(),
        "norm_w": norm_w,
        "norm_h": norm_h,
        "norm_bound": norm_w <= norm_h + 1e-9 * max(norm_h, 1.0),
    })


def cmd_norm(args) -> None:
    net = read_network(args.input)
    result = spectral_norm(net, args.engine, args.tol, args.max_iter, RngHandle(args.seed))
    _emit(result.to_dict())


def cmd_structure(args) -> None:
    x = _read_directed(args.input)
    params = CensusParams(args.d, args.alpha, args.delta, args.epsilon, args.kappa,
                          args.delta1, args.delta2, args.delta3, args.delta4)
    census = event_census(x, params, RngHandle(args.seed), with_norm=args.with_norm)
    _emit(census.to_dict())


def _theory_payload(args) -> dict:
    op = args.op
    if op == "lambda":
        _require(args, "n", "alpha")
        if args.alpha > 2:
            return {"value": lambda_light(args.n, args.alpha), "regime": "light"}
        return {"value": lambda_heavy(args.n, args.alpha), "regime": "heavy"}
    if op == "rate":
        _require(args, "alpha", "delta", "tail")
        return rate(RateQuery(args.alpha, args.delta), args.tail).to_dict()
    if op == "phi":
        _require(args, "theta", "k")
        return phi(args.theta, args.k).to_dict()
    if op == "psi":
        _require(args, "alpha", "delta")
        if args.k_max is not None:
            k_star, value = psi_min(args.alpha, args.delta, args.k_max)
            return {"k": k_star, "value": value}
        _require(args, "k")
        return {"k": args.k, "value": psi(args.alpha, args.delta, args.k)}
    if op == "f":
        _require(args, "alpha", "rho")
        payload = f_max(args.alpha, args.rho).to_dict()
        if args.x is not None:
            payload["f"] = f_rate(args.alpha, args.rho, args.x)
        return payload
    if op == "entropy":
        _require(args, "p", "q")
        return {"value": relative_entropy(args.p, args.q)}
    if op == "binom":
        if args.n is not None:
            _require(args, "a", "d", "delta")
            return {"exponent": binomial_loglog_exponent(args.n, args.a, args.d, args.delta)}
        _require(args, "m", "q", "theta")
        lower, upper = binomial_tail_bounds(args.m, args.q, args.theta, args.side)
        exact = binomial_exact_tail(args.m, args.q, args.theta, args.side)
        return {"lower": lower, "exact": exact, "upper": upper}
    if op == "gamma":
        _require(args, "alpha", "delta")
        gamma, gamma_prime = gamma_params(args.alpha, args.delta)
        return {"gamma": gamma, "gamma_prime": gamma_prime}
    _require(args, "alpha", "d", "b")
    return {"value": weibull_sum_exponent(args.alpha, args.d, args.b, args.epsilon or 0.0, args.conditioned)}


def cmd_theory(args) -> None:
    payload = {"op": args.op}
    payload.update(_theory_payload(args))
    if args.op == "lambda":
        payload["typical"] = typical_value(args.n, args.alpha)
    _emit(payload)


EXPERIMENT_FLAGS = ("alpha", "d", "n_list", "trials", "master_seed", "tol", "max_iter", "delta",
                    "epsilon", "kappa", "workers")


def _experiment_config(args) -> ExperimentConfig:
    data = ExperimentConfig.from_json_file(args.config).to_dict() if args.config else {}
    data["kind"] = args.kind
    for name in EXPERIMENT_FLAGS:
        value = getattr(args, name)
        if value is not None:
            data[name] = value
    data.setdefault("workers", get_config().workers)
    missing = [name for name in ("alpha", "d", "n_list", "trials") if name not in data]
    if missing:
        raise DomainError("experiment needs " + ", ".join(f"--{m.replace('_', '-')}" for m in missing))
    return ExperimentConfig.from_dict(data)


def cmd_experiment(args) -> None:
    if args.replay:
        manifest = load_manifest(args.replay)
        original = Path(args.replay).with_name(manifest.get("csv", ""))
        try:
            expected = original.read_text(encoding="utf-8")
        except OSError as e:
            raise ReportIOError(original, e.strerror or str(e)) from e
        regenerated = replay_manifest(args.replay, progress=not args.quiet)
        if regenerated != expected:
            raise NumericError(f"replay of {args.replay} does not reproduce {original.name}")
        _emit({"replay": str(args.replay), "csv": str(original), "identical": True})
        return
    cfg = _experiment_config(args)
    out_dir = args.out_dir or get_config().output_dir
    path = Path(args.out) if args.out else default_report_path(out_dir, cfg.kind, cfg.master_seed)
    report = run_experiment(cfg, progress=not args.quiet)
    manifest = emit_report(report, path)
    _emit({"csv": str(path), "manifest": str(manifest), "wall_time": report.wall_time,
           "summary": report.summary()})


def _n_list(text: str) -> list[int]:
    try:
        return [int(float(part)) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated sizes, got {text!r}") from None


def build_parser() -> CliParser:
    parser = CliParser(
        prog="main.py",
        description="Sparse non-Hermitian random networks: sampling, reductions, norms, rate functions and experiments.",
        formatter_class=argparse.RawTextHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {BUILD_ID}")
    parser.add_argument("--verbose", action="store_true", help="Log debug messages to stderr.")
    parser.add_argument("--quiet", action="store_true", help="Only log errors; hide progress bars.")
    commands = parser.add_subparsers(dest="command", required=True, metavar="command")

    sample = commands.add_parser("sample", help="Sample Z = X (entrywise) Y and write a network file.")
    sample.add_argument("--n", type=int, required=True, help="Vertex count.")
    sample.add_argument("--d", type=float, required=True, help="Mean degree; edge probability is d / n.")
    sample.add_argument("--alpha", type=float, required=True, help="Weibull shape parameter.")
    sample.add_argument("--threshold", type=float, default=None, help="Condition weights on |W| > threshold.")
    sample.add_argument("--seed", type=int, default=0, help="Master seed.")
    sample.add_argument("--stream", type=int, default=0, help="Stream index under the master seed.")
    sample.add_argument("--out", type=Path, required=True, help="Output network file.")
    sample.set_defaults(handler=cmd_sample)

    reduce = commands.add_parser("reduce", help="Clique-reduce a directed network.")
    reduce.add_argument("--in", dest="input", type=Path, required=True, help="Directed network file.")
    reduce.add_argument("--out", type=Path, required=True, help="Output undirected network file.")
    reduce.add_argument("--emit-split-map", type=Path, default=None, help="Write the split map here.")
    reduce.set_defaults(handler=cmd_reduce)

    norm = commands.add_parser("norm", help="Largest singular value of a network.")
    norm.add_argument("--in", dest="input", type=Path, required=True, help="Network file.")
    norm.add_argument("--engine", choices=ENGINES, default="auto",
                      help="dense, power, or auto (dense up to n=200).")
    norm.add_argument("--tol", type=float, default=POWER_TOL, help="Power-iteration relative tolerance.")
    norm.add_argument("--max-iter", type=int, default=POWER_MAX_ITER, help="Power-iteration cap.")
    norm.add_argument("--seed", type=int, default=0, help="Seed of the start vector.")
    norm.set_defaults(handler=cmd_norm)

    structure = commands.add_parser("structure", help="Event census of a directed network.")
    structure.add_argument("--in", dest="input", type=Path, required=True, help="Directed network file.")
    structure.add_argument("--d", type=float, required=True)
    structure.add_argument("--alpha", type=float, required=True)
    structure.add_argument("--delta", type=float, required=True)
    structure.add_argument("--epsilon", type=float, default=None, help="Truncation parameter.")
    structure.add_argument("--kappa", type=float, default=0.5, help="Level-set grid step in (0, 1).")
    for index in range(1, 5):
        structure.add_argument(f"--delta{index}", type=float, default=None)
    structure.add_argument("--with-norm", action="store_true", help="Also evaluate the norm event B.")
    structure.add_argument("--seed", type=int, default=0)
    structure.set_defaults(handler=cmd_structure)

    theory = commands.add_parser("theory", help="Evaluate closed-form quantities.")
    theory.add_argument("--op", choices=THEORY_OPS, required=True)
    for name, kind in (("n", float), ("alpha", float), ("delta", float), ("theta", float), ("k", int),
                       ("k-max", int), ("rho", float), ("x", float), ("p", float), ("q", float),
                       ("m", int), ("a", float), ("d", float), ("b", float), ("epsilon", float)):
        theory.add_argument(f"--{name}", type=kind, default=None)
    theory.add_argument("--tail", choices=("upper", "lower"), default=None)
    theory.add_argument("--side", choices=("upper", "lower"), default=None)
    theory.add_argument("--conditioned", action="store_true")
    theory.set_defaults(handler=cmd_theory)

    experiment = commands.add_parser("experiment", help="Run a seeded Monte Carlo experiment.")
    experiment.add_argument("kind", choices=KINDS)
    experiment.add_argument("--alpha", type=float, default=None)
    experiment.add_argument("--d", type=float, default=None)
    experiment.add_argument("--delta", type=float, default=None)
    experiment.add_argument("--n-list", type=_n_list, default=None, help="Comma-separated sizes, e.g. 1000,3000,10000.")
    experiment.add_argument("--trials", type=int, default=None)
    experiment.add_argument("--seed", dest="master_seed", type=int, default=None)
    experiment.add_argument("--tol", type=float, default=None)
    experiment.add_argument("--max-iter", type=int, default=None)
    experiment.add_argument("--epsilon", type=float, default=None)
    experiment.add_argument("--kappa", type=float, default=None)
    experiment.add_argument("--workers", type=int, default=None)
    experiment.add_argument("--out-dir", type=Path, default=None, help="Defaults to SPARSE_LDP_OUTPUT_DIR or results/.")
    experiment.add_argument("--out", type=Path, default=None, help="Explicit CSV path.")
    experiment.add_argument("--config", type=Path, default=None, help="JSON experiment config; flags override it.")
    experiment.add_argument("--replay", type=Path, default=None, help="Rerun a manifest and compare its CSV.")
    experiment.set_defaults(handler=cmd_experiment)
    return parser


def _configure_logging(args) -> None:
    level = logging.DEBUG if args.verbose else logging.ERROR if args.quiet else logging.WARNING
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s", force=True)


def _fail(kind: str, message, code: int) -> int:
    print(f"error: {kind}: {message}", file=sys.stderr)
    return code


def dispatch(argv=None) -> int:
    """
    Parses argv, runs the subcommand and maps every failure to an exit code:
    0 success, 1 domain or usage error, 2 I/O error, 3 numeric error.
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_DOMAIN
    _configure_logging(args)
    try:
        args.handler(args)
    except SizeError as e:
        return _fail("size", e, EXIT_DOMAIN)
    except DomainError as e:
        return _fail("domain", e, EXIT_DOMAIN)
    except NumericError as e:
        return _fail("numeric", e, EXIT_NUMERIC)
    except ReportIOError as e:
        return _fail("io", e, EXIT_IO)
    except OSError as e:
        return _fail("io", f"{e.filename}: {e.strerror}" if e.filename else e, EXIT_IO)
    except ValueError as e:
        # Malformed SPARSE_LDP_* environment settings.
        return _fail("config", e, EXIT_DOMAIN)
    return EXIT_OK


def main():
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
