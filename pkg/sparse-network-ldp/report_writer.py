"""
Writes experiment reports: a CSV with a fixed header per report kind, plus a JSON manifest
next to it holding the config, seed, build identifier and wall time. A manifest is enough to
regenerate its CSV byte-for-byte.
"""
from __future__ import annotations

import json
import logging
import platform
from pathlib import Path

import numpy as np
import pandas as pd
import scipy

from exceptions import DomainError, ReportIOError
from experiment_runner import ExperimentConfig, run_experiment

logger = logging.getLogger(__name__)

__version__ = "0.1.0"
BUILD_ID = f"{__version__}+numpy{np.__version__}.scipy{scipy.__version__}.py{platform.python_version()}"
MANIFEST_SUFFIX = ".manifest.json"
SWEEP_SUFFIX = "_sweep.csv"


def manifest_path(csv_path) -> Path:
    csv_path = Path(csv_path)
    return csv_path.with_name(csv_path.stem + MANIFEST_SUFFIX)


def csv_text(table: pd.DataFrame) -> str:
    return table.to_csv(index=False, lineterminator="\n")


def report_csv(report) -> str:
    """The CSV text of a report's main table."""
    return csv_text(report.table())


def default_report_path(out_dir, kind: str, seed: int) -> Path:
    return Path(out_dir) / f"{kind}_seed{seed}.csv"


def _write(path: Path, text: str) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
    except OSError as e:
        raise ReportIOError(path, e.strerror or str(e)) from e


def emit_report(report, path) -> Path:
    """
    Writes the report CSV to `path` and its manifest beside it.

    Args:
        report: LLNReport, TailReport or CensusReport.
        path: Destination of the CSV.

    Returns:
        Path: The manifest path.

    Raises:
        ReportIOError: If either file cannot be written.
    """
    path = Path(path)
    _write(path, report_csv(report))
    sweep = getattr(report, "sweep", None)
    if sweep is not None:
        _write(path.with_name(path.stem + SWEEP_SUFFIX), csv_text(sweep))
    manifest = {
        "kind": report.kind,
        "config": report.config.to_dict(),
        "master_seed": report.config.master_seed,
        "build": BUILD_ID,
        "wall_time": report.wall_time,
        "csv": path.name,
        "summary": report.summary(),
    }
    target = manifest_path(path)
    _write(target, json.dumps(manifest, indent=2, default=_json_default) + "\n")
    logger.info("report written to %s (manifest %s)", path, target.name)
    return target


def _json_default(value):
    if isinstance(value, np.generic):
        return value.item()
    raise TypeError(f"cannot serialize {type(value).__name__}")


def load_manifest(path) -> dict:
    path = Path(path)
    try:
        manifest = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError as e:
        raise ReportIOError(path, "no such file") from e
    except OSError as e:
        raise ReportIOError(path, e.strerror or str(e)) from e
    except json.JSONDecodeError as e:
        raise DomainError(f"{path}: invalid manifest JSON ({e.msg})") from None
    if not isinstance(manifest, dict) or "config" not in manifest:
        raise DomainError(f"{path}: manifest has no config")
    return manifest


def replay_manifest(path, progress: bool = False) -> str:
    """
    Reruns the experiment recorded in a manifest and returns the regenerated CSV text.

    Raises:
        ReportIOError: If the manifest cannot be read.
        DomainError: If it is malformed.
    """
    manifest = load_manifest(path)
    if manifest.get("build") != BUILD_ID:
        logger.warning("manifest built by %s, replaying on %s", manifest.get("build"), BUILD_ID)
    cfg = ExperimentConfig.from_dict(manifest["config"])
    return report_csv(run_experiment(cfg, progress))
