"""Command-line runner for the named experiments.

Every output is rendered in memory first and written only after the whole
run succeeded, so a failing run leaves no partial files behind.

Exit codes: 0 success, 1 configuration error, 2 numerical or search
failure, 3 acceptance failure in ``verify`` mode.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .config import EXPERIMENTS, ConfigurationError, ExperimentConfig, load_config, load_preset
from .errors import ConsistencyError, DomainError, NumericalError, SearchError
from .experiments import Result, run_experiment

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_VERIFY = 0, 1, 2, 3
MANIFEST = "manifest.json"


def _plain(v):
    """JSON/CSV-safe scalar with a stable text form."""
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return float(v)
    if isinstance(v, complex):
        return repr(v)
    if isinstance(v, (tuple, list, np.ndarray)):
        return [_plain(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    return v


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(x) if isinstance(x, float) else x for x in (_plain(v) for v in row)])
    return buf.getvalue()


def render(result: Result, experiment: str, fmt: str) -> dict[str, str]:
    """File name → text for one result."""
    if fmt == "json":
        doc = {"experiment": experiment, "summary": _plain(result.summary),
               "tables": {name: {"columns": list(h), "rows": _plain([list(r) for r in rows])}
                          for name, (h, rows) in result.tables.items()}}
        return {"result.json": json.dumps(doc, indent=2) + "\n"}
    files = {"summary.csv": _csv_text(["key", "value"], sorted(result.summary.items()))}
    for name, (header, rows) in result.tables.items():
        files[f"{name}.csv"] = _csv_text(header, rows)
    return files


def manifest_text(cfg: ExperimentConfig, fmt: str, files: dict[str, str], wall: float) -> str:
    doc = {"version": __version__, "experiment": cfg.experiment, "source": cfg.source,
           "format": fmt, "config": _plain(cfg.resolved()), "files": sorted(files),
           "wall_time_s": wall}
    return json.dumps(doc, indent=2) + "\n"


def write_outputs(out_dir: Path, files: dict[str, str]) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, text in files.items():
        with open(out_dir / name, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def execute(cfg: ExperimentConfig, fmt: str | None = None, jobs: int = 1) -> dict[str, str]:
    """Run a validated config and return every output file, manifest included."""
    fmt = fmt or cfg.format
    t0 = time.perf_counter()
    if cfg.experiment == "verify":
        from .acceptance import run_all
        results = run_all()
        summary = {f"criterion_{r.number}": r.passed for r in results}
        table = ["number", "name", "passed", "detail"]
        rows = [(r.number, r.name, r.passed, r.detail) for r in results]
        result = Result(summary, {"acceptance": (table, rows)})
    else:
        result = run_experiment(cfg, jobs=jobs)
    files = render(result, cfg.experiment, fmt)
    files[MANIFEST] = manifest_text(cfg, fmt, files, time.perf_counter() - t0)
    return files


def _load(args) -> ExperimentConfig:
    if args.config and args.preset:
        raise ConfigurationError("give either --config or --preset, not both", key="--config")
    if args.preset:
        cfg = load_preset(args.preset)
    elif args.config:
        cfg = load_config(args.config)
    elif args.experiment == "verify":
        cfg = ExperimentConfig("verify", {"output": {"format": "csv"}}, source="<verify>")
    else:
        raise ConfigurationError(f"{args.experiment} needs --config or --preset", key="--config")
    if cfg.experiment != args.experiment:
        raise ConfigurationError(
            f"config is for experiment {cfg.experiment!r}, not {args.experiment!r}",
            key="experiment.name")
    if args.format:
        cfg = replace(cfg, values={**cfg.values, "output": {"format": args.format}})
    return cfg


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="polariton-qubits", description=__doc__.splitlines()[0])
    p.add_argument("experiment", choices=EXPERIMENTS)
    p.add_argument("--config", help="experiment config file (.ini)")
    p.add_argument("--preset", help="named built-in config")
    p.add_argument("--out", default="out", help="output directory (default: out)")
    p.add_argument("--format", choices=("csv", "json"), help="override output.format")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for sweeps")
    p.add_argument("--version", action="version", version=__version__)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.jobs < 1:
            raise ConfigurationError("--jobs must be at least 1", key="--jobs")
        cfg = _load(args)
        files = execute(cfg, jobs=args.jobs)
    except ConfigurationError as exc:
        print(f"config error [{exc.key}]: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, SearchError, ConsistencyError, DomainError, ZeroDivisionError) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    write_outputs(Path(args.out), files)
    if cfg.experiment == "verify":
        failed = [ln for ln in files_summary_lines(files) if ln.startswith("FAIL")]
        for ln in files_summary_lines(files):
            print(ln)
        if failed:
            return EXIT_VERIFY
    return EXIT_OK


def files_summary_lines(files: dict[str, str]) -> list[str]:
    """PASS/FAIL lines recovered from a verify run's acceptance table."""
    if "result.json" in files:
        rows = json.loads(files["result.json"])["tables"]["acceptance"]["rows"]
    else:
        rows = list(csv.reader(io.StringIO(files["acceptance.csv"])))[1:]
        rows = [(int(n), name, ok == "True", d) for n, name, ok, d in rows]
    return [f"{'PASS' if ok else 'FAIL'} criterion {n}: {name} | {d}" for n, name, ok, d in rows]


if __name__ == "__main__":
    sys.exit(main())
