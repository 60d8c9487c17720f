"""Batch front end: read scenario configs, dispatch to module runners, write reports.

A config is a JSON document holding one scenario::

    {"name": "checkerboard-2x2", "module": "frustration", "seed": 0,
     "params": {"Lx": 2, "Ly": 2, "periodic": true, "s": 0.5}}

or several under ``{"scenarios": [...]}``. ``--config`` also accepts the
name of a built-in scenario (see ``--list``).

Exit codes: 0 all checks pass, 1 a check failed or a run broke down
numerically (reports are still written), 2 the config could not be read,
3 a scenario failed validation.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from contextlib import nullcontext
from pathlib import Path

import numpy as np

from . import __version__
from .runners import BUILTIN_SCENARIOS, PRNG_NAME, RUNNERS, ValidationError

REPORT_VERSION = 1
EXIT_OK, EXIT_NUMERICAL, EXIT_PARSE, EXIT_VALIDATION = 0, 1, 2, 3
SCENARIO_KEYS = {"name", "module", "seed", "output", "params"}


class ConfigParseError(ValueError):
    pass


def list_scenarios() -> str:
    return "\n".join(sorted(BUILTIN_SCENARIOS))


def load_config(ref: str) -> list[dict]:
    """Scenario records from a file path or a built-in name."""
    path = Path(ref)
    if not path.exists() and ref in BUILTIN_SCENARIOS:
        return [dict(BUILTIN_SCENARIOS[ref], name=ref)]
    try:
        doc = json.loads(path.read_text())
    except (OSError, UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ConfigParseError(f"cannot read config {ref}: {exc}") from exc
    if isinstance(doc, dict) and "scenarios" in doc:
        if set(doc) != {"scenarios"} or not isinstance(doc["scenarios"], list):
            raise ConfigParseError("a multi-scenario config holds only a 'scenarios' list")
        items = doc["scenarios"]
    else:
        items = [doc]
    if not items or not all(isinstance(x, dict) for x in items):
        raise ConfigParseError("every scenario must be a key-value mapping")
    stem = path.stem
    return [dict(x, name=x.get("name", stem if len(items) == 1 else f"{stem}-{k}")) for k, x in enumerate(items)]


def validate_scenario(sc: dict) -> dict:
    """Normalized scenario with defaults filled in; raises :class:`ValidationError`."""
    unknown = sorted(set(sc) - SCENARIO_KEYS)
    if unknown:
        raise ValidationError(f"unknown scenario keys {unknown}")
    name = sc.get("name")
    if not isinstance(name, str) or not name or "/" in name:
        raise ValidationError("name must be a nonempty string without '/'")
    module = sc.get("module")
    if module not in RUNNERS:
        raise ValidationError(f"unknown module {module!r}; choose from {sorted(RUNNERS)}")
    seed = sc.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool) or not 0 <= seed < 2**64:
        raise ValidationError("seed must be an integer in [0, 2^64)")
    output = sc.get("output", name)
    if not isinstance(output, str) or not output or "/" in output:
        raise ValidationError("output must be a file stem without '/'")
    params = RUNNERS[module].validate(sc.get("params", {}))
    return {"name": name, "module": module, "seed": seed, "output": output, "params": params}


def _plain(x):
    """JSON-safe copy: numpy scalars to Python, complex to [re, im], non-finite to null."""
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return _plain(x.tolist())
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return float(x) if math.isfinite(x) else None
    if isinstance(x, (complex, np.complexfloating)):
        return [_plain(x.real), _plain(x.imag)]
    return x


def dumps(obj) -> str:
    return json.dumps(_plain(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def run_scenario(sc: dict) -> tuple[dict, dict, float]:
    """Execute a validated scenario; returns (report, tables, wall time)."""
    rng = np.random.Generator(np.random.PCG64(sc["seed"]))
    start = time.perf_counter()
    tables = {}
    try:
        out = RUNNERS[sc["module"]].run(sc["params"], rng)
        checks = [c.as_dict() for c in out.checks]
        results, tables, error = out.results, out.tables, None
        passed = all(c["passed"] for c in checks)
    except (ArithmeticError, RuntimeError, ValueError, np.linalg.LinAlgError) as exc:
        results, checks, error, passed = {}, [], f"{type(exc).__name__}: {exc}", False
    wall = time.perf_counter() - start
    report = {"report_version": REPORT_VERSION, "package_version": __version__, "prng": PRNG_NAME,
              "scenario": sc, "results": results, "checks": checks, "passed": passed}
    if error is not None:
        report["error"] = error
    return report, tables, wall


def write_outputs(out_dir: Path, sc: dict, report: dict, tables: dict, wall: float) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / f"{sc['output']}.json").write_text(dumps(report))
    # wall time lives beside the report so that the report itself is reproducible
    (out_dir / f"{sc['output']}.timing.json").write_text(dumps({"wall_time_s": wall}))
    for tname, (header, rows) in sorted(tables.items()):
        with open(out_dir / f"{sc['output']}.{tname}.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            w.writerows([["" if v is None else repr(v) if isinstance(v, float) else v for v in _plain(r)]
                         for r in rows])


def _blas_single_thread():
    try:
        from threadpoolctl import threadpool_limits
    except ImportError:
        return nullcontext()
    return threadpool_limits(1)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="artifact", description="Run numerical scenarios and write JSON reports.")
    p.add_argument("--config", metavar="PATH", help="scenario config (JSON) or a built-in scenario name")
    p.add_argument("--out", metavar="DIR", default="artifact-out", help="report directory (default: artifact-out)")
    p.add_argument("--threads", metavar="N", type=int, default=1,
                   help="scenarios run in parallel on N threads; each scenario is single-threaded")
    p.add_argument("--list", action="store_true", help="print built-in scenario names and exit")
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.list:
        print(list_scenarios())
        return EXIT_OK
    if args.config is None:
        parser.print_usage(sys.stderr)
        print("artifact: error: --config is required unless --list is given", file=sys.stderr)
        return EXIT_PARSE
    if args.threads < 1:
        print("artifact: error: --threads must be at least 1", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        raw = load_config(args.config)
    except ConfigParseError as exc:
        print(f"artifact: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    try:
        scenarios = [validate_scenario(sc) for sc in raw]
    except ValidationError as exc:
        print(f"artifact: validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    outputs = [sc["output"] for sc in scenarios]
    if len(set(outputs)) != len(outputs):
        print("artifact: validation error: duplicate output names", file=sys.stderr)
        return EXIT_VALIDATION

    out_dir = Path(args.out)
    with _blas_single_thread():
        if args.threads == 1 or len(scenarios) == 1:
            runs = [run_scenario(sc) for sc in scenarios]
        else:
            with ThreadPoolExecutor(max_workers=args.threads) as pool:
                runs = list(pool.map(run_scenario, scenarios))
    status = EXIT_OK
    for sc, (report, tables, wall) in zip(scenarios, runs):
        write_outputs(out_dir, sc, report, tables, wall)
        flag = "PASS" if report["passed"] else "FAIL"
        print(f"{flag} {sc['name']} ({sc['module']}, {wall:.2f} s) -> {out_dir / (sc['output'] + '.json')}")
        for c in report["checks"]:
            if not c["passed"]:
                print(f"  failed: {c['name']} = {c['value']} (needs {c['relation']} {c['tolerance']})")
        if "error" in report:
            print(f"  error: {report['error']}")
        if not report["passed"]:
            status = EXIT_NUMERICAL
    return status


if __name__ == "__main__":
    sys.exit(main())
