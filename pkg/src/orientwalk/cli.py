"""Command-line harness: ``orientwalk run | presets | report``.

Exit codes: 0 success, 1 criterion failure, 2 configuration error,
3 I/O error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import time
from pathlib import Path

from .experiments import EXPERIMENTS, ConfigError, ExperimentConfig, list_presets, run
from .stats import ExperimentReport

EXIT_OK, EXIT_CRITERION, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3

_FIELDS = {f.name: f for f in dataclasses.fields(ExperimentConfig)}


def _int_list(text: str) -> list[int]:
    text = text.strip()
    if ".." in text:  # 2^12..2^20 style powers or a..b ranges are spelled explicitly
        lo, hi = text.split("..")
        if lo.startswith("2^") and hi.startswith("2^"):
            return [2**k for k in range(int(lo[2:]), int(hi[2:]) + 1)]
        raise ValueError(f"unsupported range {text!r}")
    return [int(float(v)) for v in text.replace(";", ",").split(",") if v.strip()]


def _coerce(key: str, raw: str):
    if key not in _FIELDS:
        raise ConfigError(key, "unknown configuration key")
    try:
        if key in ("n_grid",):
            return _int_list(raw)
        if key == "t":
            return [float(v) for v in raw.split(",") if v.strip()]
        if key in ("n", "replicas", "seed", "workers", "samples", "lags"):
            return int(float(raw))
        if key in ("h", "speed_max", "ks_flt", "ks_self"):
            return float(raw)
        if key in ("x", "x_max", "dt"):
            return None if raw.lower() in ("", "none") else float(raw)
        if key == "f":
            return None if raw.lower() in ("", "none", "default") else raw
        return raw
    except ValueError as exc:
        raise ConfigError(key, f"cannot parse {raw!r}: {exc}") from None


def read_config_file(path: str) -> dict[str, str]:
    """Parse a flat ``key = value`` file (``#`` comments allowed)."""
    entries: dict[str, str] = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"{path}:{lineno}", f"expected key=value, got {line!r}")
        entries[key.strip().replace("-", "_")] = value.strip()
    return entries


def build_config(args: argparse.Namespace) -> ExperimentConfig:
    raw: dict[str, str] = {}
    if args.config:
        raw.update(read_config_file(args.config))
    for key in _FIELDS:
        value = getattr(args, key, None)
        if value is not None:
            raw[key] = str(value)
    if not raw.get("experiment"):
        raise ConfigError("experiment", "required (one of " + ", ".join(EXPERIMENTS) + ")")
    values = {k: _coerce(k, v) for k, v in raw.items()}
    return ExperimentConfig(**values).validate()


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="orientwalk", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run one experiment")
    r.add_argument("--config", help="flat key=value configuration file")
    r.add_argument("--experiment", choices=EXPERIMENTS)
    r.add_argument("--system", help='system preset, e.g. "markov:rho=0.5"')
    r.add_argument("--f", help='generating function preset, e.g. "f3"')
    r.add_argument("--mode", choices=("annealed", "quenched"))
    r.add_argument("--x", help="quenched point (float) or shift stream seed")
    r.add_argument("--n")
    r.add_argument("--n-grid", dest="n_grid", help='comma list or "2^12..2^20"')
    r.add_argument("--replicas")
    r.add_argument("--seed")
    r.add_argument("--out", help="output directory for report and data files")
    r.add_argument("--workers")
    r.add_argument("--t", help="comma list of Delta times")
    r.add_argument("--dt")
    r.add_argument("--h")
    r.add_argument("--x-max", dest="x_max")
    r.add_argument("--samples")
    r.add_argument("--lags")

    sub.add_parser("presets", help="list system and function presets")

    rep = sub.add_parser("report", help="re-render a JSON report as text")
    rep.add_argument("path")
    return p


def _write_outputs(out: Path, report: ExperimentReport, data: dict[str, list[str]],
                   started: float) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(report.to_json())
    (out / "report.txt").write_text(report.to_text())
    for name, lines in sorted(data.items()):
        (out / name).write_text("\n".join(lines) + "\n")
    # timestamps live only in the sidecar log
    with open(out / "run.log", "a") as fh:
        fh.write(f"{time.strftime('%Y-%m-%dT%H:%M:%S')} {report.experiment} "
                 f"seed={report.master_seed} elapsed={time.time() - started:.2f}s "
                 f"passed={report.passed}\n")


def cmd_run(args) -> int:
    try:
        cfg = build_config(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    started = time.time()
    report, data = run(cfg)
    if cfg.out:
        try:
            _write_outputs(Path(cfg.out), report, data, started)
        except OSError as exc:
            print(f"I/O error: {exc}", file=sys.stderr)
            return EXIT_IO
    sys.stdout.write(report.to_text())
    return EXIT_OK if report.passed else EXIT_CRITERION


def cmd_presets(args) -> int:
    for entry in list_presets():
        print(f"{entry['type']:<9} {entry['name']:<26} {entry['note']}")
    return EXIT_OK


def cmd_report(args) -> int:
    try:
        d = json.loads(Path(args.path).read_text())
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except json.JSONDecodeError as exc:
        print(f"configuration error: not a report: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    sys.stdout.write(ExperimentReport.from_dict(d).to_text())
    return EXIT_OK


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    return {"run": cmd_run, "presets": cmd_presets, "report": cmd_report}[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
