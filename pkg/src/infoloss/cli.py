"""Command-line front end.

Exit codes: 0 success, 1 a check failed, 2 bad configuration or unwritable output.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from . import bounds as B
from .estimators import CSV_FIELDS, EstimatorConfig, EvalContext, loss_curve, normalize_scheme
from .finite_info import DomainError, Pmf, ValidationError
from .models import build, kind_from_dict, kind_name
from .rng import DEFAULT_SEED
from .verify import SUITES, run_suite

OUT_ENV = "INFOLOSS_OUT"
EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2

DEFAULT_SIZES = [10, 20, 50, 100, 200, 500, 1000]
DEFAULT_SCHEMES = {
    "scale": ["product", "gessaman", "tsp", "asymmetric"],
    "rotated-scale": ["product", "gessaman", "tsp", "asymmetric"],
    "translation": ["product", "gessaman", "tsp", "projected"],
    "rotation": ["product", "gessaman", "tsp", "projected"],
    "two-class-1d": ["gessaman", "tsp"],
}


class ConfigError(Exception):
    pass


# ---------------------------------------------------------------- output helpers

def write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _clean(obj):
    # JSON without NaN/Infinity tokens
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else repr(obj)
    if isinstance(obj, (np.floating,)):
        return _clean(float(obj))
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def to_json(obj) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n"


def to_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def out_dir(args) -> Path | None:
    if getattr(args, "out", None):
        return Path(args.out)
    env = os.environ.get(OUT_ENV)
    return Path(env) if env else None


# ---------------------------------------------------------------- config

@dataclass
class RunConfig:
    model: dict = field(default_factory=lambda: {"name": "scale", "alpha": 1.5, "sigma": 1.0})
    schemes: list | None = None
    sizes: list = field(default_factory=lambda: list(DEFAULT_SIZES))
    n_eval: int = 10_000
    n_cal: int = 100_000
    aux_resolution: int = 256
    seed: int = DEFAULT_SEED
    out: str | None = None
    format: str = "csv"

    def validate(self):
        kind = kind_from_dict(self.model)
        name = kind_name(kind)
        if self.schemes is None:
            self.schemes = list(DEFAULT_SCHEMES[name])
        self.schemes = [normalize_scheme(s) for s in self.schemes]
        if not self.sizes or list(self.sizes) != sorted(self.sizes) or min(self.sizes) < 1:
            raise ConfigError("sizes must be a non-empty ascending list of positive integers")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"format must be csv or json, got {self.format!r}")
        EstimatorConfig(self.n_eval, self.n_cal, self.aux_resolution, self.seed)
        return kind

    def to_dict(self):
        return {"model": self.model, "schemes": self.schemes, "sizes": list(self.sizes),
                "n_eval": self.n_eval, "n_cal": self.n_cal, "aux_resolution": self.aux_resolution,
                "seed": self.seed, "format": self.format}


def load_config(path: str | None) -> dict:
    if not path:
        return {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    try:
        data = json.loads(text) if path.endswith(".json") else yaml.safe_load(text)
    except (json.JSONDecodeError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("config must be a mapping")
    unknown = set(data) - set(RunConfig.__dataclass_fields__)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    return data


def _int_list(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def _float_list(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


# ---------------------------------------------------------------- bounds

def bounds_table(eps_grid, M_list, grid: int) -> list[dict]:
    rows = []
    for M in M_list:
        for eps in eps_grid:
            row = {"M": M, "eps": eps, "f_uniform": None, "lower_bound": None,
                   "bruteforce": None, "status": "OK"}
            if eps <= 0 or eps > 1 - 1 / M + B.EPS_TOL:
                row["status"] = "infeasible"
                rows.append(row)
                continue
            row["f_uniform"] = B.f_min_mi(Pmf.uniform(M), eps)
            row["bruteforce"] = B.i_loss_bruteforce(eps, M, grid) if M <= 4 else None
            try:
                row["lower_bound"] = B.i_loss_lower_bound(eps, M)
            except DomainError:
                row["lower_bound"] = "inapplicable"
            lb, bf = row["lower_bound"], row["bruteforce"]
            if isinstance(lb, float):
                ok = lb > 0 and (bf is None or bf >= lb - 2.0 / grid)
            else:
                ok = bf is None or bf > 0
            row["status"] = "OK" if ok else "FAIL"
            rows.append(row)
    return rows


def cmd_bounds(args) -> int:
    eps = _float_list(args.eps)
    Ms = _int_list(args.M)
    if args.grid < 50 or any(M < 2 for M in Ms):
        raise ConfigError("grid must be >= 50 and every M >= 2")
    rows = bounds_table(eps, Ms, args.grid)
    cols = ["M", "eps", "f_uniform", "lower_bound", "bruteforce", "status"]
    if args.format == "json":
        text = to_json(rows)
    else:
        text = to_csv(cols, [["" if r[c] is None else (repr(r[c]) if isinstance(r[c], float) else r[c])
                              for c in cols] for r in rows])
    target = out_dir(args)
    if target is not None:
        write_atomic(target / f"bounds.{args.format}", text)
    sys.stdout.write(text)
    return EXIT_FAIL if any(r["status"] == "FAIL" for r in rows) else EXIT_OK


# ---------------------------------------------------------------- curve

def run_curves(cfg: RunConfig) -> dict[str, list]:
    kind = cfg.validate()
    model = build(kind)
    est = EstimatorConfig(cfg.n_eval, cfg.n_cal, cfg.aux_resolution, cfg.seed)
    ctx = EvalContext.draw(model, est)
    return {s["name"]: loss_curve(model, s, cfg.sizes, est, ctx) for s in cfg.schemes}


def cmd_curve(args) -> int:
    data = load_config(args.config)
    cfg = RunConfig(**data)
    # flags win over the config file
    if args.model:
        cfg.model = {"name": args.model}
    if args.schemes:
        cfg.schemes = args.schemes.split(",")
    if args.sizes:
        cfg.sizes = _int_list(args.sizes)
    for key in ("n_eval", "n_cal", "seed", "format", "out"):
        val = getattr(args, key, None)
        if val is not None:
            setattr(cfg, key, val)
    try:
        curves = run_curves(cfg)
    except ValidationError as exc:
        raise ConfigError(str(exc)) from None
    target = Path(cfg.out) if cfg.out else (out_dir(args) or Path("infoloss-out"))
    name = kind_name(kind_from_dict(cfg.model))
    provenance = {"config": cfg.to_dict(), "csv_columns": list(CSV_FIELDS), "partitions": {}}
    for scheme, pts in curves.items():
        stem = f"{name}_{scheme}"
        if cfg.format == "csv":
            text = to_csv(CSV_FIELDS, [p.csv_row() for p in pts])
        else:
            text = to_json([p.to_dict() for p in pts])
        write_atomic(target / f"{stem}.{cfg.format}", text)
        provenance["partitions"][scheme] = [
            {"k_target": p.k_target, "k": p.k, "partition": p.partition} for p in pts]
    write_atomic(target / "provenance.json", to_json(provenance))
    for scheme, pts in curves.items():
        for p in pts:
            extra = "" if p.pil is None else f" pil={p.pil:.4f}"
            print(f"{scheme:>10} k={p.k:<5d} il={p.il:.4f} ol={p.ol:.4f} wil={p.wil:.4f}{extra}")
    print(f"wrote {len(curves)} curve files and provenance.json to {target}")
    return EXIT_OK


# ---------------------------------------------------------------- verify

def cmd_verify(args) -> int:
    suites = SUITES if args.suite == "all" else (args.suite,)
    reports = [run_suite(s, args.seed, args.trials, args.grid) for s in suites]
    target = out_dir(args)
    if args.format == "json":
        sys.stdout.write(to_json([r.to_dict() for r in reports]))
    else:
        for r in reports:
            for c in r.checks:
                print(f"[{'PASS' if c.passed else 'FAIL'}] {r.suite}: {c.name}")
            print(f"{r.suite}: {'PASS' if r.passed else 'FAIL'}")
    for r in reports:
        if target is not None:
            write_atomic(target / f"verify-{r.suite}.json", to_json(r.to_dict()))
        if not r.passed:
            replay = to_json({"suite": r.suite, "seed": args.seed, "failures": r.failures})
            sys.stderr.write(replay)
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="infoloss", description="Information loss versus operation loss of quantized representations.")
    sub = parser.add_subparsers(dest="command", required=True)

    # curve leaves seed/format unset so values from --config survive
    def common(p, seed=DEFAULT_SEED, fmt="csv"):
        p.add_argument("--seed", type=int, default=seed)
        p.add_argument("--out", default=None, help=f"output directory (default: ${OUT_ENV})")
        p.add_argument("--format", choices=("csv", "json"), default=fmt)

    b = sub.add_parser("bounds", help="tabulate the error-entropy bounds")
    common(b)
    b.add_argument("--eps", default="0.05,0.1,0.2,0.3,0.5,0.8")
    b.add_argument("--M", default="2,3,4")
    b.add_argument("--grid", type=int, default=200)
    b.set_defaults(func=cmd_bounds)

    c = sub.add_parser("curve", help="loss curves of partition schemes on a synthetic model")
    common(c, seed=None, fmt=None)
    c.add_argument("--config", default=None, help="JSON or YAML run configuration")
    c.add_argument("--model", default=None)
    c.add_argument("--schemes", default=None, help="comma-separated scheme names")
    c.add_argument("--sizes", default=None, help="comma-separated ascending sizes")
    c.add_argument("--n-eval", dest="n_eval", type=int, default=None)
    c.add_argument("--n-cal", dest="n_cal", type=int, default=None)
    c.set_defaults(func=cmd_curve)

    v = sub.add_parser("verify", help="run a verification suite")
    common(v)
    v.add_argument("suite", choices=SUITES + ("all",))
    v.add_argument("--trials", type=int, default=None)
    v.add_argument("--grid", type=int, default=None)
    v.set_defaults(func=cmd_verify)

    e = sub.add_parser("example-4d", help="alias of 'verify example4d'")
    common(e)
    e.set_defaults(func=cmd_verify, suite="example4d", trials=None, grid=None)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (ConfigError, ValidationError, DomainError, ValueError) as exc:
        sys.stderr.write(f"configuration error: {exc}\n")
        return EXIT_CONFIG
    except OSError as exc:
        sys.stderr.write(f"I/O error: {exc}\n")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
