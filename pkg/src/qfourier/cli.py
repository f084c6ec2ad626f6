"""Command-line front end.

    qfourier simulate    --config run.yaml [--seed S] [--out DIR]
    qfourier periodogram --config run.yaml
    qfourier quenched    --config run.yaml [--threads N] [--frequencies 0.7,1.0|random:K]
    qfourier conditions  --config run.yaml
    qfourier martingale  --config run.yaml
    qfourier replay      DIR/manifest.json [--out DIR2]

Exit status is 0 when every pass/fail flag passes, 1 otherwise (the failed
flags are listed in ``failures.json``) and 2 for configuration errors.
"""
from __future__ import annotations

import argparse
import copy
import csv
import math
import os
import sys
import time

import numpy as np
import yaml

from . import __version__
from .conditions import OutOfScopeError, check_all, rio_table
from .fourier import FrequencyGrid, fourier_batch, write_samples_csv
from .martingale import (
    SingularResolventError,
    conditional_mean_S,
    gap_curve,
    martingale_kernel,
    telescoping_decomposition,
    write_gap_csv,
)
from .models import (
    STATIONARY,
    FiniteMarkovFn,
    LinearProcess,
    SpecError,
    check_origin,
    draw_origin,
    origin_from_dict,
    sample_quenched,
    sample_stationary,
    spec_from_dict,
    spec_hash,
)
from .quenched import ExperimentConfig, centering_decay, raikov_for_spec, run_quenched, write_raw_csv
from .reporting import sha256_file, write_json
from .rng import derive_seed
from .spectral import has_analytic_density, spectral_density, variance_growth, write_density_csv

COMMANDS = ("simulate", "periodogram", "quenched", "conditions", "martingale")


class ConfigError(Exception):
    pass


# ---------------------------------------------------------------------------
# config loading
# ---------------------------------------------------------------------------


def _locate(node, path):
    """Line (1-based) of the deepest node reachable along ``path``."""
    line = node.start_mark.line + 1 if node is not None else None
    for key in path:
        if isinstance(node, yaml.MappingNode):
            nxt = None
            for k, v in node.value:
                if k.value == str(key):
                    nxt = v
                    break
        elif isinstance(node, yaml.SequenceNode) and isinstance(key, int) and key < len(node.value):
            nxt = node.value[key]
        else:
            nxt = None
        if nxt is None:
            break
        node = nxt
        line = node.start_mark.line + 1
    return line


class Config:
    def __init__(self, data: dict, path: str = None, root=None):
        self.data = data
        self.path = path
        self.root = root

    @classmethod
    def load(cls, path: str) -> "Config":
        try:
            with open(path) as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"{path}: {exc.strerror}") from None
        try:
            root = yaml.compose(text)
            data = yaml.safe_load(text)
        except yaml.MarkedYAMLError as exc:
            mark = exc.problem_mark
            raise ConfigError(f"{path}:{mark.line + 1}: {exc.problem}") from None
        if data is None:
            data = {}
        if not isinstance(data, dict):
            raise ConfigError(f"{path}:1: top level must be a mapping")
        return cls(data, path, root)

    def error(self, message: str, path=()) -> ConfigError:
        line = _locate(self.root, path) if self.root is not None else None
        where = f"{self.path}:{line}" if self.path and line else (self.path or "<config>")
        return ConfigError(f"{where}: {message}")

    def section(self, name: str) -> dict:
        sec = self.data.get(name) or {}
        if not isinstance(sec, dict):
            raise self.error(f"section '{name}' must be a mapping", (name,))
        return sec

    @property
    def base_dir(self) -> str:
        return os.path.dirname(os.path.abspath(self.path)) if self.path else os.getcwd()


def _set_path(data: dict, dotted: str, value) -> None:
    keys = dotted.split(".")
    cur = data
    for k in keys[:-1]:
        if not isinstance(cur.get(k), dict):
            cur[k] = {}
        cur = cur[k]
    cur[keys[-1]] = value


def apply_overrides(cfg: Config, command: str, args) -> list:
    overrides = []
    if args.seed is not None:
        cfg.data["seed"] = int(args.seed)
        overrides.append({"field": "seed", "value": int(args.seed)})
    if getattr(args, "frequencies", None):
        _set_path(cfg.data, f"{command}.frequencies", args.frequencies)
        overrides.append({"field": f"{command}.frequencies", "value": args.frequencies})
    for item in args.set or []:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        key, raw = item.split("=", 1)
        value = yaml.safe_load(raw)
        if isinstance(value, (dict, list)):
            raise ConfigError(f"--set only overrides scalar fields ({key})")
        _set_path(cfg.data, key, value)
        overrides.append({"field": key, "value": value})
    return overrides


def parse_spec(cfg: Config):
    if "process" not in cfg.data:
        raise cfg.error("missing 'process' section")
    try:
        return spec_from_dict(cfg.data["process"])
    except SpecError as exc:
        raise cfg.error(str(exc), ("process",) + exc.path) from None


def parse_origin(cfg: Config, spec, seed: int, section: dict = None):
    raw = (section or {}).get("origin", cfg.data.get("origin", STATIONARY))
    if raw in (None, STATIONARY):
        return STATIONARY
    if raw == "drawn":
        return draw_origin(spec, derive_seed(seed, "cli/origin"))
    if not isinstance(raw, dict):
        raise cfg.error("origin must be 'stationary', 'drawn' or a mapping", ("origin",))
    try:
        origin = origin_from_dict(raw)
        check_origin(spec, origin)
        return origin
    except SpecError as exc:
        raise cfg.error(str(exc), ("origin",) + exc.path) from None


def parse_frequencies(cfg: Config, value, seed: int, n: int = None):
    if value is None:
        return None
    try:
        if isinstance(value, str):
            if value.startswith("random:"):
                return FrequencyGrid.uniform_random(int(value.split(":", 1)[1]), derive_seed(seed, "cli/grid"))
            if value == "fourier":
                if n is None:
                    raise ValueError("fourier grid needs n")
                return FrequencyGrid.fourier(n)
            return FrequencyGrid.explicit(float(v) for v in value.split(",") if v.strip())
        return FrequencyGrid.explicit(float(v) for v in np.atleast_1d(value))
    except ValueError as exc:
        raise ConfigError(f"bad frequency list {value!r}: {exc}") from None


def _int(cfg: Config, sec: str, key: str, default):
    v = cfg.section(sec).get(key, default)
    if v is None:
        raise cfg.error(f"{sec}.{key} is required", (sec,))
    try:
        return int(v)
    except (TypeError, ValueError):
        raise cfg.error(f"{sec}.{key} must be an integer", (sec, key)) from None


# ---------------------------------------------------------------------------
# commands; each returns (outputs, flags, summary lines)
# ---------------------------------------------------------------------------


def cmd_simulate(cfg: Config, seed: int, out: str, threads: int):
    spec = parse_spec(cfg)
    n = _int(cfg, "simulate", "n", None)
    origin = parse_origin(cfg, spec, seed, cfg.section("simulate"))
    s = derive_seed(seed, "cli/simulate")
    try:
        traj = sample_stationary(spec, n, s) if origin == STATIONARY else sample_quenched(spec, origin, n, s)
    except SpecError as exc:
        raise cfg.error(str(exc), ("process",) + exc.path) from None
    path = os.path.join(out, "trajectory.csv")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["k", "x"])
        for k, x in enumerate(traj.values, start=1):
            w.writerow([k, repr(float(x))])
    return [path], {}, [f"wrote {n} values to {path}"]


def _read_trajectory(path: str) -> np.ndarray:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ConfigError(f"{path}: empty trajectory file")
    header = rows[0]
    try:
        float(header[-1])
        body, col = rows, len(header) - 1
    except ValueError:
        body = rows[1:]
        col = header.index("x") if "x" in header else len(header) - 1
    try:
        return np.array([float(r[col]) for r in body if r])
    except (ValueError, IndexError) as exc:
        raise ConfigError(f"{path}: unreadable trajectory ({exc})") from None


def cmd_periodogram(cfg: Config, seed: int, out: str, threads: int):
    sec = cfg.section("periodogram")
    spec = None
    if "input" in sec:
        x = _read_trajectory(os.path.join(cfg.base_dir, str(sec["input"])))
        if "process" in cfg.data:
            spec = parse_spec(cfg)
    else:
        spec = parse_spec(cfg)
        n = _int(cfg, "periodogram", "n", None)
        x = sample_stationary(spec, n, derive_seed(seed, "cli/periodogram")).values
    if x.size < 2:
        raise cfg.error("trajectory needs at least 2 values", ("periodogram",))
    n = x.size
    grid = parse_frequencies(cfg, sec.get("frequencies"), seed, n) or FrequencyGrid.fourier(n)
    samples = fourier_batch(x, grid)
    extra = {}
    outputs = []
    summary = {"n": int(n), "grid_kind": grid.kind, "points": len(grid)}
    I = np.array([s.I for s in samples])
    summary["mean_I"] = float(I.mean())
    summary["parseval_mean_I"] = float(np.sum(x * x) / (2 * math.pi * n))
    if spec is not None:
        summary["spec_hash"] = spec_hash(spec)
        if has_analytic_density(spec):
            est = [spectral_density(spec, t) for t in grid.points]
            extra["f"] = [e.f for e in est]
            dpath = os.path.join(out, "density.csv")
            write_density_csv(dpath, est)
            outputs.append(dpath)
            summary["mean_I_over_f"] = float(np.mean(I / np.array(extra["f"])))
    path = os.path.join(out, "periodogram.csv")
    write_samples_csv(path, samples, extra)
    rpath = os.path.join(out, "report.json")
    write_json(rpath, summary)
    return [path] + outputs + [rpath], {}, [f"mean periodogram {summary['mean_I']:.6g} over {len(grid)} points"]


def cmd_quenched(cfg: Config, seed: int, out: str, threads: int):
    spec = parse_spec(cfg)
    sec = cfg.section("quenched")
    n = _int(cfg, "quenched", "n", 4096)
    R = _int(cfg, "quenched", "R", 2000)
    grid = parse_frequencies(cfg, sec.get("frequencies", [1.0]), seed, n)
    origin = parse_origin(cfg, spec, seed, sec)
    if origin == STATIONARY:
        origin = "drawn"
    try:
        config = ExperimentConfig(
            spec, grid, n, R, derive_seed(seed, "cli/quenched"), origin,
            centering=sec.get("centering", "none"), tolerances=sec.get("tolerances") or {},
            allow_excluded=bool(sec.get("allow_excluded", False)), threads=threads,
        )
        report = run_quenched(config)
    except SpecError as exc:
        raise cfg.error(str(exc), ("quenched",) + exc.path) from None
    resolved = origin_from_dict(report.provenance["origin"])
    ladder = sec.get("ladder", [256, 1024, 4096, 16384])
    t_decay = float(sec.get("decay_t", grid.points[0]))
    decay = centering_decay(spec, resolved, t_decay, ladder)
    flags = dict(report.flags)
    flags["centering_decay"] = bool(decay["flag"])
    body = report.to_dict()
    body["centering_decay"] = decay
    rk = sec.get("raikov") or {}
    if rk.get("enabled", True) and isinstance(spec, (LinearProcess, FiniteMarkovFn)):
        rk_ns = rk.get("ns", [256, 1024, 4096])
        rk_R = int(rk.get("R", 500))
        rk_seed = derive_seed(seed, "cli/raikov")
        for f in report.frequencies:
            t = f["t"]
            try:
                d = raikov_for_spec(spec, resolved, t, rk_ns, rk_R, rk_seed,
                                    float(rk.get("a", 1.0)), float(rk.get("b", 0.0)))
            except SingularResolventError:
                continue
            f["raikov"] = d
            flags[f"t={t:.6g}:raikov_max_decreasing"] = d["max_decreasing"]
            flags[f"t={t:.6g}:raikov_quad_var"] = d["quad_var_ok"]
        body["frequencies"] = report.frequencies
    body["flags"] = flags
    body["passed"] = all(flags.values())
    body["failures"] = sorted(k for k, v in flags.items() if not v)
    rpath = os.path.join(out, "report.json")
    write_json(rpath, body)
    raw = os.path.join(out, "raw.csv")
    write_raw_csv(raw, report)
    outputs = [rpath, raw]
    if has_analytic_density(spec):
        dpath = os.path.join(out, "density.csv")
        write_density_csv(dpath, [spectral_density(spec, t) for t in grid.points])
        outputs.append(dpath)
    lines = []
    for f in report.frequencies:
        if f.get("degenerate"):
            lines.append(f"t={f['t']:.4g}: degenerate limit (zero variance)")
        else:
            lines.append(
                f"t={f['t']:.4g}: KS {max(f['ks']):.4f}  corr {f['cross_corr']:+.4f}  "
                f"var err {max(abs(v) for v in f['var_rel_error']):.3f}"
            )
    return outputs, flags, lines


def cmd_conditions(cfg: Config, seed: int, out: str, threads: int):
    spec = parse_spec(cfg)
    sec = cfg.section("conditions")
    t = float(sec.get("t", 1.0))
    K = _int(cfg, "conditions", "K", 10**6)
    rpath = os.path.join(out, "conditions.json")
    try:
        reports = check_all(spec, t, derive_seed(seed, "cli/conditions"), K)
    except OutOfScopeError as exc:
        ladder = sec.get("ladder", [256, 1024, 4096])
        growth = variance_growth(spec, 0.0, ladder)
        vpath = os.path.join(out, "variance_divergence.csv")
        with open(vpath, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["n", "var_over_n", "ratio"])
            for r in growth:
                w.writerow([r["n"], repr(float(r["var_over_n"])), "" if r["ratio"] is None else repr(float(r["ratio"]))])
        ok = all(r["ratio"] is None or r["ratio"] > 1 for r in growth)
        write_json(rpath, {"out_of_scope": str(exc), "variance_growth_t0": growth})
        return [rpath, vpath], {"variance_divergence_exhibited": ok}, [f"out of scope: {exc}"]
    except SpecError as exc:
        raise cfg.error(str(exc), ("conditions",)) from None
    body = {"spec_hash": spec_hash(spec), "t": t, "reports": [r.to_dict() for r in reports]}
    if isinstance(spec, FiniteMarkovFn):
        ks = list(range(1, 11))
        body["rio_bound"] = {"literal": rio_table(spec, ks, 1.0), "normalized_2alpha": rio_table(spec, ks, 2.0)}
    write_json(rpath, body)
    flags = {r.condition_id: r.holds for r in reports}
    width = max(len(r.condition_id) for r in reports)
    lines = [f"{r.condition_id:<{width}}  {r.verdict:<15}  {r.majorant}" for r in reports]
    return [rpath], flags, lines


def cmd_martingale(cfg: Config, seed: int, out: str, threads: int):
    spec = parse_spec(cfg)
    sec = cfg.section("martingale")
    t = float(sec.get("t", 1.0))
    ns = [int(v) for v in sec.get("ns", [256, 1024, 4096])]
    R = _int(cfg, "martingale", "R", 2000)
    origin = parse_origin(cfg, spec, seed, sec)
    if origin == STATIONARY:
        origin = draw_origin(spec, derive_seed(seed, "cli/martingale/origin"))
    s = derive_seed(seed, "cli/martingale")
    try:
        kernel = martingale_kernel(spec, t, strict=bool(sec.get("strict", False)))
        gaps = gap_curve(spec, origin, ns, t, R, s, strict=kernel.strict)
    except (SpecError, SingularResolventError) as exc:
        raise cfg.error(str(exc), ("martingale",)) from None
    gpath = os.path.join(out, "gap.csv")
    write_gap_csv(gpath, gaps)
    tn = int(sec.get("telescoping_n", 64))
    terms = telescoping_decomposition(spec, origin, tn, t)
    lhs = (1 - np.exp(1j * t)) * conditional_mean_S(spec, origin, tn, t)
    residual = abs(sum(terms) - lhs)
    flags = {
        "gap_decay": gaps[-1].gap < gaps[0].gap / 4 + 3 * gaps[-1].stderr,
        "telescoping": residual < 1e-9,
    }
    body = {
        "spec_hash": spec_hash(spec), "t": t, "origin": origin.to_dict(),
        "gaps": [{"n": g.n, "gap": g.gap, "stderr": g.stderr} for g in gaps],
        "telescoping": {"n": tn, "terms": list(terms), "lhs": lhs, "residual": residual},
    }
    if kernel.kind == "markov":
        body["resolvent"] = {"g": kernel.g, "residual": kernel.residual, "condition": kernel.cond}
        flags["resolvent"] = kernel.residual < 1e-10
    else:
        body["kernel_c"] = kernel.c
    rpath = os.path.join(out, "report.json")
    write_json(rpath, body)
    lines = [f"n={g.n}: gap {g.gap:.4g} +- {g.stderr:.2g}" for g in gaps]
    lines.append(f"telescoping residual {residual:.3g}")
    return [gpath, rpath], flags, lines


HANDLERS = {
    "simulate": cmd_simulate,
    "periodogram": cmd_periodogram,
    "quenched": cmd_quenched,
    "conditions": cmd_conditions,
    "martingale": cmd_martingale,
}


# ---------------------------------------------------------------------------
# driver
# ---------------------------------------------------------------------------


def execute(command: str, cfg: Config, out: str, threads: int, overrides: list, stdout=None) -> int:
    stdout = stdout or sys.stdout
    os.makedirs(out, exist_ok=True)
    seed = int(cfg.data.get("seed", 0))
    started = time.perf_counter()
    outputs, flags, lines = HANDLERS[command](cfg, seed, out, threads)
    failures = sorted(k for k, v in flags.items() if not v)
    if failures:
        fpath = os.path.join(out, "failures.json")
        write_json(fpath, {"command": command, "failures": failures})
        outputs.append(fpath)
    for line in lines:
        print(line, file=stdout)
    manifest = {
        "command": command,
        "config_path": cfg.path,
        "config": cfg.data,
        "config_dir": cfg.base_dir,
        "seed": seed,
        "version": __version__,
        "threads": threads,
        "overrides": overrides,
        "outputs": [{"path": os.path.relpath(p, out), "sha256": sha256_file(p)} for p in outputs],
        "flags": flags,
        "wall_clock_seconds": time.perf_counter() - started,
    }
    write_json(os.path.join(out, "manifest.json"), manifest)
    print(f"{'PASS' if not failures else 'FAIL'}: {command} ({len(flags)} flags, {len(failures)} failed)", file=stdout)
    return 0 if not failures else 1


def replay(manifest_path: str, out: str = None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    import json

    with open(manifest_path) as fh:
        man = json.load(fh)
    out = out or os.path.join(os.path.dirname(os.path.abspath(manifest_path)), "replay")
    cfg = Config(copy.deepcopy(man["config"]), man.get("config_path"))
    if man.get("config_dir"):
        cfg.path = os.path.join(man["config_dir"], os.path.basename(man.get("config_path") or "config.yaml"))
    code = execute(man["command"], cfg, out, int(man.get("threads", 1)), man.get("overrides", []), stdout)
    mismatched = []
    for entry in man["outputs"]:
        p = os.path.join(out, entry["path"])
        if not os.path.exists(p) or sha256_file(p) != entry["sha256"]:
            mismatched.append(entry["path"])
    if mismatched:
        print(f"replay differs: {', '.join(mismatched)}", file=stdout)
        return 1
    print("replay reproduced every output byte-for-byte", file=stdout)
    return code


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qfourier", description="Quenched Fourier-sum experiments.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    helps = {
        "simulate": "write one trajectory X_1..X_n",
        "periodogram": "Fourier transforms and periodogram over a frequency grid",
        "quenched": "compare conditional and annealed laws of the normalized Fourier sums",
        "conditions": "numerical verdicts for the sufficient conditions",
        "martingale": "martingale approximation gap and telescoping check",
    }
    for name in COMMANDS:
        sp = sub.add_parser(name, help=helps.get(name, name))
        sp.add_argument("--config", required=True, help="YAML run description")
        sp.add_argument("--seed", type=int, help="override the config seed")
        sp.add_argument("--out", default="out", help="output directory (default: out)")
        sp.add_argument("--threads", type=int, default=1, help="worker threads for replicate batches")
        sp.add_argument("--frequencies", help="comma list of t values, 'fourier' or random:K")
        sp.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a scalar config field")
    rp = sub.add_parser("replay", help="rerun from a manifest and compare digests")
    rp.add_argument("manifest")
    rp.add_argument("--out", help="output directory (default: <manifest dir>/replay)")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "replay":
            return replay(args.manifest, args.out)
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        cfg = Config.load(args.config)
        overrides = apply_overrides(cfg, args.command, args)
        return execute(args.command, cfg, args.out, args.threads, overrides)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
