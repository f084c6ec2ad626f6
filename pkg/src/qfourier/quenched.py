"""Quenched Monte Carlo experiments.

An experiment freezes one origin (a realisation of the past), draws ``R``
independent futures from it and looks at the normalised Fourier sums
``V_n(t)`` (no centering) or ``W_n(t)`` (conditional centering) across the
replicates.  The limit law is a pair of independent centred normals with
variance ``sigma_t^2 / 2`` each; the periodogram divided by ``f(t)`` should
be exponential with mean 1.
"""
from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .fourier import TWO_PI, FrequencyGrid, dft_many, is_excluded
from .martingale import (
    MartingaleKernel,
    conditional_mean_S,
    martingale_increments,
    martingale_kernel,
)
from .models import (
    GaussianLRD,
    PathBatch,
    SpecError,
    check_origin,
    draw_origin,
    simulate_paths,
    spec_hash,
)
from .rng import derive_seed
from .spectral import exact_variance_S, has_analytic_density, spectral_density

DEFAULT_TOLERANCES = {
    "ks": 0.04,
    "cross_corr": 0.07,
    "var_rel": 0.10,
    "pgram_mean_lo": 0.9,
    "pgram_mean_hi": 1.1,
    "pgram_ks": 0.05,
}


@dataclass
class ExperimentConfig:
    spec: object
    grid: tuple
    n: int
    R: int
    seed: int
    origin: object = "drawn"
    centering: str = "none"
    tolerances: dict = field(default_factory=dict)
    allow_excluded: bool = False
    threads: int = 1

    def __post_init__(self):
        if isinstance(self.grid, FrequencyGrid):
            self.grid = self.grid.points
        self.grid = tuple(float(t) for t in np.atleast_1d(self.grid))
        if self.R < 100:
            raise SpecError("R must be >= 100", ("R",))
        if self.n < 64:
            raise SpecError("n must be >= 64", ("n",))
        if self.centering not in ("none", "conditional"):
            raise SpecError(f"centering must be 'none' or 'conditional', got {self.centering!r}", ("centering",))
        bad = [t for t in self.grid if is_excluded(t) or not 0 < t < TWO_PI]
        if bad and not self.allow_excluded:
            raise SpecError(f"grid contains excluded frequencies {bad}; set allow_excluded to override", ("grid",))
        if self.origin != "drawn":
            check_origin(self.spec, self.origin)
        tol = dict(DEFAULT_TOLERANCES)
        tol.update(self.tolerances)
        self.tolerances = tol


@dataclass
class TestReport:
    provenance: dict
    frequencies: list
    flags: dict
    findings: dict = field(default_factory=dict)
    raw: np.ndarray = None  # (R * G, 6): t, re_V, im_V, re_W, im_W, I

    __test__ = False  # not a pytest class

    @property
    def passed(self) -> bool:
        return all(self.flags.values())

    @property
    def failures(self) -> list:
        return sorted(k for k, v in self.flags.items() if not v)

    def to_dict(self) -> dict:
        return {
            "provenance": self.provenance,
            "frequencies": self.frequencies,
            "flags": self.flags,
            "passed": self.passed,
            "failures": self.failures,
            "findings": self.findings,
        }


RAW_HEADER = ["t", "re_V", "im_V", "re_W", "im_W", "I"]


def write_raw_csv(path, report: TestReport) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RAW_HEADER)
        for row in report.raw:
            w.writerow([repr(float(v)) for v in row])


def simulate_chunked(spec, n, seed, R, origin, threads: int = 1, chunk: int = 250) -> PathBatch:
    """:func:`simulate_paths` split into replicate chunks, optionally threaded.

    Rows depend only on their replicate index, so the result is identical
    for any thread count.
    """
    starts = list(range(0, R, chunk))
    sizes = [min(chunk, R - s) for s in starts]

    def run(i):
        return simulate_paths(spec, n, seed, sizes[i], origin, start=starts[i])

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(run, range(len(starts))))
    else:
        parts = [run(i) for i in range(len(starts))]
    first = parts[0]
    return PathBatch(
        np.vstack([p.values for p in parts]),
        np.vstack([p.latent for p in parts]),
        first.origin, first.seed, first.spec_hash, 0,
    )


def _resolve_origin(spec, origin, seed):
    if origin == "drawn" or origin is None:
        return draw_origin(spec, derive_seed(seed, "quenched_mc/origin"))
    return origin


def _centres(spec, origin, n, ts):
    try:
        return np.array([conditional_mean_S(spec, origin, n, t) for t in ts]), True
    except (SpecError, ValueError):
        return np.zeros(len(ts), dtype=complex), False


def _ks_normal(x: np.ndarray, var: float) -> float:
    return float(stats.kstest(x, "norm", args=(0.0, math.sqrt(var))).statistic)


def run_quenched(config: ExperimentConfig) -> TestReport:
    spec, n, R = config.spec, config.n, config.R
    tol = config.tolerances
    origin = _resolve_origin(spec, config.origin, config.seed)
    ts = np.array(config.grid)
    batch = simulate_chunked(spec, n, derive_seed(config.seed, "quenched_mc/paths"), R, origin, config.threads)
    S = dft_many(batch.values, ts)
    centres, have_centres = _centres(spec, origin, n, ts)
    if config.centering == "conditional" and not have_centres:
        raise SpecError(f"conditional centering is not available for {spec.kind}", ("centering",))
    root = math.sqrt(n)
    V = S / root
    W = (S - centres[None, :]) / root
    I = (S.real**2 + S.imag**2) / (TWO_PI * n)
    tested = W if config.centering == "conditional" else V
    analytic = has_analytic_density(spec)

    per_freq, flags = [], {}
    findings = {"periodogram_constant": []}
    for g, t in enumerate(ts):
        tag = f"t={t:.6g}"
        x, y = tested[:, g].real, tested[:, g].imag
        mean = [float(x.mean()), float(y.mean())]
        cov = np.cov(np.vstack([x, y]), ddof=1)
        method, f = "empirical", None
        if analytic:
            est = spectral_density(spec, float(t))
            f = est.f
            sigma2 = est.sigma2
            method = est.method
        else:
            c = W[:, g]
            sigma2 = float(np.mean(c.real**2 + c.imag**2))
        target = sigma2 / 2
        entry = {
            "t": float(t), "sigma2_target": sigma2, "target_method": method,
            "component_target_variance": target, "mean": mean,
            "covariance": cov.tolist(), "excluded": bool(is_excluded(t)),
        }
        if target <= 0 or cov[0, 0] <= 0 or cov[1, 1] <= 0:
            entry["degenerate"] = True
            entry["cross_corr"] = None
            flags[f"{tag}:degenerate_limit"] = bool(np.allclose(cov, 0.0, atol=1e-24) and target <= 1e-24)
            per_freq.append(entry)
            continue
        corr = float(cov[0, 1] / math.sqrt(cov[0, 0] * cov[1, 1]))
        ks = [_ks_normal(x, target), _ks_normal(y, target)]
        var_rel = [float(cov[0, 0] / target - 1), float(cov[1, 1] / target - 1)]
        entry.update(degenerate=False, cross_corr=corr, ks=ks, var_rel_error=var_rel)
        flags[f"{tag}:ks_re"] = ks[0] < tol["ks"]
        flags[f"{tag}:ks_im"] = ks[1] < tol["ks"]
        flags[f"{tag}:cross_corr"] = abs(corr) < tol["cross_corr"]
        flags[f"{tag}:var_re"] = abs(var_rel[0]) < tol["var_rel"]
        flags[f"{tag}:var_im"] = abs(var_rel[1]) < tol["var_rel"]
        if f is not None and f > 0:
            ratio = I[:, g] / f
            pg_mean = float(ratio.mean())
            pg_ks = float(stats.kstest(ratio, "expon").statistic)
            chi2_ks = float(stats.kstest(ratio, "chi2", args=(2,)).statistic)
            entry["periodogram"] = {"f": f, "mean_ratio": pg_mean, "ks_exponential_mean1": pg_ks}
            flags[f"{tag}:pgram_mean"] = tol["pgram_mean_lo"] <= pg_mean <= tol["pgram_mean_hi"]
            flags[f"{tag}:pgram_ks"] = pg_ks < tol["pgram_ks"]
            findings["periodogram_constant"].append({
                "t": float(t), "mean_I_over_f": pg_mean,
                "ks_vs_exponential_mean1": pg_ks, "ks_vs_chi2_2": chi2_ks,
                "consistent_reading": "exponential mean 1" if pg_ks < chi2_ks else "chi2(2)",
            })
        per_freq.append(entry)

    G = len(ts)
    raw = np.empty((R * G, 6))
    raw[:, 0] = np.tile(ts, R)
    raw[:, 1] = V.real.ravel()
    raw[:, 2] = V.imag.ravel()
    raw[:, 3] = W.real.ravel()
    raw[:, 4] = W.imag.ravel()
    raw[:, 5] = I.ravel()
    provenance = {
        "seed": int(config.seed), "R": int(R), "n": int(n), "spec_hash": spec_hash(spec),
        "spec": spec.to_dict(), "origin": origin.to_dict(),
        "origin_policy": "drawn" if config.origin == "drawn" else "explicit",
        "centering": config.centering, "grid": [float(t) for t in ts], "tolerances": tol,
    }
    return TestReport(provenance, per_freq, flags, findings, raw)


# ---------------------------------------------------------------------------
# centering decay
# ---------------------------------------------------------------------------


def centering_decay(spec, origin, t: float, ns, expect: str = None) -> dict:
    """``|E_0 S_n(t)| / sqrt(n)`` along a ladder of lengths.

    ``expect="decay"`` flags any quadrupling of ``n`` that fails to shrink
    the ratio by ``sqrt(2)``; ``expect="non-decay"`` (the long-memory
    regime at ``t = 0``) instead tabulates ``E S_n(t)^2 / n`` and flags it
    if it does *not* grow.
    """
    ns = [int(v) for v in ns]
    if expect is None:
        expect = "non-decay" if isinstance(spec, GaussianLRD) and math.cos(t) > 1 - 1e-12 else "decay"
    rows = []
    prev = None
    for n in ns:
        try:
            value = abs(conditional_mean_S(spec, origin, n, t)) / math.sqrt(n)
        except SpecError:
            value = None
        row = {"n": n, "ratio": value, "step_factor": None}
        if prev is not None and value is not None and prev > 0:
            row["step_factor"] = value / prev
        rows.append(row)
        prev = value
    out = {"t": float(t), "expect": expect, "rows": rows}
    if expect == "decay":
        ok = True
        for a, b in zip(rows, rows[1:]):
            if a["ratio"] is None or b["ratio"] is None:
                continue
            if a["ratio"] == 0 and b["ratio"] == 0:
                continue
            if b["n"] == 4 * a["n"] and b["ratio"] > a["ratio"] / math.sqrt(2) * (1 + 1e-9):
                ok = False
        out["flag"] = ok
    else:
        growth = []
        prev = None
        for n in ns:
            v = exact_variance_S(spec, n, t) / n
            growth.append({"n": n, "var_over_n": v, "step_factor": v / prev if prev else None})
            prev = v
        out["variance_growth"] = growth
        out["flag"] = all(r["step_factor"] is None or r["step_factor"] > 1 for r in growth)
    return out


# ---------------------------------------------------------------------------
# conditional variance ladder
# ---------------------------------------------------------------------------


def conditional_variance_ladder(spec, origin, t: float, ns, R: int, seed: int) -> list:
    """``(1/n) E_0 |S_n - E_0 S_n|^2`` by Monte Carlo, with the analytic limit when known."""
    target = spectral_density(spec, t).sigma2 if has_analytic_density(spec) else None
    rows = []
    for n in ns:
        batch = simulate_paths(spec, n, derive_seed(seed, "quenched_mc/ladder"), R, origin)
        S = dft_many(batch.values, [t])[:, 0]
        c = S - conditional_mean_S(spec, origin, n, t)
        sq = (c.real**2 + c.imag**2) / n
        rows.append({
            "n": int(n), "estimate": float(sq.mean()), "stderr": float(sq.std(ddof=1) / math.sqrt(R)),
            "target": target,
        })
    return rows


# ---------------------------------------------------------------------------
# Raikov-type diagnostics
# ---------------------------------------------------------------------------


def increment_variance(spec, kernel: MartingaleKernel) -> float:
    """``E|D_k(t)|^2`` under the stationary law."""
    if kernel.kind == "linear":
        return float(abs(kernel.c) ** 2 * spec.variance)
    pi = spec.pi
    return float(pi @ np.abs(kernel.g) ** 2 - pi @ np.abs(kernel.Qg) ** 2)


def martingale_increment_sample(spec, origin, t: float, n: int, R: int, seed: int) -> np.ndarray:
    """``(R, n)`` complex array of ``D_k(t)``, ``k = 1..n``, from quenched futures."""
    kernel = martingale_kernel(spec, t)
    if origin is None:
        origin = draw_origin(spec, derive_seed(seed, "quenched_mc/raikov/origin"))
    batch = simulate_paths(spec, n, derive_seed(seed, "quenched_mc/raikov"), R, origin)
    phase = np.exp(1j * t * np.arange(1, n + 1))
    return martingale_increments(kernel, batch.latent) * phase[None, :]


def raikov_diagnostics(samples: dict, a: float = None, b: float = None, sigma_D2: float = None) -> dict:
    """Maximal-increment and quadratic-variation diagnostics along an ``n`` ladder.

    ``samples`` maps ``n`` to an ``(R, n)`` complex array of increments ``D_k``.
    With ``a`` and ``b`` given the diagnostics use ``Y_k = a Re D_k + b Im D_k``
    (target ``(a^2 + b^2) sigma_D2 / 2``); otherwise ``Y_k = |D_k|`` (target ``sigma_D2``).
    ``sigma_D2`` defaults to the pooled empirical ``E|D|^2`` at the largest ``n``.
    """
    if len(samples) < 2:
        raise ValueError("raikov_diagnostics needs at least 2 ladder points")
    if (a is None) != (b is None):
        raise ValueError("give both a and b, or neither")
    ns = sorted(samples)
    if sigma_D2 is None:
        D = samples[ns[-1]]
        sigma_D2 = float(np.mean(D.real**2 + D.imag**2))
    modulus = a is None
    target = sigma_D2 if modulus else (a * a + b * b) * sigma_D2 / 2
    rows = []
    for n in ns:
        D = np.asarray(samples[n])
        if D.shape[1] != n:
            raise ValueError(f"sample for n={n} has {D.shape[1]} columns")
        Y = np.abs(D) if modulus else a * D.real + b * D.imag
        mx = np.abs(Y).max(axis=1) / math.sqrt(n)
        qv = (Y * Y).sum(axis=1) / n
        R = D.shape[0]
        rows.append({
            "n": int(n),
            "max_stat": float(mx.mean()), "max_stat_stderr": float(mx.std(ddof=1) / math.sqrt(R)) if R > 1 else 0.0,
            "quad_var": float(qv.mean()), "quad_var_spread": float(qv.std(ddof=1)) if R > 1 else 0.0,
            "quad_var_rel_error": float(qv.mean() / target - 1) if target > 0 else 0.0,
        })
    mx = np.array([r["max_stat"] for r in rows])
    out = {
        "projection": "modulus" if modulus else {"a": float(a), "b": float(b)}, "sigma_D2": float(sigma_D2), "target": float(target), "rows": rows,
        "max_decreasing": bool(np.all(np.diff(mx) < 0)) if np.any(mx > 0) else True,
    }
    if np.all(mx > 0):
        slope, _ = np.polyfit(np.log(ns), np.log(mx), 1)
        out["max_log_slope"] = float(slope)
    return out


def raikov_for_spec(spec, origin, t: float, ns, R: int, seed: int, a: float = 1.0, b: float = 0.0,
                    quad_tol: float = 0.05) -> dict:
    """:func:`raikov_diagnostics` on quenched increments of ``spec`` with the exact ``E|D|^2``.

    Adds ``quad_var_ok`` (relative error at the largest ``n`` below ``quad_tol``).
    """
    kernel = martingale_kernel(spec, t)
    samples = {int(n): martingale_increment_sample(spec, origin, t, int(n), R, derive_seed(seed, f"n={int(n)}"))
               for n in ns}
    out = raikov_diagnostics(samples, a, b, increment_variance(spec, kernel))
    out["t"] = float(t)
    out["R"] = int(R)
    out["quad_var_ok"] = bool(abs(out["rows"][-1]["quad_var_rel_error"]) < quad_tol)
    return out


__all__ = [
    "DEFAULT_TOLERANCES",
    "ExperimentConfig",
    "TestReport",
    "centering_decay",
    "conditional_variance_ladder",
    "increment_variance",
    "martingale_increment_sample",
    "raikov_diagnostics",
    "raikov_for_spec",
    "run_quenched",
    "simulate_chunked",
    "write_raw_csv",
]
