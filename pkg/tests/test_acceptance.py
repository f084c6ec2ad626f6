"""Acceptance suite: one test per criterion, each at its stated tolerance.

Every test records a single PASS/FAIL line (see ``conftest.py``); the lines
are repeated in the pytest terminal summary.  All Monte Carlo work uses the
fixed seed below.
"""
import json
import math
import time
from pathlib import Path

import numpy as np

from qfourier import catalog
from qfourier.cli import main as cli_main
from qfourier.conditions import (
    HOLDS_ANALYTIC,
    check_cond14,
    check_cond15,
    check_condMW,
    check_irf,
    check_mixing,
    check_sufcond,
    rio_table,
)
from qfourier.fourier import FrequencyGrid, dft_fourier
from qfourier.martingale import (
    conditional_mean_S,
    lemma1_gap,
    markov_conditional_mean_S,
    resolvent,
    telescoping_decomposition,
)
from qfourier.models import (
    Coefficients,
    InnovationDist,
    LinearPast,
    LinearProcess,
    MarkovStart,
    random_reversible_chain,
)
from qfourier.quenched import ExperimentConfig, centering_decay, raikov_for_spec, run_quenched
from qfourier.rng import stream
from qfourier.spectral import exact_variance_S, spectral_density, variance_growth

SEED = 20140101
CONFIGS = Path(__file__).resolve().parents[1] / "configs"
EXCLUDED = (math.pi / 2, math.pi, 3 * math.pi / 2)


def random_frequency(rng):
    while True:
        t = rng.uniform(0.05, 2 * math.pi - 0.05)
        if min(abs(t - e) for e in EXCLUDED) > 0.05:
            return t


def quenched_summary(report):
    ks = max(max(f["ks"]) for f in report.frequencies)
    corr = max(abs(f["cross_corr"]) for f in report.frequencies)
    var = max(max(abs(v) for v in f["var_rel_error"]) for f in report.frequencies)
    return ks, corr, var


# ---------------------------------------------------------------------------
# 1. exact identities
# ---------------------------------------------------------------------------


def test_criterion_1_exact_identities(criterion):
    rng = stream(SEED, "acceptance/identities")
    timings, worst = {}, {}

    start = time.perf_counter()
    res = 0.0
    for _ in range(100):
        n = int(rng.integers(2, 1025))
        x = rng.standard_normal(n)
        S = dft_fourier(x)
        res = max(res, abs(np.sum(np.abs(S) ** 2) - n * np.sum(x**2)) / (n * np.sum(x**2)))
    timings["a"], worst["a"] = time.perf_counter() - start, res

    start = time.perf_counter()
    res = 0.0
    for i in range(100):
        t = random_frequency(rng)
        n = int(rng.integers(2, 500))
        if i % 2:
            spec = catalog.ar1(float(rng.uniform(-0.95, 0.95)))
            origin = LinearPast(tuple(rng.standard_normal(int(rng.integers(1, 40)))))
        else:
            spec = random_reversible_chain(int(rng.integers(2, 6)), rng)
            origin = MarkovStart(int(rng.integers(0, spec.m)))
        parts = telescoping_decomposition(spec, origin, n, t)
        lhs = (1 - np.exp(1j * t)) * conditional_mean_S(spec, origin, n, t)
        res = max(res, abs(sum(parts) - lhs))
    timings["b"], worst["b"] = time.perf_counter() - start, res

    start = time.perf_counter()
    res = 0.0
    chains = [random_reversible_chain(int(rng.integers(2, 7)), rng) for _ in range(100)]
    for spec in chains:
        t = random_frequency(rng)
        g = resolvent(spec, t).g
        res = max(res, float(np.max(np.abs(spec.hvec - (g - np.exp(1j * t) * spec.Q @ g)))))
    timings["c"], worst["c"] = time.perf_counter() - start, res

    start = time.perf_counter()
    res = 0.0
    for spec in chains[:50]:
        t = random_frequency(rng)
        closed = markov_conditional_mean_S(spec, 200, t)
        direct = np.zeros(spec.m, dtype=complex)
        v = spec.hvec.copy()
        for k in range(1, 201):
            v = spec.Q @ v
            direct += np.exp(1j * k * t) * v
        res = max(res, float(np.max(np.abs(closed - direct))))
    timings["d"], worst["d"] = time.perf_counter() - start, res

    limits = {"a": 1e-8, "b": 1e-9, "c": 1e-10, "d": 1e-10}
    ok = all(worst[k] < limits[k] and timings[k] < 1.0 for k in limits)
    detail = "  ".join(f"{k}: {worst[k]:.1e} (<{limits[k]:.0e}, {timings[k]:.2f}s)" for k in limits)
    criterion("1", ok, detail)
    assert ok


# ---------------------------------------------------------------------------
# 2. variance law
# ---------------------------------------------------------------------------


def test_criterion_2_variance_law(criterion):
    start = time.perf_counter()
    n = 1 << 16
    grid = FrequencyGrid.uniform_random(16, SEED)
    worst = 0.0
    for spec in (catalog.ar1(0.5), catalog.flip_chain()):
        for t in grid.points:
            ratio = exact_variance_S(spec, n, t) / n / (2 * math.pi * spectral_density(spec, t).f)
            worst = max(worst, abs(ratio - 1))
    elapsed = time.perf_counter() - start
    ok = worst < 0.02 and elapsed < 10
    criterion("2", ok, f"max |Var S_n/n / 2 pi f - 1| = {worst:.2e} (<2e-2) over 2 x 16 frequencies, {elapsed:.1f}s")
    assert ok


# ---------------------------------------------------------------------------
# 3. quenched CLT
# ---------------------------------------------------------------------------


def test_criterion_3_quenched_clt(criterion):
    ar1 = run_quenched(ExperimentConfig(
        catalog.ar1(0.5), (0.7, 1.0, 2.0), n=1 << 12, R=2000, seed=SEED, origin=LinearPast((5.0,)),
    ))
    chain = run_quenched(ExperimentConfig(
        catalog.three_state_chain(), (0.7, 1.0, 2.0), n=1 << 12, R=2000, seed=SEED,
        origin=MarkovStart(2), centering="conditional",
    ))
    keep = lambda rep: {k: v for k, v in rep.flags.items() if k.split(":")[1] in
                        ("ks_re", "ks_im", "cross_corr", "var_re", "var_im")}
    flags = {**{f"ar1 {k}": v for k, v in keep(ar1).items()}, **{f"chain {k}": v for k, v in keep(chain).items()}}
    ok = all(flags.values()) and len(flags) == 30
    a, c = quenched_summary(ar1), quenched_summary(chain)
    criterion("3", ok, (
        f"AR(1) V_n: KS {a[0]:.4f} corr {a[1]:.4f} var {a[2]:.3f};  "
        f"chain W_n: KS {c[0]:.4f} corr {c[1]:.4f} var {c[2]:.3f}  (limits 0.04 / 0.07 / 0.10)"
    ))
    assert ok, sorted(k for k, v in flags.items() if not v)


# ---------------------------------------------------------------------------
# 4. centering decay
# ---------------------------------------------------------------------------


def test_criterion_4_centering_decay(criterion):
    start = time.perf_counter()
    ladder = [1 << e for e in range(8, 15, 2)]
    factors = []
    for t in (0.7, 1.0, 2.0):
        out = centering_decay(catalog.ar1(0.5), LinearPast((5.0,)), t, ladder)
        factors += [r["step_factor"] for r in out["rows"][1:]]
    elapsed = time.perf_counter() - start
    ok = all(0.4 <= f <= 0.6 for f in factors) and elapsed < 1
    criterion("4", ok, f"step factors per 4x n in [{min(factors):.4f}, {max(factors):.4f}] (target 0.5 +- 20%), {elapsed:.2f}s")
    assert ok


# ---------------------------------------------------------------------------
# 5. martingale approximation gap
# ---------------------------------------------------------------------------


def test_criterion_5_gap_decay(criterion):
    cases = {"AR(1)": (catalog.ar1(0.5), LinearPast((5.0,))), "chain": (catalog.three_state_chain(), MarkovStart(2))}
    ok, parts = True, []
    for name, (spec, origin) in cases.items():
        g0 = lemma1_gap(spec, origin, 1 << 8, 1.0, 2000, SEED)
        g1 = lemma1_gap(spec, origin, 1 << 12, 1.0, 2000, SEED)
        limit = g0.gap / 4 + 3 * g1.stderr
        ok &= g1.gap < limit
        parts.append(f"{name}: {g1.gap:.3g} vs {g0.gap:.3g}/4 + 3SE = {limit:.3g}")
    criterion("5", ok, ";  ".join(parts))
    assert ok


# ---------------------------------------------------------------------------
# 6. periodogram limit
# ---------------------------------------------------------------------------


def test_criterion_6_periodogram(criterion):
    rep = run_quenched(ExperimentConfig(catalog.ar1(0.5), (1.0,), n=1 << 12, R=2000, seed=SEED))
    pg = rep.frequencies[0]["periodogram"]
    finding = rep.findings["periodogram_constant"][0]
    ok = 0.9 <= pg["mean_ratio"] <= 1.1 and pg["ks_exponential_mean1"] < 0.05
    criterion("6", ok, (
        f"mean I/f = {pg['mean_ratio']:.4f}, KS vs Exp(1) = {pg['ks_exponential_mean1']:.4f} "
        f"(KS vs chi2(2) = {finding['ks_vs_chi2_2']:.3f})"
    ))
    assert ok


# ---------------------------------------------------------------------------
# 7. long-memory counterexample
# ---------------------------------------------------------------------------


def test_criterion_7_long_memory_growth(criterion):
    start = time.perf_counter()
    rows = variance_growth(catalog.long_memory(0.4, "identity"), 0.0, [1024, 4096])
    ratio = rows[1]["ratio"]
    elapsed = time.perf_counter() - start
    target = 4**0.6
    ok = abs(ratio / target - 1) <= 0.15 and elapsed < 5
    criterion("7", ok, f"E S_n(0)^2/n grows by {ratio:.4f} (target {target:.4f} +- 15%), {elapsed:.2f}s")
    assert ok


# ---------------------------------------------------------------------------
# 8. condition lab
# ---------------------------------------------------------------------------


def test_criterion_8_condition_lab(criterion):
    ar1 = catalog.ar1(0.5)
    verdicts = {
        "ar1 cond-16": check_sufcond(ar1).verdict,
        "ar1 cond-15": check_cond15(ar1).verdict,
        "ar1 cond-14": check_cond14(ar1).verdict,
        "chain cond-18": check_condMW(catalog.three_state_chain(), 1.0).verdict,
        "flip shortcut": check_mixing(catalog.flip_chain()).extra["shortcut"]["verdict"],
    }
    analytic = all(v == HOLDS_ANALYTIC for v in verdicts.values())

    rng = stream(SEED, "acceptance/rio")
    violations = 0
    for _ in range(50):
        spec = random_reversible_chain(int(rng.integers(2, 5)), rng)
        violations += sum(not r["holds"] for r in rio_table(spec, range(1, 21)))
    sticky = rio_table(catalog.flip_chain(0.05), [1])[0]

    _, r21 = check_irf(catalog.half_contraction("tanh"), N=20000, seed=SEED)
    mc = r21.extra["monte_carlo"]
    irf_ok = r21.verdict == HOLDS_ANALYTIC and math.isfinite(r21.tail_bound) and math.isfinite(mc["integral"])

    ok = analytic and violations == 0 and irf_ok
    criterion("8", ok, (
        f"verdicts {'all holds-analytic' if analytic else verdicts};  "
        f"Rio literal: {violations} violations on 50 random chains x k=1..20;  "
        f"IRF integral {mc['integral']:.4f} +- {mc['integral_stderr']:.4f} <= bound {r21.tail_bound:.4f};  "
        f"note: sticky flip chain p=0.05, k=1 gives {sticky['lhs']:.2f} > {sticky['rhs']:.2f} (see ledger)"
    ))
    assert ok


# ---------------------------------------------------------------------------
# 9. Raikov diagnostics
# ---------------------------------------------------------------------------


def test_criterion_9_raikov(criterion):
    ok, parts = True, []
    for kind in ("rademacher", "normal"):
        spec = LinearProcess(Coefficients(tail="geometric", rho=0.5), InnovationDist(kind, 1.0))
        d = raikov_for_spec(spec, LinearPast((5.0,)), 1.0, [1 << 8, 1 << 10, 1 << 12], 500, SEED)
        mx = [r["max_stat"] for r in d["rows"]]
        err = d["rows"][-1]["quad_var_rel_error"]
        ok &= d["max_decreasing"] and abs(err) < 0.05
        parts.append(f"{kind}: max/sqrt(n) {' > '.join(f'{v:.4f}' for v in mx)}, quad var err {err:+.4f}")
    criterion("9", ok, ";  ".join(parts))
    assert ok


# ---------------------------------------------------------------------------
# 10. determinism through manifests
# ---------------------------------------------------------------------------

RUNS = [
    ("quenched", "ar1.yaml"),            # criteria 3, 4, 6, 9
    ("quenched", "three_state.yaml"),    # criterion 3 (W_n)
    ("martingale", "ar1.yaml"),          # criterion 5
    ("martingale", "three_state.yaml"),  # criterion 5
    ("conditions", "ar1.yaml"),          # criterion 8
    ("conditions", "three_state.yaml"),  # criterion 8
    ("conditions", "long_memory.yaml"),  # criterion 7
    ("periodogram", "ar1.yaml"),
]


def test_criterion_10_determinism(criterion, tmp_path, capsys):
    mismatched = []
    for command, cfg in RUNS:
        out = tmp_path / f"{command}-{cfg}"
        first = cli_main([command, "--config", str(CONFIGS / cfg), "--out", str(out)])
        again = cli_main(["replay", str(out / "manifest.json"), "--out", str(tmp_path / f"replay-{command}-{cfg}")])
        man = json.loads((out / "manifest.json").read_text())
        for item in man["outputs"]:
            a = (out / item["path"]).read_bytes()
            b = (tmp_path / f"replay-{command}-{cfg}" / item["path"]).read_bytes()
            if a != b:
                mismatched.append(f"{command}/{cfg}/{item['path']}")
        if first not in (0, 1) or again != 0:
            mismatched.append(f"{command}/{cfg}: exit {first}/{again}")
    capsys.readouterr()
    ok = not mismatched
    criterion("10", ok, f"{len(RUNS)} manifests replayed, mismatches: {mismatched or 'none'}")
    assert ok
