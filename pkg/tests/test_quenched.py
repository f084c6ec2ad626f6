import math

import numpy as np
import pytest

from qfourier import catalog
from qfourier.models import LinearPast, MarkovStart, SpecError, draw_origin
from qfourier.quenched import (
    RAW_HEADER,
    ExperimentConfig,
    centering_decay,
    conditional_variance_ladder,
    martingale_increment_sample,
    raikov_diagnostics,
    run_quenched,
    simulate_chunked,
    write_raw_csv,
)


def test_config_validation():
    spec = catalog.ar1()
    with pytest.raises(SpecError):
        ExperimentConfig(spec, (1.0,), n=128, R=50, seed=0)
    with pytest.raises(SpecError):
        ExperimentConfig(spec, (1.0,), n=32, R=200, seed=0)
    with pytest.raises(SpecError):
        ExperimentConfig(spec, (math.pi,), n=128, R=200, seed=0)
    with pytest.raises(SpecError):
        ExperimentConfig(spec, (1.0,), n=128, R=200, seed=0, origin=MarkovStart(0))
    cfg = ExperimentConfig(spec, (math.pi,), n=128, R=200, seed=0, allow_excluded=True, tolerances={"ks": 0.1})
    assert cfg.tolerances["ks"] == 0.1 and cfg.tolerances["cross_corr"] == 0.07


def test_small_ar1_run_passes_and_reports():
    # R = 400: KS noise is about 0.87 / sqrt(R) = 0.044, so widen every threshold
    wide = {"ks": 0.09, "cross_corr": 0.15, "var_rel": 0.2, "pgram_ks": 0.09, "pgram_mean_lo": 0.8, "pgram_mean_hi": 1.2}
    cfg = ExperimentConfig(catalog.ar1(0.5), (1.0,), n=256, R=400, seed=5, origin=LinearPast((5.0,)), tolerances=wide)
    rep = run_quenched(cfg)
    assert rep.passed, rep.failures
    entry = rep.frequencies[0]
    f = 1 / (2 * math.pi * abs(1 - 0.5 * np.exp(1j)) ** 2)
    assert entry["sigma2_target"] == pytest.approx(2 * math.pi * f)
    assert rep.raw.shape == (400, 6)
    assert rep.to_dict()["passed"] is True
    reading = rep.findings["periodogram_constant"][0]
    assert reading["consistent_reading"] == "exponential mean 1"


def test_extreme_origin_shifts_uncentred_mean():
    """Unnormalised E_0 S_n stays bounded, so V_n and W_n agree up to O(1/sqrt n)."""
    cfg = ExperimentConfig(catalog.ar1(0.5), (1.0,), n=1024, R=200, seed=1, origin=LinearPast((5.0,)))
    rep = run_quenched(cfg)
    raw = rep.raw
    shift = np.abs((raw[:, 1] - raw[:, 3]) + 1j * (raw[:, 2] - raw[:, 4]))
    z = 0.5 * np.exp(1j)
    assert shift.max() == pytest.approx(abs(5 * z / (1 - z)) / 32, rel=1e-6)


def test_threading_does_not_change_results():
    spec = catalog.three_state_chain()
    a = simulate_chunked(spec, 64, 3, 300, MarkovStart(1), threads=1, chunk=70)
    b = simulate_chunked(spec, 64, 3, 300, MarkovStart(1), threads=4, chunk=70)
    np.testing.assert_array_equal(a.values, b.values)


def test_degenerate_model_flagged():
    spec = catalog.white_noise(0.0)
    rep = run_quenched(ExperimentConfig(spec, (1.0,), n=64, R=100, seed=0))
    assert rep.frequencies[0]["degenerate"]
    assert rep.flags["t=1:degenerate_limit"]


def test_raw_csv(tmp_path):
    rep = run_quenched(ExperimentConfig(catalog.ar1(), (0.5, 2.0), n=64, R=100, seed=0))
    path = tmp_path / "raw.csv"
    write_raw_csv(path, rep)
    lines = path.read_text().splitlines()
    assert lines[0].split(",") == RAW_HEADER
    assert len(lines) == 201


def test_centering_decay_closed_form():
    spec = catalog.ar1(0.5)
    out = centering_decay(spec, LinearPast((5.0,)), 1.0, [256, 1024, 4096])
    assert out["expect"] == "decay" and out["flag"]
    for row in out["rows"][1:]:
        assert row["step_factor"] == pytest.approx(0.5, rel=1e-6)


def test_centering_long_memory_regime():
    spec = catalog.long_memory()
    origin = draw_origin(spec, seed=0, window=16)
    out = centering_decay(spec, origin, 0.0, [64, 256])
    assert out["expect"] == "non-decay"
    assert out["variance_growth"][1]["step_factor"] > 1
    assert out["flag"]


def test_conditional_variance_ladder_targets():
    spec = catalog.three_state_chain()
    rows = conditional_variance_ladder(spec, MarkovStart(2), 1.0, [512], R=600, seed=2)
    r = rows[0]
    assert abs(r["estimate"] - r["target"]) < 4 * r["stderr"] + 0.02 * r["target"]


def test_raikov_on_iid_normals():
    rng = np.random.default_rng(0)
    samples = {n: (rng.standard_normal((300, n)) + 1j * rng.standard_normal((300, n))) for n in (64, 256, 1024)}
    out = raikov_diagnostics(samples, a=1.0, b=0.0, sigma_D2=2.0)
    assert out["target"] == 1.0
    assert out["max_decreasing"]
    assert abs(out["rows"][-1]["quad_var_rel_error"]) < 0.01
    assert -0.6 < out["max_log_slope"] < -0.3


def test_raikov_rejects_short_ladders():
    with pytest.raises(ValueError):
        raikov_diagnostics({8: np.zeros((2, 8))}, 1.0, 0.0)


def test_martingale_increment_sample_shape():
    D = martingale_increment_sample(catalog.ar1(0.5), LinearPast((1.0,)), 1.0, 32, 10, seed=0)
    assert D.shape == (10, 32)
    assert np.iscomplexobj(D)
