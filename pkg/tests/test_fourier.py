import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from qfourier.fourier import (
    CSV_HEADER,
    FrequencyGrid,
    dft,
    dft_fourier,
    dft_many,
    fourier_batch,
    fourier_frequencies,
    is_excluded,
    periodogram,
    phases,
    write_samples_csv,
)


def naive_dft(x, t):
    return sum(complex(math.cos(k * t), math.sin(k * t)) * v for k, v in enumerate(x, start=1))


finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


@given(arrays(float, st.integers(1, 60), elements=finite), st.floats(0.0, 2 * math.pi))
@settings(max_examples=60, deadline=None)
def test_dft_matches_naive_sum(x, t):
    scale = max(1.0, np.abs(x).sum())
    assert abs(dft(x, t) - naive_dft(x, t)) <= 1e-12 * scale


def test_impulse_has_flat_transform():
    x = np.zeros(8)
    x[0] = 1.0
    for t in fourier_frequencies(8):
        s = dft(x, t)
        assert s == pytest.approx(complex(math.cos(t), math.sin(t)), abs=1e-15)
        assert periodogram(x, t) == pytest.approx(1 / (2 * math.pi * 8), rel=1e-12)


def test_phase_drift_over_long_blocks():
    n = 100_000
    t = 1.2345
    p = phases(n, [t])[0]
    exact = np.exp(1j * t * np.arange(1, n + 1))
    # both sides carry the rounding of the argument k*t, about n * t * eps
    assert np.max(np.abs(p - exact)) < 4 * n * t * np.finfo(float).eps


def test_fft_path_equals_direct_sum():
    rng = np.random.default_rng(4)
    x = rng.standard_normal(300)
    ts = 2 * math.pi * np.arange(300) / 300
    np.testing.assert_allclose(dft_fourier(x), dft_many(x, ts)[0], atol=1e-10)


@given(st.integers(2, 512), st.integers(0, 2**32 - 1))
@settings(max_examples=40, deadline=None)
def test_parseval_at_fourier_frequencies(n, seed):
    x = np.random.default_rng(seed).standard_normal(n)
    S = dft_fourier(x)
    assert abs(np.sum(np.abs(S) ** 2) - n * np.sum(x**2)) <= 1e-10 * n * np.sum(x**2)


def test_dft_many_shapes_and_rows():
    rng = np.random.default_rng(0)
    X = rng.standard_normal((3, 17))
    out = dft_many(X, [0.3, 1.0])
    assert out.shape == (3, 2)
    assert out[2, 1] == pytest.approx(naive_dft(X[2], 1.0), abs=1e-12)


def test_invalid_inputs():
    with pytest.raises(ValueError):
        dft([], 1.0)
    with pytest.raises(ValueError):
        dft([1.0], -0.1)
    with pytest.raises(ValueError):
        FrequencyGrid.explicit([])


def test_excluded_points():
    grid = FrequencyGrid.explicit([0.5, math.pi / 2, math.pi, 3 * math.pi / 2, 2.0])
    assert grid.excluded.tolist() == [False, True, True, True, False]
    assert is_excluded(math.pi) and not is_excluded(1.0)


def test_uniform_random_grid_is_seeded():
    a = FrequencyGrid.uniform_random(16, seed=3)
    b = FrequencyGrid.uniform_random(16, seed=3)
    assert a.points == b.points and len(a) == 16
    assert all(0 < t < 2 * math.pi for t in a.points)


def test_fourier_batch_fields_and_centering():
    rng = np.random.default_rng(2)
    x = rng.standard_normal(64)
    grid = FrequencyGrid.explicit([0.4, 2.2])
    c = [1 + 2j, -0.5j]
    samples = fourier_batch(x, grid, centering=c)
    for s, t, ci in zip(samples, grid.points, c):
        S = naive_dft(x, t)
        assert s.S == pytest.approx(S, abs=1e-12)
        assert s.V == pytest.approx((S.real / 8, S.imag / 8), abs=1e-12)
        assert s.W == pytest.approx(((S - ci).real / 8, (S - ci).imag / 8), abs=1e-12)
        assert s.I == pytest.approx(abs(S) ** 2 / (2 * math.pi * 64), rel=1e-12)


def test_fourier_batch_fft_path_matches_chunked():
    x = np.random.default_rng(1).standard_normal(600)
    fast = fourier_batch(x, FrequencyGrid.fourier(600))
    slow = fourier_batch(x, FrequencyGrid.explicit(fourier_frequencies(600)))
    assert len(fast) == 599
    np.testing.assert_allclose([s.I for s in fast], [s.I for s in slow], rtol=1e-9, atol=1e-14)


def test_samples_csv(tmp_path):
    x = np.arange(1.0, 5.0)
    path = tmp_path / "s.csv"
    write_samples_csv(path, fourier_batch(x, [1.0]))
    lines = path.read_text().splitlines()
    assert lines[0].split(",") == CSV_HEADER
    assert len(lines) == 2
