import numpy as np
import pytest

from radhar.dsp import ComplexSignal, StftParams
from radhar.errors import InvalidArgumentError
from radhar.spectrogram import (
    Spectrogram, add_wgn_cube, add_wgn_image, add_wgn_signal, md_spectrogram, range_profiles_complex,
    range_time_map,
    slow_time_from_cube, snr_seed, to_gray,
)
from radhar.synth import (
    IQCube, StaticSceneSpec, StaticTarget, simulate_dynamic_cube, simulate_static_scene, walking_like,
)


def _static_cube(targets):
    return simulate_static_scene(StaticSceneSpec(targets, noise_power=0.0, random_phase=False))


def test_range_time_single_target():
    cube = _static_cube([StaticTarget(1.0, 3.0, 0.0)])
    rt = range_time_map(cube)
    assert rt.shape == (64, 64)
    assert np.all(np.argmax(rt, axis=0) == round(cube.range_bin_of(3.0)))
    np.testing.assert_allclose(rt[24], rt[24, 0])  # constant over chirps


def test_range_time_zero_input():
    cube = IQCube(np.zeros((1, 8, 16), dtype=complex), 1000.0, 1e6, 50e3)
    assert not np.any(range_time_map(cube))


def test_range_time_two_targets_energy_order():
    # 2.5 m and 5 m fall exactly on bins 16 and 32
    cube = _static_cube([StaticTarget(1.0, 2.5, 0.0), StaticTarget(0.5, 5.0, 0.0)])
    rt = range_time_map(cube)
    e = np.sum(rt**2, axis=1)
    b1, b2 = round(cube.range_bin_of(2.5)), round(cube.range_bin_of(5.0))
    assert set(np.argsort(e)[-2:]) == {b1, b2}
    assert e[b1] / e[b2] == pytest.approx(4.0, rel=1e-3)  # window sidelobes leak a little


def test_range_time_rejects_bad_channel():
    with pytest.raises(InvalidArgumentError):
        range_time_map(_static_cube([StaticTarget(1.0, 2.0, 0.0)]), channel=5)


def test_md_spectrogram_tone_and_axes():
    fs = 1000.0
    t = np.arange(1500) / fs
    spec = md_spectrogram(ComplexSignal(np.exp(2j * np.pi * 50.0 * t), fs), StftParams())
    assert spec.shape == (256, 131)
    assert spec.frame_hop_s == pytest.approx(0.01)
    assert spec.bin_hz == pytest.approx(fs / 256)
    assert np.all(np.argmax(spec.values, axis=0) == 128 + round(50.0 / spec.bin_hz))


def test_md_spectrogram_zero_signal():
    spec = md_spectrogram(ComplexSignal(np.zeros(400), 1000.0), StftParams())
    assert not np.any(spec.values)


def test_walking_ridge_period():
    spec = walking_like()
    sg = md_spectrogram(slow_time_from_cube(simulate_dynamic_cube(spec)), StftParams())
    ridge = np.argmax(sg.values, axis=0).astype(float)
    ridge -= ridge.mean()
    ac = np.correlate(ridge, ridge, mode="full")[ridge.size - 1 :]
    # first autocorrelation peak after the zero-lag lobe
    lag0 = int(np.argmax(ac < 0))
    period_frames = lag0 + int(np.argmax(ac[lag0 : lag0 + 200]))
    period_s = period_frames * sg.frame_hop_s
    assert period_s == pytest.approx(1.0, rel=0.10)


# grayscale rendering

def test_gray_levels():
    v = np.array([[1.0, 0.01, 0.1, 1e-6]])
    g = to_gray(Spectrogram(v)).pixels
    assert g[0, 0] == 255
    assert g[0, 1] == 0
    assert abs(int(g[0, 2]) - 128) <= 1
    assert g[0, 3] == 0


def test_gray_scale_invariant_and_rejects_zero():
    rng = np.random.default_rng(0)
    v = rng.random((16, 20)) + 1e-3
    np.testing.assert_array_equal(to_gray(Spectrogram(v)).pixels, to_gray(Spectrogram(v * 1000)).pixels)
    with pytest.raises(InvalidArgumentError):
        to_gray(Spectrogram(np.zeros((3, 3))))
    with pytest.raises(InvalidArgumentError):
        Spectrogram(-np.ones((2, 2)))


# noise injection

def test_zero_db_noise_equals_signal_power():
    x = ComplexSignal(np.exp(2j * np.pi * 0.01 * np.arange(200_000)), 1.0)
    n = add_wgn_signal(x, 0.0, 1).samples - x.samples
    assert np.mean(np.abs(n) ** 2) == pytest.approx(1.0, rel=0.02)


def test_ten_db_noise_power():
    x = ComplexSignal(np.ones(100_000), 1.0)
    n = add_wgn_signal(x, 10.0, 2).samples - x.samples
    assert np.mean(np.abs(n) ** 2) == pytest.approx(0.1, rel=0.05)


def test_minus_five_db_measured_snr():
    rng = np.random.default_rng(4)
    clean = 3.0 * (rng.standard_normal(100_000) + 1j * rng.standard_normal(100_000))
    x = ComplexSignal(clean, 1.0)
    noisy = add_wgn_signal(x, -5.0, 9).samples
    snr = 10 * np.log10(np.mean(np.abs(clean) ** 2) / np.mean(np.abs(noisy - clean) ** 2))
    assert snr == pytest.approx(-5.0, abs=0.5)


def test_noise_is_circular():
    x = ComplexSignal(np.ones(100_000), 1.0)
    n = add_wgn_signal(x, 0.0, 3).samples - 1.0
    assert np.var(n.real) == pytest.approx(np.var(n.imag), rel=0.05)
    assert abs(np.mean(n.real * n.imag)) < 0.02


def test_noise_reproducible_by_seed():
    x = ComplexSignal(np.ones(64), 1.0)
    np.testing.assert_array_equal(add_wgn_signal(x, 3.0, 5).samples, add_wgn_signal(x, 3.0, 5).samples)
    assert not np.array_equal(add_wgn_signal(x, 3.0, 5).samples, add_wgn_signal(x, 3.0, 6).samples)
    assert snr_seed(1, 0) != snr_seed(1, 1)


def test_cube_noise_power():
    cube = simulate_dynamic_cube(walking_like(chirps=400))
    noisy = add_wgn_cube(cube, 0.0, 8)
    p_sig = np.mean(np.abs(cube.data) ** 2)
    assert np.mean(np.abs(noisy.data - cube.data) ** 2) == pytest.approx(p_sig, rel=0.03)
    assert noisy.chirp_rate_hz == cube.chirp_rate_hz


def test_zero_power_rejected():
    with pytest.raises(InvalidArgumentError):
        add_wgn_signal(ComplexSignal(np.zeros(8), 1.0), 0.0, 1)
    with pytest.raises(InvalidArgumentError):
        add_wgn_image(Spectrogram(np.zeros((4, 4))), 0.0, 1)


def test_image_noise_stays_non_negative():
    rng = np.random.default_rng(1)
    s = add_wgn_image(Spectrogram(rng.random((32, 32))), -10.0, 2)
    assert np.all(s.values >= 0)


def test_slow_time_picks_target_region():
    cube = simulate_dynamic_cube(walking_like(chirps=600))
    raw = slow_time_from_cube(cube, cutoff_fraction=None)
    assert raw.sample_rate_hz == cube.chirp_rate_hz
    assert len(raw) == 600
    prof = range_profiles_complex(cube)
    peak = int(np.argmax(np.mean(np.abs(prof) ** 2, axis=1)))
    # the walker starts at 2 m and recedes at 0.3 m/s
    assert abs(peak - cube.range_bin_of(2.0 + 0.3 * 0.3)) <= 1
    np.testing.assert_allclose(raw.samples, prof[peak - 4 : peak + 5].sum(axis=0), atol=1e-9)
    filtered = slow_time_from_cube(cube)
    assert filtered.power < raw.power
