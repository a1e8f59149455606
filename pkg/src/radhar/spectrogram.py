"""Range-time maps, micro-Doppler spectrograms, grayscale rendering and WGN injection."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dsp import ComplexSignal, StftParams, butterworth4_lowpass, make_window, stft
from .errors import InvalidArgumentError
from .synth import IQCube, frame_rng


@dataclass
class Spectrogram:
    """Linear-magnitude spectrogram, rows = Doppler bins (DC at ``rows // 2``), columns = frames."""

    values: np.ndarray
    frame_hop_s: float = 1.0
    bin_hz: float = 1.0

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or v.size == 0:
            raise InvalidArgumentError("spectrogram values must be a non-empty 2-D matrix")
        if not np.all(np.isfinite(v)) or np.any(v < 0):
            raise InvalidArgumentError("spectrogram values must be finite and non-negative")
        self.values = v

    @property
    def shape(self):
        return self.values.shape


@dataclass
class GrayImage:
    pixels: np.ndarray
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        p = np.asarray(self.pixels)
        if p.ndim != 2 or p.size == 0:
            raise InvalidArgumentError("gray image must be a non-empty 2-D matrix")
        if np.any(p < 0) or np.any(p > 255):
            raise InvalidArgumentError("gray pixels must lie in [0, 255]")
        self.pixels = p.astype(np.uint8)

    @property
    def shape(self):
        return self.pixels.shape


def _cube_data(iq) -> np.ndarray:
    data = iq.data if isinstance(iq, IQCube) else np.asarray(iq)
    if data.ndim != 3 or data.size == 0:
        raise InvalidArgumentError("IQ cube must be a non-empty (channel, chirp, sample) array")
    return data


def range_profiles_complex(iq, channel: int = 0) -> np.ndarray:
    """Hamming-windowed fast-time DFT of one channel, positive half, shape ``(range_bins, chirps)``."""
    data = _cube_data(iq)
    if not 0 <= channel < data.shape[0]:
        raise InvalidArgumentError(f"channel {channel} out of range for {data.shape[0]} channels")
    n = data.shape[2]
    w = make_window("hamming", n)
    prof = np.fft.fft(data[channel] * w, axis=1)[:, : max(n // 2, 1)]
    return prof.T


def range_time_map(iq, channel: int = 0) -> np.ndarray:
    """Magnitude range-time map ``(range_bins, chirps)``."""
    return np.abs(range_profiles_complex(iq, channel))


def md_spectrogram(slow_time: ComplexSignal, params: StftParams) -> Spectrogram:
    fs = slow_time.sample_rate_hz
    s = np.abs(stft(slow_time, params)).T
    return Spectrogram(s, frame_hop_s=params.hop(fs) / fs, bin_hz=fs / params.nfft(fs))


def to_gray(spec: Spectrogram, dynamic_range_db: float = 40.0) -> GrayImage:
    """Peak-normalized dB rendering: 0 dB -> 255, ``-dynamic_range_db`` and below -> 0."""
    if not dynamic_range_db > 0:
        raise InvalidArgumentError("dynamic_range_db must be > 0")
    v = spec.values
    peak = v.max()
    if not peak > 0:
        raise InvalidArgumentError("cannot render an all-zero spectrogram")
    with np.errstate(divide="ignore"):
        db = 20.0 * np.log10(v / peak)
    db = np.clip(db, -dynamic_range_db, 0.0)
    scaled = (db + dynamic_range_db) / dynamic_range_db * 255.0
    # round half away from zero (values are non-negative here)
    pixels = np.floor(scaled + 0.5)
    return GrayImage(pixels, {"dynamic_range_db": float(dynamic_range_db), "floor_db": -float(dynamic_range_db)})


def noise_for_power(power: float, shape, rng_seed: int) -> np.ndarray:
    rng = np.random.default_rng(rng_seed)
    scale = np.sqrt(power / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def add_wgn_signal(x: ComplexSignal, snr_db: float, rng_seed: int) -> ComplexSignal:
    """Add circular complex WGN scaled to the signal's measured mean power."""
    p = x.power
    if not p > 0:
        raise InvalidArgumentError("cannot set an SNR relative to a zero-power signal")
    noise = noise_for_power(p / 10.0 ** (snr_db / 10.0), x.samples.shape, rng_seed)
    return ComplexSignal(x.samples + noise, x.sample_rate_hz)


def add_wgn_cube(iq: IQCube, snr_db: float, rng_seed: int) -> IQCube:
    """Cube-wide WGN injection; SNR is relative to the mean power over all samples."""
    p = float(np.mean(np.abs(iq.data) ** 2))
    if not p > 0:
        raise InvalidArgumentError("cannot set an SNR relative to a zero-power cube")
    noise = noise_for_power(p / 10.0 ** (snr_db / 10.0), iq.data.shape, rng_seed)
    return IQCube(
        iq.data + noise, iq.chirp_rate_hz, iq.fast_time_rate_hz, iq.range_scale_hz_per_m,
        iq.element_spacing_wavelengths,
    )


def add_wgn_image(spec: Spectrogram, snr_db: float, rng_seed: int) -> Spectrogram:
    """Image-domain ablation: add real WGN to the magnitude image and clip at zero."""
    p = float(np.mean(spec.values**2))
    if not p > 0:
        raise InvalidArgumentError("cannot set an SNR relative to an all-zero spectrogram")
    sigma = np.sqrt(p / 10.0 ** (snr_db / 10.0))
    noisy = spec.values + sigma * np.random.default_rng(rng_seed).standard_normal(spec.shape)
    return Spectrogram(np.maximum(noisy, 0.0), spec.frame_hop_s, spec.bin_hz)


def snr_seed(seed: int, level_index: int) -> int:
    """Per-(seed, SNR level) integer seed."""
    return int(frame_rng(seed, level_index).integers(0, 2**63 - 1))


def slow_time_from_cube(
    iq: IQCube, half_width: int = 4, channel: int = 0, cutoff_fraction: float | None = 0.8
) -> ComplexSignal:
    """Slow-time signal of the dominant range region.

    Sums the complex range profiles within ``half_width`` bins of the
    strongest range bin (by mean power over chirps), then optionally applies
    the 4th-order Butterworth low-pass at ``cutoff_fraction`` of the
    slow-time Nyquist frequency.
    """
    prof = range_profiles_complex(iq, channel)
    power = np.mean(np.abs(prof) ** 2, axis=1)
    peak = int(np.argmax(power))
    lo, hi = max(0, peak - half_width), min(prof.shape[0], peak + half_width + 1)
    sig = ComplexSignal(prof[lo:hi].sum(axis=0), iq.chirp_rate_hz)
    if cutoff_fraction is not None:
        sig = butterworth4_lowpass(sig, cutoff_fraction * iq.chirp_rate_hz / 2.0)
    return sig
