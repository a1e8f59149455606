"""Core signal kernels: windows, DFT, STFT, 4th-order Butterworth low-pass, entropy.

Conventions
-----------
* Forward DFT is unnormalized, the inverse carries the 1/N factor.
* STFT output is fftshifted along frequency: row ``k`` of a frame holds
  frequency ``(k - fft_size // 2) * sample_rate / fft_size``, so DC sits at
  index ``fft_size // 2``.
* Windows are symmetric (``periodic=False`` convention).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy import signal as sps

from .errors import InvalidArgumentError

WINDOW_KINDS = ("hamming", "gaussian")


@dataclass(frozen=True)
class RealSignal:
    samples: np.ndarray
    sample_rate_hz: float

    def __post_init__(self):
        x = np.asarray(self.samples, dtype=float)
        if x.ndim != 1 or x.size < 1:
            raise InvalidArgumentError("RealSignal needs a 1-D sequence with at least one sample")
        if not np.all(np.isfinite(x)):
            raise InvalidArgumentError("RealSignal samples must be finite")
        if not self.sample_rate_hz > 0:
            raise InvalidArgumentError("sample_rate_hz must be > 0")
        object.__setattr__(self, "samples", x)

    def __len__(self):
        return self.samples.size


@dataclass(frozen=True)
class ComplexSignal:
    samples: np.ndarray
    sample_rate_hz: float

    def __post_init__(self):
        x = np.asarray(self.samples, dtype=complex)
        if x.ndim != 1 or x.size < 1:
            raise InvalidArgumentError("ComplexSignal needs a 1-D sequence with at least one sample")
        if not np.all(np.isfinite(x)):
            raise InvalidArgumentError("ComplexSignal samples must be finite")
        if not self.sample_rate_hz > 0:
            raise InvalidArgumentError("sample_rate_hz must be > 0")
        object.__setattr__(self, "samples", x)

    def __len__(self):
        return self.samples.size

    @property
    def power(self) -> float:
        return float(np.mean(np.abs(self.samples) ** 2))


Signal = Union[RealSignal, ComplexSignal]


@dataclass(frozen=True)
class StftParams:
    """Short-time Fourier transform configuration.

    ``fft_size=None`` means "next power of two >= window length".
    ``gaussian_sigma_fraction`` is the Gaussian std as a fraction of the
    window length and is only read for ``window_kind="gaussian"``.
    """

    window_kind: str = "hamming"
    window_duration_s: float = 0.2
    overlap_fraction: float = 0.95
    fft_size: int | None = None
    gaussian_sigma_fraction: float = 0.125

    def __post_init__(self):
        if self.window_kind not in WINDOW_KINDS:
            raise InvalidArgumentError(f"unknown window kind {self.window_kind!r}")
        if not self.window_duration_s > 0:
            raise InvalidArgumentError("window_duration_s must be > 0")
        if not 0 <= self.overlap_fraction < 1:
            raise InvalidArgumentError("overlap_fraction must be in [0, 1)")
        if not self.gaussian_sigma_fraction > 0:
            raise InvalidArgumentError("gaussian_sigma_fraction must be > 0")

    def window_len(self, sample_rate_hz: float) -> int:
        n = int(round(self.window_duration_s * sample_rate_hz))
        if n < 1:
            raise InvalidArgumentError("window shorter than one sample at this sample rate")
        return n

    def hop(self, sample_rate_hz: float) -> int:
        h = int(round(self.window_len(sample_rate_hz) * (1.0 - self.overlap_fraction)))
        if h < 1:
            raise InvalidArgumentError("overlap too large: hop rounds to zero samples")
        return h

    def nfft(self, sample_rate_hz: float) -> int:
        n = self.window_len(sample_rate_hz)
        if self.fft_size is None:
            return 1 << (n - 1).bit_length()
        if self.fft_size < n:
            raise InvalidArgumentError("fft_size must be >= window length")
        return int(self.fft_size)

    def frame_count(self, n_samples: int, sample_rate_hz: float) -> int:
        win = self.window_len(sample_rate_hz)
        if n_samples < win:
            return 0
        return (n_samples - win) // self.hop(sample_rate_hz) + 1


def make_window(kind: str, length: int, sigma: float | None = None) -> np.ndarray:
    """Symmetric analysis window.

    Parameters
    ----------
    kind : {"hamming", "gaussian"}
    length : int
        Number of points, >= 1.
    sigma : float, optional
        Gaussian standard deviation in samples (default ``length / 8``).
    """
    if length < 1:
        raise InvalidArgumentError("window length must be >= 1")
    if kind not in WINDOW_KINDS:
        raise InvalidArgumentError(f"unknown window kind {kind!r}")
    if length == 1:
        return np.ones(1)
    k = np.arange(length)
    if kind == "hamming":
        w = 0.54 - 0.46 * np.cos(2.0 * np.pi * k / (length - 1))
    else:
        if sigma is None:
            sigma = length / 8.0
        if sigma <= 0:
            raise InvalidArgumentError("gaussian sigma must be > 0")
        centre = (length - 1) / 2.0
        w = np.exp(-0.5 * ((k - centre) / sigma) ** 2)
    # enforce exact symmetry against rounding in cos()
    return 0.5 * (w + w[::-1])


def dft(x, fft_size: int | None = None) -> np.ndarray:
    """Unnormalized forward DFT, zero-padding ``x`` to ``fft_size``."""
    samples = x.samples if isinstance(x, (RealSignal, ComplexSignal)) else np.asarray(x)
    if samples.ndim != 1 or samples.size < 1:
        raise InvalidArgumentError("dft expects a non-empty 1-D sequence")
    n = samples.size if fft_size is None else int(fft_size)
    if n < samples.size:
        raise InvalidArgumentError("fft_size must be >= signal length")
    return np.fft.fft(samples, n)


def idft(spectrum) -> np.ndarray:
    """Inverse DFT with 1/N normalization."""
    spectrum = np.asarray(spectrum)
    if spectrum.ndim != 1 or spectrum.size < 1:
        raise InvalidArgumentError("idft expects a non-empty 1-D sequence")
    return np.fft.ifft(spectrum)


def stft_frequencies(params: StftParams, sample_rate_hz: float) -> np.ndarray:
    """Centre frequency (Hz) of each STFT row, after fftshift."""
    n = params.nfft(sample_rate_hz)
    return (np.arange(n) - n // 2) * sample_rate_hz / n


def _analysis_window(params: StftParams, win_len: int) -> np.ndarray:
    if params.window_kind == "gaussian":
        return make_window("gaussian", win_len, sigma=params.gaussian_sigma_fraction * win_len)
    return make_window(params.window_kind, win_len)


def stft(x: ComplexSignal, params: StftParams) -> np.ndarray:
    """Frame-by-frame windowed DFT.

    Returns a complex ``(frames, fft_size)`` matrix; frame ``t`` covers
    samples ``[t*hop, t*hop + window_len)`` and the frequency axis is
    fftshifted (DC at column ``fft_size // 2``).
    """
    fs = x.sample_rate_hz
    win_len = params.window_len(fs)
    hop = params.hop(fs)
    nfft = params.nfft(fs)
    samples = x.samples
    if samples.size < win_len:
        raise InvalidArgumentError(
            f"signal has {samples.size} samples, shorter than one {win_len}-sample window"
        )
    frames = np.lib.stride_tricks.sliding_window_view(samples, win_len)[::hop]
    w = _analysis_window(params, win_len)
    spec = np.fft.fft(frames * w, nfft, axis=1)
    return np.fft.fftshift(spec, axes=1)


def butterworth4_sos(cutoff_hz: float, sample_rate_hz: float) -> np.ndarray:
    """Second-order sections of a digital 4th-order Butterworth low-pass.

    Bilinear transform of the analog prototype, with the cutoff pre-warped
    so the -3 dB point lands exactly on ``cutoff_hz``. Each section is
    normalized to unity DC gain.
    """
    nyq = sample_rate_hz / 2.0
    if not 0 < cutoff_hz < nyq:
        raise InvalidArgumentError(f"cutoff {cutoff_hz} Hz outside (0, {nyq}) Hz")
    order = 4
    fs2 = 2.0 * sample_rate_hz
    wc = fs2 * math.tan(math.pi * cutoff_hz / sample_rate_hz)
    sos = []
    # left-half-plane poles, one per conjugate pair
    for k in range(1, order // 2 + 1):
        theta = math.pi * (2 * k + order - 1) / (2 * order)
        p = wc * complex(math.cos(theta), math.sin(theta))
        z = (1 + p / fs2) / (1 - p / fs2)
        a1 = -2.0 * z.real
        a2 = abs(z) ** 2
        g = (1.0 + a1 + a2) / 4.0
        sos.append([g, 2 * g, g, 1.0, a1, a2])
    return np.array(sos)


def butterworth4_lowpass(x: Signal, cutoff_hz: float) -> Signal:
    """Causal single-pass 4th-order Butterworth low-pass; returns the same signal type."""
    sos = butterworth4_sos(cutoff_hz, x.sample_rate_hz)
    if isinstance(x, ComplexSignal):
        y = sps.sosfilt(sos, x.samples.real) + 1j * sps.sosfilt(sos, x.samples.imag)
        return ComplexSignal(y, x.sample_rate_hz)
    return RealSignal(sps.sosfilt(sos, x.samples), x.sample_rate_hz)


def shannon_entropy(weights) -> float:
    """Entropy in bits of the distribution obtained by normalizing ``weights``."""
    w = np.asarray(weights, dtype=float).ravel()
    if w.size == 0 or np.any(w < 0) or not np.all(np.isfinite(w)):
        raise InvalidArgumentError("weights must be finite and non-negative")
    total = w.sum()
    if total <= 0:
        raise InvalidArgumentError("at least one weight must be strictly positive")
    p = w / total
    p = p[p > 0]  # also drops weights that underflow after normalization
    return float(max(0.0, -np.sum(p * np.log2(p))))
