"""Spectrogram denoising and preprocessing.

* ``ath_threshold`` - iterative two-class-mean (isodata) threshold on an
  8-bit image, returning the binary mask and masked image.
* ``apr_transform`` - adaptive-resolution remap: find the energy-bearing
  Doppler band around DC and stretch it over the full height with a
  logarithmic coordinate law that gives low frequencies more rows.
* ``ebd_select_interval`` / ``ebd_denoise`` - entropy-based denoising:
  pick the range-bin interval whose slow-time STFT has the lowest mean
  Shannon entropy, then zero bins below a per-frame energy threshold.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dsp import ComplexSignal, StftParams, shannon_entropy, stft
from .errors import InvalidArgumentError
from .spectrogram import GrayImage, Spectrogram, to_gray

METHODS = ("none", "ebd", "ath", "apr", "apr_then_ath")


@dataclass
class AThResult:
    threshold: float
    iterations: int
    mask: np.ndarray
    masked_image: GrayImage


@dataclass
class ActiveBand:
    low_bin: int
    high_bin: int
    energy_fraction: float


@dataclass
class EbdInterval:
    start_bin: int
    width_bins: int
    avg_entropy_bits: float
    anchor_bin: int = 0
    candidates: dict = field(default_factory=dict)  # start_bin -> avg entropy


def ath_threshold(img: GrayImage, tol: float = 0.1, max_iter: int = 1000) -> AThResult:
    """Iterate ``T <- (mean(x > T) + mean(x <= T)) / 2`` from the global mean until ``|dT| < tol``.

    An empty class contributes ``T`` itself, so a constant image converges
    on the first update with an empty mask.
    """
    x = np.asarray(img.pixels, dtype=float)
    if x.size == 0:
        raise InvalidArgumentError("image is empty")
    t = float(x.mean())
    it = 0
    while True:
        it += 1
        above = x[x > t]
        below = x[x <= t]
        m_hi = above.mean() if above.size else t
        m_lo = below.mean() if below.size else t
        t_new = 0.5 * (m_hi + m_lo)
        done = abs(t_new - t) < tol
        t = float(t_new)
        if done or it >= max_iter:
            break
    mask = x > t
    masked = np.where(mask, img.pixels, 0)
    return AThResult(t, it, mask, GrayImage(masked, dict(img.provenance, ath_threshold=t)))


def _dc_row(n: int) -> int:
    return n // 2


def active_band(spec: Spectrogram, energy_fraction: float = 0.99) -> ActiveBand:
    """Smallest DC-symmetric band of Doppler rows holding ``energy_fraction`` of the energy.

    Per-row energy is the squared RMS across frames.
    """
    if not 0 < energy_fraction <= 1:
        raise InvalidArgumentError("energy_fraction must be in (0, 1]")
    e = np.mean(spec.values**2, axis=1)
    total = e.sum()
    if not total > 0:
        raise InvalidArgumentError("spectrogram has no energy")
    n = e.size
    c = _dc_row(n)
    k_max = max(c, n - 1 - c)
    for k in range(k_max + 1):
        lo, hi = max(0, c - k), min(n - 1, c + k)
        frac = e[lo : hi + 1].sum() / total
        # small slack so float summation cannot miss the full band
        if frac >= energy_fraction - 1e-12:
            return ActiveBand(lo, hi, float(min(frac, 1.0)))
    return ActiveBand(0, n - 1, 1.0)


def apr_source_positions(n_rows: int, band: ActiveBand, gamma: float = 9.0) -> np.ndarray:
    """Fractional input row sampled by each output row.

    Output rows map to normalized coordinate ``v`` in [-1, 1] (DC row -> 0).
    The inverse of ``u -> sign(u) log(1 + gamma|u|) / log(1 + gamma)`` gives
    the normalized input coordinate ``u`` within the active band.
    """
    if not gamma > 0:
        raise InvalidArgumentError("gamma must be > 0")
    c = _dc_row(n_rows)
    i = np.arange(n_rows, dtype=float)
    out_lo, out_hi = float(c), float(n_rows - 1 - c)
    in_lo, in_hi = float(c - band.low_bin), float(band.high_bin - c)
    v = np.zeros(n_rows)
    neg, pos = i < c, i > c
    if out_lo > 0:
        v[neg] = (i[neg] - c) / out_lo
    if out_hi > 0:
        v[pos] = (i[pos] - c) / out_hi
    u = np.sign(v) * ((1.0 + gamma) ** np.abs(v) - 1.0) / gamma
    return np.where(u < 0, c + u * in_lo, c + u * in_hi)


def apr_transform(spec: Spectrogram, energy_fraction: float = 0.99, gamma: float = 9.0) -> Spectrogram:
    """Adaptive-resolution remap of the Doppler axis; same matrix shape out.

    Columns are resampled by linear interpolation at
    :func:`apr_source_positions`, then rescaled so the total energy
    (sum of squares) matches the input.
    """
    band = active_band(spec, energy_fraction)
    v = spec.values
    n = v.shape[0]
    pos = apr_source_positions(n, band, gamma)
    lo = np.clip(np.floor(pos).astype(int), 0, n - 1)
    hi = np.clip(lo + 1, 0, n - 1)
    frac = (pos - lo)[:, None]
    out = (1.0 - frac) * v[lo] + frac * v[hi]
    e_in, e_out = np.sum(v**2), np.sum(out**2)
    if e_out > 0:
        out *= np.sqrt(e_in / e_out)
    return Spectrogram(out, spec.frame_hop_s, spec.bin_hz)


def _anchor_bin(range_time: np.ndarray) -> int:
    """Most frequent range-bin argmax over the slow-time Doppler columns."""
    rd = np.abs(np.fft.fft(range_time, axis=1))
    col_max = rd.max(axis=0)
    cols = col_max > 0
    if not np.any(cols):
        return range_time.shape[0] // 2
    peaks = np.argmax(rd[:, cols], axis=0)
    counts = np.bincount(peaks, minlength=range_time.shape[0])
    return int(np.argmax(counts))


def ebd_candidates(range_time, interval_width: int = 5, num_candidates: int = 7) -> tuple[int, list[int]]:
    """Anchor bin and the sorted, de-duplicated candidate interval start bins."""
    rt = np.asarray(range_time)
    if rt.ndim != 2 or rt.shape[0] < 2 or rt.shape[1] < 1:
        raise InvalidArgumentError("range-time map needs >= 2 range bins and >= 1 chirp")
    if num_candidates < 1:
        raise InvalidArgumentError("num_candidates must be >= 1")
    n_range = rt.shape[0]
    if not 1 <= interval_width <= n_range:
        raise InvalidArgumentError("interval_width must fit in the range axis")
    anchor = _anchor_bin(rt)
    offsets = range(-(num_candidates // 2), num_candidates - num_candidates // 2)
    starts = {
        int(np.clip(anchor + off - interval_width // 2, 0, n_range - interval_width)) for off in offsets
    }
    return anchor, sorted(starts)


def mean_frame_entropy(signal: ComplexSignal, params: StftParams) -> float:
    """Average Shannon entropy (bits) of per-frame normalized power spectra.

    A frame with no energy is assigned the maximum, ``log2(fft_size)``.
    """
    power = np.abs(stft(signal, params)) ** 2
    h_max = np.log2(power.shape[1])
    hs = [shannon_entropy(row) if row.sum() > 0 else h_max for row in power]
    return float(np.mean(hs))


def ebd_select_interval(
    range_time,
    sample_rate_hz: float,
    params: StftParams | None = None,
    interval_width: int = 5,
    num_candidates: int = 7,
) -> EbdInterval:
    """Range interval with minimum mean STFT entropy among candidates around the anchor bin.

    ``range_time`` is ``(range_bins, chirps)``, preferably complex range
    profiles so Doppler phase survives. Ties go to the lowest start bin.
    """
    if params is None:
        params = StftParams(window_kind="gaussian")
    rt = np.asarray(range_time)
    anchor, starts = ebd_candidates(rt, interval_width, num_candidates)
    ent = {}
    for s in starts:
        sig = ComplexSignal(rt[s : s + interval_width].sum(axis=0), sample_rate_hz)
        ent[s] = mean_frame_entropy(sig, params)
    best = min(starts, key=lambda s: (ent[s], s))
    return EbdInterval(best, interval_width, ent[best], anchor, ent)


def ebd_signal(range_time, interval: EbdInterval, sample_rate_hz: float) -> ComplexSignal:
    rt = np.asarray(range_time)
    return ComplexSignal(rt[interval.start_bin : interval.start_bin + interval.width_bins].sum(axis=0), sample_rate_hz)


def ebd_denoise(spec: Spectrogram, beta: float = 1.5) -> Spectrogram:
    """Zero every bin below ``beta`` times its frame's mean magnitude."""
    if beta < 0:
        raise InvalidArgumentError("beta must be >= 0")
    v = spec.values
    thr = beta * v.mean(axis=0, keepdims=True)
    return Spectrogram(np.where(v >= thr, v, 0.0), spec.frame_hop_s, spec.bin_hz)


@dataclass
class DenoiseConfig:
    dynamic_range_db: float = 40.0
    ath_tol: float = 0.1
    apr_energy_fraction: float = 0.99
    apr_gamma: float = 9.0
    ebd_beta: float = 1.5


def denoise_pipeline(spec: Spectrogram, method: str, cfg: DenoiseConfig | None = None) -> GrayImage:
    """Render ``spec`` through one method; ``none`` is the plain grayscale view."""
    cfg = cfg or DenoiseConfig()
    dr = cfg.dynamic_range_db
    if method == "none":
        return to_gray(spec, dr)
    if method == "apr":
        return to_gray(apr_transform(spec, cfg.apr_energy_fraction, cfg.apr_gamma), dr)
    if method == "ath":
        return ath_threshold(to_gray(spec, dr), cfg.ath_tol).masked_image
    if method == "ebd":
        return to_gray(ebd_denoise(spec, cfg.ebd_beta), dr)
    if method == "apr_then_ath":
        return ath_threshold(to_gray(apr_transform(spec, cfg.apr_energy_fraction, cfg.apr_gamma), dr), cfg.ath_tol).masked_image
    raise InvalidArgumentError(f"unknown method {method!r}; expected one of {METHODS}")
