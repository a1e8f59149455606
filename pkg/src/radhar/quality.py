"""No-reference RA-map cleanliness score ("lumps + subpeak").

A frame scores high when its above-percentile energy sits in one compact,
single-peaked lump and its global peak stands well clear of the mean.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .errors import InvalidArgumentError
from .ramap import RAMap

_EIGHT = np.ones((3, 3), dtype=bool)


@dataclass
class Lump:
    pixels: np.ndarray  # (n, 2) int array of (row, col), row-major order
    centroid: tuple  # energy-weighted (row, col)
    bbox: tuple  # (row_min, col_min, row_max, col_max), inclusive
    energy: float
    subpeak_count: int = 0

    @property
    def size(self) -> int:
        return len(self.pixels)


@dataclass
class ScoreParams:
    """Scorer hyperparameters.

    ``fusion_mode="geometric_product"`` combines the sub-scores as
    ``lumps**w1 * peak**w2``; ``"literal_sum"`` as ``lumps**w1 + peak**w2``
    (saturates at 1 for most frames). ``valid_lump_fraction`` drops lumps
    lighter than that fraction of the main lump from sub-peak counting.
    ``std_eps`` is added to the standard deviation in the peakness ratio;
    any positive value breaks exact scale invariance, so the default is 0
    and a constant frame is given zero peakness instead.
    """

    pct: float = 90.0
    gamma: float = 0.5
    d_min: int = 3
    alpha_single: float = 3.0
    alpha_multi: float = 0.1
    phi: float = 0.5
    w1: float = 0.25
    w2: float = 0.75
    fusion_mode: str = "geometric_product"
    valid_lump_fraction: float = 0.01
    std_eps: float = 0.0

    def __post_init__(self):
        if self.fusion_mode not in ("geometric_product", "literal_sum"):
            raise InvalidArgumentError(f"unknown fusion_mode {self.fusion_mode!r}")
        if not 0 <= self.pct <= 100:
            raise InvalidArgumentError("pct must be in [0, 100]")
        if not 0 < self.gamma < 1:
            raise InvalidArgumentError("gamma must be in (0, 1)")
        if self.d_min < 1:
            raise InvalidArgumentError("d_min must be >= 1")
        if not self.phi > 0:
            raise InvalidArgumentError("phi must be > 0")
        if self.std_eps < 0:
            raise InvalidArgumentError("std_eps must be >= 0")
        if self.fusion_mode == "geometric_product" and not math.isclose(self.w1 + self.w2, 1.0):
            raise InvalidArgumentError("w1 + w2 must equal 1 for geometric_product fusion")


@dataclass
class FrameScore:
    S: float
    lumps_score: float
    peak_score: float
    subpeak_count: int
    leftover_ratio: float
    lump_inventory: list = field(default_factory=list)


def _clamp01(v: float) -> float:
    return max(0.0, min(float(v), 1.0))


def _values(x) -> np.ndarray:
    return np.asarray(x.power if isinstance(x, RAMap) else x, dtype=float)


def lumps_from_frame(x, pct: float = 90.0) -> list[Lump]:
    """8-connected components of ``x > percentile(x, pct)``, heaviest first."""
    v = _values(x)
    if v.size == 0 or not np.any(v > 0):
        return []
    thr = np.percentile(v, pct)
    labels, n = ndimage.label(v > thr, structure=_EIGHT)
    if n == 0:
        return []
    lumps = []
    for sl_idx, sl in enumerate(ndimage.find_objects(labels), start=1):
        sub = labels[sl] == sl_idx
        rr, cc = np.nonzero(sub)
        rr = rr + sl[0].start
        cc = cc + sl[1].start
        w = v[rr, cc]
        e = float(w.sum())
        if e > 0:
            centroid = (float(np.dot(w, rr) / e), float(np.dot(w, cc) / e))
        else:
            centroid = (float(rr.mean()), float(cc.mean()))
        bbox = (int(rr.min()), int(cc.min()), int(rr.max()), int(cc.max()))
        lumps.append(Lump(np.column_stack([rr, cc]), centroid, bbox, e))
    lumps.sort(key=lambda L: (-L.energy, L.bbox[0], L.bbox[1]))
    return lumps


def valid_lumps(lumps: list[Lump], fraction: float = 0.01) -> list[Lump]:
    if not lumps:
        return []
    e_main = lumps[0].energy
    return [L for L in lumps if L.energy >= fraction * e_main]


def _strict_local_max(a: np.ndarray) -> np.ndarray:
    """Pixels strictly greater than each of their in-bounds 8 neighbours."""
    padded = np.pad(a, 1, mode="constant", constant_values=-np.inf)
    out = np.ones(a.shape, dtype=bool)
    rows, cols = a.shape
    for dr in (-1, 0, 1):
        for dc in (-1, 0, 1):
            if dr == 0 and dc == 0:
                continue
            out &= a > padded[1 + dr : 1 + dr + rows, 1 + dc : 1 + dc + cols]
    return out


def count_subpeaks(x, lumps: list[Lump], gamma: float = 0.5, d_min: int = 3, valid_fraction: float = 0.01) -> int:
    """Count sub-peaks inside the valid lumps and store each lump's own count.

    Peaks are strict 8-neighbour maxima of the lump-masked frame with value
    ``>= gamma * max``; within a lump, greedy suppression by descending
    value removes peaks within Chebyshev distance ``d_min`` of a kept one.
    """
    v = _values(x)
    good = valid_lumps(lumps, valid_fraction)
    if not good:
        return 0
    sub = np.zeros_like(v)
    for L in good:
        sub[L.pixels[:, 0], L.pixels[:, 1]] = v[L.pixels[:, 0], L.pixels[:, 1]]
    abs_thresh = gamma * sub.max()
    is_peak = _strict_local_max(sub) & (sub >= abs_thresh) & (sub > 0)
    total = 0
    for L in good:
        r, c = L.pixels[:, 0], L.pixels[:, 1]
        sel = is_peak[r, c]
        cand = sorted(zip(-sub[r[sel], c[sel]], r[sel], c[sel]))
        kept = []
        for _, pr, pc in cand:
            if all(max(abs(pr - kr), abs(pc - kc)) > d_min for kr, kc in kept):
                kept.append((pr, pc))
        L.subpeak_count = len(kept)
        total += len(kept)
    return total


def peak_score(x, phi: float = 0.5, std_eps: float = 0.0) -> float:
    """``1 - exp(-phi * (max - mean) / (std + std_eps))``; zero for a constant frame."""
    v = _values(x)
    denom = float(v.std()) + std_eps
    if v.max() == v.min() or not denom > 0:
        return 0.0
    peakness = max(0.0, (float(v.max()) - float(v.mean())) / denom)
    return _clamp01(1.0 - math.exp(-phi * peakness))


def cleanliness_score(x, params: ScoreParams | None = None) -> FrameScore:
    """Frame cleanliness ``S`` in [0, 1] plus its ingredients."""
    p = params or ScoreParams()
    v = _values(x)
    if v.size == 0:
        return FrameScore(0.0, 0.0, 0.0, 0, 0.0, [])
    lumps = lumps_from_frame(v, p.pct)
    if not lumps:
        return FrameScore(0.0, 0.0, peak_score(v, p.phi, p.std_eps) if np.any(v) else 0.0, 0, 0.0, [])
    n_sub = count_subpeaks(v, lumps, p.gamma, p.d_min, p.valid_lump_fraction)
    alpha = p.alpha_single if n_sub <= 1 else p.alpha_multi
    penalty = max(0.0, alpha * (n_sub - 1))
    e_total = float(v.sum())
    e_main = lumps[0].energy
    leftover = max(0.0, (e_total - e_main) / e_main)
    lumps_sc = _clamp01(1.0 / (1.0 + leftover + penalty))
    peak_sc = peak_score(v, p.phi, p.std_eps)
    if p.fusion_mode == "geometric_product":
        s = lumps_sc**p.w1 * peak_sc**p.w2
    else:
        s = lumps_sc**p.w1 + peak_sc**p.w2
    return FrameScore(_clamp01(s), lumps_sc, peak_sc, n_sub, leftover, lumps)
