"""Temporal lump tracking across RA frames, plus soft/hard region masks.

Per frame the tracker either accepts the heaviest lump outright (score at
or above ``tau``), gates candidates around the previous centroid, or
coasts on the last centroid for at most ``window_frames`` frames before
dropping the track.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgumentError
from .quality import FrameScore, Lump, ScoreParams, cleanliness_score
from .ramap import RAMap

MODES = ("accepted", "gated", "coasting", "bootstrap", "lost")


@dataclass
class TrackerParams:
    tau: float = 0.8
    gate_distance_px: float = 30.0
    window_frames: int = 5
    distance: str = "euclidean"  # or "chebyshev" (per-axis)

    def __post_init__(self):
        if not 0 <= self.tau <= 1:
            raise InvalidArgumentError("tau must be in [0, 1]")
        if not self.gate_distance_px > 0:
            raise InvalidArgumentError("gate_distance_px must be > 0")
        if self.window_frames < 1:
            raise InvalidArgumentError("window_frames must be >= 1")
        if self.distance not in ("euclidean", "chebyshev"):
            raise InvalidArgumentError("distance must be 'euclidean' or 'chebyshev'")


@dataclass
class TrackState:
    frame_index: int
    chosen_lump: Lump | None
    centroid: tuple | None
    accepted_by_score: bool = False
    gated: bool = False
    coasting: bool = False
    bootstrap: bool = False
    score: float = 0.0
    frame_score: FrameScore | None = field(default=None, repr=False)

    @property
    def mode(self) -> str:
        if self.accepted_by_score:
            return "accepted"
        if self.gated:
            return "gated"
        if self.coasting:
            return "coasting"
        if self.bootstrap:
            return "bootstrap"
        return "lost"


def _dist(a, b, kind: str) -> float:
    dr, dc = a[0] - b[0], a[1] - b[1]
    if kind == "chebyshev":
        return max(abs(dr), abs(dc))
    return math.hypot(dr, dc)


def track_sequence(
    frames,
    params: TrackerParams | None = None,
    score_params: ScoreParams | None = None,
    scores: list[FrameScore] | None = None,
) -> list[TrackState]:
    """Track the primary scatterer through ``frames``.

    ``scores`` may carry precomputed :func:`cleanliness_score` results, one
    per frame, to avoid rescoring.
    """
    params = params or TrackerParams()
    frames = list(frames)
    if not frames:
        raise InvalidArgumentError("cannot track an empty frame sequence")
    if scores is not None and len(scores) != len(frames):
        raise InvalidArgumentError("need exactly one precomputed score per frame")
    states = []
    prev = None  # last valid centroid, None when the track is absent
    coast = 0
    for t, frame in enumerate(frames):
        fs = scores[t] if scores is not None else cleanliness_score(frame, score_params)
        lumps = fs.lump_inventory
        st = TrackState(t, None, None, score=fs.S, frame_score=fs)
        if lumps and fs.S >= params.tau:
            st.chosen_lump = lumps[0]
            st.accepted_by_score = True
        elif prev is not None:
            # lumps are sorted heaviest first, ties by bbox origin
            for L in lumps:
                if _dist(L.centroid, prev, params.distance) <= params.gate_distance_px:
                    st.chosen_lump = L
                    st.gated = True
                    break
        elif t == 0 and lumps:
            st.chosen_lump = lumps[0]
            st.bootstrap = True

        if st.chosen_lump is not None:
            st.centroid = st.chosen_lump.centroid
            prev = st.centroid
            coast = 0
        elif prev is not None:
            coast += 1
            if coast > params.window_frames:
                prev = None
                coast = 0
            else:
                st.coasting = True
                st.centroid = prev
        states.append(st)
    return states


@dataclass
class Mask:
    weights: np.ndarray
    kind: str


def _check_centroid(shape, centroid):
    if not (0 <= centroid[0] <= shape[0] - 1 and 0 <= centroid[1] <= shape[1] - 1):
        raise InvalidArgumentError(f"centroid {tuple(centroid)} outside a {shape} frame")


def soft_mask(shape, centroid, decay_radius_px: float = 10.0) -> Mask:
    """Radial Gaussian weights ``exp(-d^2 / (2 r^2))`` around ``centroid``."""
    _check_centroid(shape, centroid)
    if not decay_radius_px > 0:
        raise InvalidArgumentError("decay_radius_px must be > 0")
    r = np.arange(shape[0])[:, None] - centroid[0]
    c = np.arange(shape[1])[None, :] - centroid[1]
    return Mask(np.exp(-(r**2 + c**2) / (2.0 * decay_radius_px**2)), "soft")


def hard_mask(shape, bbox, margin_px: int = 2) -> Mask:
    """Ones inside ``bbox`` (inclusive corners) grown by ``margin_px`` and clipped to the frame."""
    r0, c0, r1, c1 = (int(v) for v in bbox)
    if r1 < r0 or c1 < c0:
        raise InvalidArgumentError(f"empty bounding box {bbox}")
    if margin_px < 0:
        raise InvalidArgumentError("margin_px must be >= 0")
    r0, c0 = max(0, r0 - margin_px), max(0, c0 - margin_px)
    r1, c1 = min(shape[0] - 1, r1 + margin_px), min(shape[1] - 1, c1 + margin_px)
    if r1 < r0 or c1 < c0:
        raise InvalidArgumentError(f"bounding box {bbox} lies outside a {shape} frame")
    w = np.zeros(shape)
    w[r0 : r1 + 1, c0 : c1 + 1] = 1.0
    return Mask(w, "hard")


def apply_mask(x, mask: Mask):
    """Elementwise product; an :class:`RAMap` input keeps its axes."""
    v = x.power if isinstance(x, RAMap) else np.asarray(x, dtype=float)
    if v.shape != mask.weights.shape:
        raise InvalidArgumentError(f"mask shape {mask.weights.shape} does not match frame {v.shape}")
    out = v * mask.weights
    if isinstance(x, RAMap):
        return RAMap(out, x.angle_grid_deg, x.range_axis_m, x.frame_index)
    return out


def masks_for_track(shape, states: list[TrackState], decay_radius_px: float = 10.0, margin_px: int = 2):
    """Soft and hard mask stacks ``(frames, rows, cols)``.

    Coasting frames reuse the most recent lump's bounding box; frames without
    a track get all-zero masks.
    """
    n = len(states)
    soft = np.zeros((n,) + tuple(shape))
    hard = np.zeros((n,) + tuple(shape))
    last_bbox = None
    for i, st in enumerate(states):
        if st.chosen_lump is not None:
            last_bbox = st.chosen_lump.bbox
        if st.centroid is None:
            last_bbox = None
            continue
        soft[i] = soft_mask(shape, st.centroid, decay_radius_px).weights
        if last_bbox is not None:
            hard[i] = hard_mask(shape, last_bbox, margin_px).weights
    return soft, hard
