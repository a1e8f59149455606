"""Ground-truth-annotated synthetic radar data.

Three generators stand in for recorded captures:

* ``simulate_dynamic_scene`` - slow-time beat signal of moving point
  scatterers with sinusoidal micro-motion (micro-Doppler source), plus an
  optional single-channel IQ cube for range-resolved processing.
* ``simulate_static_scene`` - multi-channel IQ cube of static reflectors
  seen by a uniform linear receive array.
* ``synth_blob_sequence`` - range-angle-like power maps built from Gaussian
  blobs, clutter lumps and a half-normal noise floor.

Ranges and velocities map linearly onto beat/Doppler frequencies through
explicit scale constants; no chirp-level dechirping is modelled.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field

import numpy as np

from .dsp import ComplexSignal
from .errors import InvalidArgumentError


def frame_rng(seed: int, index: int) -> np.random.Generator:
    """Independent generator for ``(seed, index)``, so serial and parallel runs agree."""
    return np.random.default_rng(np.random.SeedSequence([int(seed) & (2**63 - 1), int(index)]))


@dataclass
class MicroMotion:
    amplitude_mps: float = 0.0
    frequency_hz: float = 0.0
    phase_rad: float = 0.0


@dataclass
class Scatterer:
    amplitude: float
    base_range_m: float = 1.0
    base_velocity_mps: float = 0.0
    micromotion: MicroMotion = field(default_factory=MicroMotion)


@dataclass
class DynamicSceneSpec:
    scatterers: list
    chirps: int = 4000
    samples_per_chirp: int = 64
    chirp_rate_hz: float = 1000.0
    range_scale_hz_per_m: float = 50e3
    doppler_scale_hz_per_mps: float = 100.0
    fast_time_rate_hz: float = 1e6
    rng_seed: int = 0


@dataclass
class StaticTarget:
    amplitude: float
    range_m: float
    azimuth_deg: float


@dataclass
class StaticSceneSpec:
    targets: list
    rx_channels: int = 3
    element_spacing_wavelengths: float = 0.5
    chirps: int = 64
    samples_per_chirp: int = 128
    noise_power: float = 0.0
    rng_seed: int = 0
    range_scale_hz_per_m: float = 50e3
    fast_time_rate_hz: float = 1e6
    # Independent uniform phase per (target, chirp): decorrelates returns so
    # that co-range targets are not fully coherent for the covariance estimate.
    random_phase: bool = True


@dataclass
class Blob:
    centroid: tuple
    sigma_px: float
    amplitude: float


@dataclass
class BlobFieldSpec:
    """Frame sequence layout.

    ``blobs[0]`` is the primary target. Its centroid in frame ``t`` is
    ``trajectory[t]`` when given, otherwise ``centroid + t * velocity_px``.
    Other blobs and all clutter lumps are static.
    """

    frame_shape: tuple
    blobs: list
    clutter_lumps: list = field(default_factory=list)
    noise_sigma: float = 0.0
    frames: int = 1
    velocity_px: tuple = (0.0, 0.0)
    trajectory: list | None = None
    dropout_frames: frozenset = frozenset()
    rng_seed: int = 0


@dataclass
class IQCube:
    """Complex baseband record indexed ``(channel, chirp, fast-time sample)``."""

    data: np.ndarray
    chirp_rate_hz: float
    fast_time_rate_hz: float
    range_scale_hz_per_m: float
    element_spacing_wavelengths: float = 0.5

    @property
    def shape(self):
        return self.data.shape

    def range_bin_of(self, range_m: float) -> float:
        """Fractional DFT bin at which a target at ``range_m`` appears."""
        n = self.data.shape[2]
        return range_m * self.range_scale_hz_per_m / self.fast_time_rate_hz * n

    def range_axis_m(self) -> np.ndarray:
        n = self.data.shape[2]
        return np.arange(n // 2) * self.fast_time_rate_hz / (n * self.range_scale_hz_per_m)


@dataclass
class DynamicScene:
    signal: ComplexSignal
    doppler_hz: np.ndarray  # ground truth per chirp, strongest scatterer
    doppler_per_scatterer_hz: np.ndarray  # (scatterers, chirps)


def _velocity(sc: Scatterer, t: np.ndarray) -> np.ndarray:
    m = sc.micromotion
    return sc.base_velocity_mps + m.amplitude_mps * np.sin(2 * np.pi * m.frequency_hz * t + m.phase_rad)


def _displacement(sc: Scatterer, t: np.ndarray) -> np.ndarray:
    """Closed-form integral of the velocity law from 0 to t."""
    m = sc.micromotion
    d = sc.base_velocity_mps * t
    if m.amplitude_mps == 0:
        return d
    if m.frequency_hz == 0:
        return d + m.amplitude_mps * np.sin(m.phase_rad) * t
    w = 2 * np.pi * m.frequency_hz
    return d + m.amplitude_mps * (np.cos(m.phase_rad) - np.cos(w * t + m.phase_rad)) / w


def _check_dynamic(spec: DynamicSceneSpec):
    if not spec.scatterers:
        raise InvalidArgumentError("dynamic scene needs at least one scatterer")
    if spec.chirps < 1 or spec.samples_per_chirp < 1:
        raise InvalidArgumentError("chirps and samples_per_chirp must be positive")
    for name in ("chirp_rate_hz", "range_scale_hz_per_m", "doppler_scale_hz_per_mps", "fast_time_rate_hz"):
        if not getattr(spec, name) > 0:
            raise InvalidArgumentError(f"{name} must be > 0")
    slow_nyq = spec.chirp_rate_hz / 2
    fast_nyq = spec.fast_time_rate_hz / 2
    for i, sc in enumerate(spec.scatterers):
        if not sc.amplitude > 0:
            raise InvalidArgumentError(f"scatterer {i}: amplitude must be > 0")
        if sc.base_range_m < 0 or sc.micromotion.amplitude_mps < 0 or sc.micromotion.frequency_hz < 0:
            raise InvalidArgumentError(f"scatterer {i}: negative range or micromotion parameter")
        vmax = abs(sc.base_velocity_mps) + sc.micromotion.amplitude_mps
        if spec.doppler_scale_hz_per_mps * vmax >= slow_nyq:
            raise InvalidArgumentError(
                f"scatterer {i}: peak Doppler {spec.doppler_scale_hz_per_mps * vmax:.1f} Hz "
                f"violates slow-time Nyquist {slow_nyq:.1f} Hz"
            )
        t_end = (spec.chirps - 1) / spec.chirp_rate_hz
        t = np.linspace(0.0, t_end, 64)
        r = sc.base_range_m + _displacement(sc, t)
        if np.any(r < 0) or spec.range_scale_hz_per_m * r.max() >= fast_nyq:
            raise InvalidArgumentError(
                f"scatterer {i}: beat frequency outside [0, {fast_nyq:.0f}) Hz over the scene"
            )


def simulate_dynamic_scene(spec: DynamicSceneSpec) -> DynamicScene:
    """Noise-free slow-time signal ``sum_i a_i exp(j 2 pi k_d x_i(t))``.

    The returned ground-truth Doppler track follows the strongest scatterer.
    """
    _check_dynamic(spec)
    t = np.arange(spec.chirps) / spec.chirp_rate_hz
    s = np.zeros(spec.chirps, dtype=complex)
    tracks = []
    for sc in spec.scatterers:
        s += sc.amplitude * np.exp(2j * np.pi * spec.doppler_scale_hz_per_mps * _displacement(sc, t))
        tracks.append(spec.doppler_scale_hz_per_mps * _velocity(sc, t))
    tracks = np.array(tracks)
    main = int(np.argmax([sc.amplitude for sc in spec.scatterers]))
    return DynamicScene(ComplexSignal(s, spec.chirp_rate_hz), tracks[main], tracks)


def simulate_dynamic_cube(spec: DynamicSceneSpec) -> IQCube:
    """Single-channel IQ cube of the dynamic scene.

    Fast time carries the beat tone of each scatterer's instantaneous
    range; slow time carries the same Doppler phase history as
    :func:`simulate_dynamic_scene`.
    """
    _check_dynamic(spec)
    t_slow = np.arange(spec.chirps) / spec.chirp_rate_hz
    t_fast = np.arange(spec.samples_per_chirp) / spec.fast_time_rate_hz
    data = np.zeros((1, spec.chirps, spec.samples_per_chirp), dtype=complex)
    for sc in spec.scatterers:
        disp = _displacement(sc, t_slow)
        beat = spec.range_scale_hz_per_m * (sc.base_range_m + disp)
        slow_phase = np.exp(2j * np.pi * spec.doppler_scale_hz_per_mps * disp)
        data[0] += sc.amplitude * slow_phase[:, None] * np.exp(2j * np.pi * beat[:, None] * t_fast[None, :])
    return IQCube(data, spec.chirp_rate_hz, spec.fast_time_rate_hz, spec.range_scale_hz_per_m)


def simulate_static_scene(spec: StaticSceneSpec, frame_index: int = 0) -> IQCube:
    """IQ cube ``(rx_channels, chirps, samples)`` of static reflectors plus complex WGN.

    Channel ``m`` of a target at azimuth ``theta`` carries the phase
    ``2 pi m d sin(theta)`` (``d`` in wavelengths), matching the steering
    vector used by the Capon beamformer.
    """
    if spec.rx_channels < 2:
        raise InvalidArgumentError("rx_channels must be >= 2 for angle estimation")
    if not spec.targets:
        raise InvalidArgumentError("static scene needs at least one target")
    if spec.chirps < 1 or spec.samples_per_chirp < 1:
        raise InvalidArgumentError("chirps and samples_per_chirp must be positive")
    if spec.noise_power < 0 or not spec.element_spacing_wavelengths > 0:
        raise InvalidArgumentError("noise_power must be >= 0 and element spacing > 0")
    rng = frame_rng(spec.rng_seed, frame_index)
    fast_nyq = spec.fast_time_rate_hz / 2
    t_fast = np.arange(spec.samples_per_chirp) / spec.fast_time_rate_hz
    m = np.arange(spec.rx_channels)
    data = np.zeros((spec.rx_channels, spec.chirps, spec.samples_per_chirp), dtype=complex)
    for i, tg in enumerate(spec.targets):
        if not tg.amplitude > 0 or tg.range_m < 0 or not -90 <= tg.azimuth_deg <= 90:
            raise InvalidArgumentError(f"target {i}: invalid amplitude, range or azimuth")
        beat = spec.range_scale_hz_per_m * tg.range_m
        if beat >= fast_nyq:
            raise InvalidArgumentError(f"target {i}: beat frequency {beat:.0f} Hz exceeds Nyquist")
        spatial = np.exp(2j * np.pi * m * spec.element_spacing_wavelengths * np.sin(np.deg2rad(tg.azimuth_deg)))
        if spec.random_phase:
            chirp_phase = np.exp(2j * np.pi * rng.random(spec.chirps))
        else:
            chirp_phase = np.ones(spec.chirps, dtype=complex)
        tone = np.exp(2j * np.pi * beat * t_fast)
        data += tg.amplitude * spatial[:, None, None] * chirp_phase[None, :, None] * tone[None, None, :]
    if spec.noise_power > 0:
        scale = np.sqrt(spec.noise_power / 2)
        data += scale * (rng.standard_normal(data.shape) + 1j * rng.standard_normal(data.shape))
    return IQCube(
        data, 1.0, spec.fast_time_rate_hz, spec.range_scale_hz_per_m, spec.element_spacing_wavelengths
    )


def _gaussian(shape, centroid, sigma, amplitude):
    r = np.arange(shape[0])[:, None]
    c = np.arange(shape[1])[None, :]
    d2 = (r - centroid[0]) ** 2 + (c - centroid[1]) ** 2
    return amplitude * np.exp(-d2 / (2.0 * sigma**2))


def primary_trajectory(spec: BlobFieldSpec) -> np.ndarray:
    """Ground-truth primary-blob centroid per frame, shape ``(frames, 2)``."""
    if spec.trajectory is not None:
        traj = np.asarray(spec.trajectory, dtype=float)
        if traj.shape != (spec.frames, 2):
            raise InvalidArgumentError("trajectory must list one (row, col) per frame")
        return traj
    c0 = np.asarray(spec.blobs[0].centroid, dtype=float)
    v = np.asarray(spec.velocity_px, dtype=float)
    return c0[None, :] + np.arange(spec.frames)[:, None] * v[None, :]


def _inside(shape, rc):
    return 0 <= rc[0] <= shape[0] - 1 and 0 <= rc[1] <= shape[1] - 1


def synth_blob_sequence(spec: BlobFieldSpec):
    """Frames of Gaussian blobs + static clutter + half-normal noise.

    Returns
    -------
    frames : ndarray, shape (frames, rows, cols)
        Non-negative power maps.
    centroids : ndarray, shape (frames, 2)
        Ground-truth primary centroid per frame (still reported for
        dropout frames, where the primary amplitude is forced to zero).
    """
    rows, cols = spec.frame_shape
    if rows < 1 or cols < 1 or spec.frames < 1:
        raise InvalidArgumentError("frame_shape and frames must be positive")
    if not spec.blobs:
        raise InvalidArgumentError("at least one (primary) blob is required")
    if spec.noise_sigma < 0:
        raise InvalidArgumentError("noise_sigma must be >= 0")
    traj = primary_trajectory(spec)
    for t, rc in enumerate(traj):
        if not _inside(spec.frame_shape, rc):
            raise InvalidArgumentError(f"primary centroid {tuple(rc)} at frame {t} outside frame bounds")
    for b in list(spec.blobs[1:]) + list(spec.clutter_lumps):
        if not _inside(spec.frame_shape, b.centroid):
            raise InvalidArgumentError(f"centroid {tuple(b.centroid)} outside frame bounds")
        if not b.sigma_px > 0 or not b.amplitude > 0:
            raise InvalidArgumentError("blob sigma and amplitude must be > 0")
    static = np.zeros((rows, cols))
    for b in list(spec.blobs[1:]) + list(spec.clutter_lumps):
        static += _gaussian(spec.frame_shape, b.centroid, b.sigma_px, b.amplitude)
    primary = spec.blobs[0]
    out = np.empty((spec.frames, rows, cols))
    for t in range(spec.frames):
        frame = static.copy()
        if t not in spec.dropout_frames:
            frame += _gaussian(spec.frame_shape, traj[t], primary.sigma_px, primary.amplitude)
        if spec.noise_sigma > 0:
            frame += np.abs(spec.noise_sigma * frame_rng(spec.rng_seed, t).standard_normal((rows, cols)))
        out[t] = frame
    return out, traj


# Illustrative presets; not calibrated reproductions of any recorded activity.

def walking_like(rng_seed: int = 0, **overrides) -> DynamicSceneSpec:
    """Torso plus counter-phased legs and arms at a 1 Hz gait cycle."""
    gait = 1.0
    scatterers = [
        Scatterer(1.0, 2.0, 0.3, MicroMotion(0.3, gait, 0.0)),
        Scatterer(0.4, 2.0, 0.3, MicroMotion(2.0, gait, 0.0)),
        Scatterer(0.4, 2.0, 0.3, MicroMotion(2.0, gait, np.pi)),
        Scatterer(0.25, 2.1, 0.3, MicroMotion(1.2, gait, np.pi)),
        Scatterer(0.25, 2.1, 0.3, MicroMotion(1.2, gait, 0.0)),
    ]
    spec = DynamicSceneSpec(scatterers=scatterers, rng_seed=rng_seed)
    for k, v in overrides.items():
        setattr(spec, k, v)
    return spec


def static_sit(rng_seed: int = 0, **overrides) -> StaticSceneSpec:
    """Seated person (strong return) plus a weaker furniture reflector."""
    spec = StaticSceneSpec(
        targets=[StaticTarget(1.0, 2.5, 15.0), StaticTarget(0.3, 5.0, -35.0)],
        noise_power=0.01,
        rng_seed=rng_seed,
    )
    for k, v in overrides.items():
        setattr(spec, k, v)
    return spec


PRESETS = {"walking-like": walking_like, "static-sit": static_sit}


def scaled(spec, factor: float):
    """Copy of a scene spec with every scatterer/target amplitude multiplied by ``factor``."""
    out = copy.deepcopy(spec)
    items = out.scatterers if isinstance(out, DynamicSceneSpec) else out.targets
    for it in items:
        it.amplitude *= factor
    return out
