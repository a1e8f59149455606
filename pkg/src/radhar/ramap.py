"""Range-angle maps via per-range-bin Capon (MVDR) beamforming."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dsp import make_window
from .errors import InvalidArgumentError, NumericalFailureError
from .synth import IQCube

DEFAULT_ANGLES = np.arange(-60.0, 61.0, 1.0)


@dataclass
class RAMap:
    power: np.ndarray  # (range_bins, angle_bins)
    angle_grid_deg: np.ndarray
    range_axis_m: np.ndarray
    frame_index: int = 0

    def __post_init__(self):
        self.power = np.asarray(self.power, dtype=float)
        self.angle_grid_deg = np.asarray(self.angle_grid_deg, dtype=float)
        self.range_axis_m = np.asarray(self.range_axis_m, dtype=float)
        if self.power.shape != (self.range_axis_m.size, self.angle_grid_deg.size):
            raise InvalidArgumentError("RA-map axes do not match the power matrix")


@dataclass
class CovarianceEstimate:
    matrix: np.ndarray
    snapshots_used: int
    diagonal_loading: float


def range_profiles(iq) -> np.ndarray:
    """Hamming-windowed fast-time DFT per (channel, chirp); positive half. Shape ``(M, K, N//2)``."""
    data = iq.data if isinstance(iq, IQCube) else np.asarray(iq)
    if data.ndim != 3 or data.size == 0:
        raise InvalidArgumentError("IQ cube must be a non-empty (channel, chirp, sample) array")
    n = data.shape[2]
    w = make_window("hamming", n)
    return np.fft.fft(data * w, axis=2)[:, :, : max(n // 2, 1)]


def spatial_covariance(snapshots, loading_factor: float = 1e-3) -> CovarianceEstimate:
    """Sample covariance of ``(M, K)`` snapshots plus ``loading_factor * trace / M`` on the diagonal."""
    x = np.asarray(snapshots, dtype=complex)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2 or x.shape[1] < 1:
        raise InvalidArgumentError("need at least one M-channel snapshot")
    if loading_factor < 0:
        raise InvalidArgumentError("loading_factor must be >= 0")
    m, k = x.shape
    r = (x @ x.conj().T) / k
    r = 0.5 * (r + r.conj().T)
    load = loading_factor * float(np.trace(r).real) / m
    return CovarianceEstimate(r + load * np.eye(m), k, load)


def steering_matrix(n_elements: int, angle_grid_deg, spacing_wavelengths: float = 0.5) -> np.ndarray:
    """``(M, G)`` matrix of ``exp(j 2 pi m d sin(theta))``."""
    m = np.arange(n_elements)[:, None]
    s = np.sin(np.deg2rad(np.asarray(angle_grid_deg, dtype=float)))[None, :]
    return np.exp(2j * np.pi * m * spacing_wavelengths * s)


def capon_spectrum(cov, angle_grid_deg=DEFAULT_ANGLES, element_spacing_wavelengths: float = 0.5) -> np.ndarray:
    """``P(theta) = 1 / (a^H R^-1 a)`` using a Cholesky solve."""
    r = cov.matrix if isinstance(cov, CovarianceEstimate) else np.asarray(cov, dtype=complex)
    a = steering_matrix(r.shape[0], angle_grid_deg, element_spacing_wavelengths)
    try:
        chol = np.linalg.cholesky(r)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailureError("covariance is not positive definite; enable diagonal loading") from exc
    # a^H R^-1 a = ||L^-1 a||^2
    y = np.linalg.solve(chol, a)
    q = np.sum(np.abs(y) ** 2, axis=0)
    if not np.all(np.isfinite(q)) or np.any(q <= 0):
        raise NumericalFailureError("Capon denominator not finite and positive")
    return 1.0 / q


def mti(profiles: np.ndarray) -> np.ndarray:
    """Mean-chirp subtraction per (channel, range bin)."""
    return profiles - profiles.mean(axis=1, keepdims=True)


def ra_map_from_profiles(
    profiles: np.ndarray,
    angle_grid_deg=DEFAULT_ANGLES,
    spacing_wavelengths: float = 0.5,
    loading_factor: float = 1e-3,
) -> np.ndarray:
    """Capon power for every range bin of ``(M, K, R)`` profiles; returns ``(R, G)``.

    Range bins without any energy (zero covariance trace) get power 0.
    """
    m, k, n_range = profiles.shape
    x = np.moveaxis(profiles, 2, 0)  # (R, M, K)
    r = np.einsum("rmk,rnk->rmn", x, x.conj()) / k
    r = 0.5 * (r + np.conj(np.swapaxes(r, 1, 2)))
    tr = np.einsum("rmm->r", r).real
    live = tr > 0
    load = loading_factor * tr / m
    r = r + load[:, None, None] * np.eye(m)[None]
    out = np.zeros((n_range, np.size(angle_grid_deg)))
    if np.any(live):
        a = steering_matrix(m, angle_grid_deg, spacing_wavelengths)
        try:
            chol = np.linalg.cholesky(r[live])
        except np.linalg.LinAlgError as exc:
            raise NumericalFailureError("covariance is not positive definite; enable diagonal loading") from exc
        y = np.linalg.solve(chol, np.broadcast_to(a, (int(live.sum()),) + a.shape))
        q = np.sum(np.abs(y) ** 2, axis=1)
        if not np.all(np.isfinite(q)) or np.any(q <= 0):
            raise NumericalFailureError("Capon denominator not finite and positive")
        out[live] = 1.0 / q
    return out


def build_ra_frames(
    cubes,
    angle_grid_deg=DEFAULT_ANGLES,
    spacing_wavelengths: float | None = None,
    loading_factor: float = 1e-3,
    use_mti: bool = False,
    range_axis_m=None,
) -> list[RAMap]:
    """One RA map per IQ cube (range FFT, optional MTI, per-bin covariance, Capon)."""
    cubes = list(cubes)
    if not cubes:
        return []
    shape0 = np.shape(cubes[0].data if isinstance(cubes[0], IQCube) else cubes[0])
    angles = np.asarray(angle_grid_deg, dtype=float)
    frames = []
    for i, cube in enumerate(cubes):
        data = cube.data if isinstance(cube, IQCube) else np.asarray(cube)
        if data.shape != shape0:
            raise InvalidArgumentError(f"cube {i} has shape {data.shape}, expected {shape0}")
        d = spacing_wavelengths
        if d is None:
            d = cube.element_spacing_wavelengths if isinstance(cube, IQCube) else 0.5
        prof = range_profiles(data)
        if use_mti:
            prof = mti(prof)
        power = ra_map_from_profiles(prof, angles, d, loading_factor)
        if range_axis_m is not None:
            axis = np.asarray(range_axis_m, dtype=float)
        elif isinstance(cube, IQCube):
            axis = cube.range_axis_m()
        else:
            axis = np.arange(power.shape[0], dtype=float)
        frames.append(RAMap(power, angles, axis, i))
    return frames
