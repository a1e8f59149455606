"""Full-reference image metrics: MSE, MAE, RMSE, PSNR, Pearson correlation and SSIM.

Inputs are :class:`~radhar.spectrogram.GrayImage` objects or plain 2-D
arrays; all arithmetic is done in float64.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import InvalidArgumentError, UndefinedStatisticError
from .spectrogram import GrayImage

METRIC_COLUMNS = ("mse", "mae", "rmse", "psnr_db", "pearson", "ssim")


def _as_float(img) -> np.ndarray:
    a = img.pixels if isinstance(img, GrayImage) else img
    return np.asarray(a, dtype=np.float64)


def _pair(ref, test):
    a, b = _as_float(ref), _as_float(test)
    if a.shape != b.shape:
        raise InvalidArgumentError(f"dimension mismatch: {a.shape} vs {b.shape}")
    if a.size == 0:
        raise InvalidArgumentError("images are empty")
    return a, b


def error_metrics(ref, test) -> dict:
    a, b = _pair(ref, test)
    d = a - b
    mse = float(np.mean(d * d))
    return {"mse": mse, "mae": float(np.mean(np.abs(d))), "rmse": math.sqrt(mse)}


def psnr(ref, test, max_val: float = 255.0) -> float:
    """PSNR in dB; ``math.inf`` when the images are identical."""
    mse = error_metrics(ref, test)["mse"]
    if mse == 0:
        return math.inf
    return 10.0 * math.log10(max_val**2 / mse)


def pearson(ref, test) -> float:
    a, b = _pair(ref, test)
    a = a.ravel() - a.mean()
    b = b.ravel() - b.mean()
    na, nb = np.sqrt(np.dot(a, a)), np.sqrt(np.dot(b, b))
    if na == 0 or nb == 0:
        raise UndefinedStatisticError("Pearson correlation undefined for a zero-variance image")
    return float(np.clip(np.dot(a, b) / (na * nb), -1.0, 1.0))


def gaussian_kernel(size: int = 11, sigma: float = 1.5) -> np.ndarray:
    """Normalized 1-D Gaussian taps."""
    x = np.arange(size) - (size - 1) / 2.0
    g = np.exp(-(x**2) / (2.0 * sigma**2))
    return g / g.sum()


def _filter_valid(img: np.ndarray, g: np.ndarray) -> np.ndarray:
    # separable weighted sum over every fully-contained window
    n = g.size
    rows = np.lib.stride_tricks.sliding_window_view(img, n, axis=0) @ g
    return np.lib.stride_tricks.sliding_window_view(rows, n, axis=1) @ g


def ssim_map(ref, test, win_size: int = 11, sigma: float = 1.5, k1: float = 0.01, k2: float = 0.03, data_range: float = 255.0):
    a, b = _pair(ref, test)
    if a.shape[0] < win_size or a.shape[1] < win_size:
        raise InvalidArgumentError(f"images smaller than the {win_size}x{win_size} SSIM window")
    g = gaussian_kernel(win_size, sigma)
    c1 = (k1 * data_range) ** 2
    c2 = (k2 * data_range) ** 2
    mu_a = _filter_valid(a, g)
    mu_b = _filter_valid(b, g)
    var_a = _filter_valid(a * a, g) - mu_a * mu_a
    var_b = _filter_valid(b * b, g) - mu_b * mu_b
    cov = _filter_valid(a * b, g) - mu_a * mu_b
    num = (2 * mu_a * mu_b + c1) * (2 * cov + c2)
    den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2)
    return num / den


def ssim(ref, test, win_size: int = 11, sigma: float = 1.5, k1: float = 0.01, k2: float = 0.03, data_range: float = 255.0) -> float:
    """Mean single-scale SSIM over all valid Gaussian-window positions."""
    return float(np.mean(ssim_map(ref, test, win_size, sigma, k1, k2, data_range)))


@dataclass
class MetricReport:
    mse: float
    mae: float
    rmse: float
    psnr_db: float
    pearson: float
    ssim: float
    identical: bool = False
    params: dict = field(default_factory=dict)

    def as_row(self) -> dict:
        row = asdict(self)
        row.pop("params")
        return row


def evaluate(ref, test, max_val: float = 255.0, win_size: int = 11, sigma: float = 1.5) -> MetricReport:
    """All six metrics. An undefined Pearson correlation is reported as NaN."""
    err = error_metrics(ref, test)
    p = psnr(ref, test, max_val)
    try:
        r = pearson(ref, test)
    except UndefinedStatisticError:
        r = math.nan
    s = ssim(ref, test, win_size, sigma, data_range=max_val)
    return MetricReport(
        err["mse"], err["mae"], err["rmse"], p, r, s,
        identical=math.isinf(p),
        params={"max_val": max_val, "ssim_window": win_size, "ssim_sigma": sigma, "k1": 0.01, "k2": 0.03},
    )


def format_value(v: float) -> str:
    """CSV/table text for a metric; PSNR of identical images serializes as ``inf``."""
    if isinstance(v, bool):
        return "true" if v else "false"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    if math.isnan(v):
        return "nan"
    return f"{v:.6f}"
