"""Reconstruction quality metrics and bandwidth accounting.

PSNR and SSIM are evaluated in the linear radiance domain against an
explicit peak; the tone-mapped variant applies the mu-law compression to
both images first and scores them against peak 1. Identical inputs score
infinite PSNR (a documented sentinel, not an error) and SSIM exactly 1.

Bandwidth figures are exact bit counts per second: a raw spike stream
costs height*width*rate bits/s (single-channel full-resolution readout),
while the encoded output costs pixels*channels*bits*rate/stride. The
mosaic layout halves each spatial dimension and yields three channels.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import correlate1d

from .types import HdrImage, ValidationError
from .unwrap import DEFAULT_MU, DEFAULT_PEAK, mu_law

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03


def _check_pair(a: HdrImage, b: HdrImage):
    if a.data.shape != b.data.shape:
        raise ValidationError(
            f"HdrImage: dimension mismatch {a.data.shape} vs {b.data.shape}")


def psnr_linear(a: HdrImage, b: HdrImage, peak: float) -> float:
    """10*log10(peak^2 / MSE); +inf when the images are identical."""
    _check_pair(a, b)
    if not peak > 0:
        raise ValidationError(f"peak: must be positive, got {peak}")
    mse = float(np.mean((a.values() - b.values()) ** 2))
    if mse == 0.0:
        return float("inf")
    return 10.0 * np.log10(peak * peak / mse)


def _ssim_kernel() -> np.ndarray:
    half = SSIM_WINDOW // 2
    t = np.arange(-half, half + 1, dtype=np.float64)
    g = np.exp(-(t * t) / (2.0 * SSIM_SIGMA * SSIM_SIGMA))
    return g / g.sum()


def _windowed_mean(plane: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    half = len(kernel) // 2
    out = correlate1d(plane, kernel, axis=0, mode="constant")
    out = correlate1d(out, kernel, axis=1, mode="constant")
    return out[half:-half, half:-half]  # full-support windows only


def ssim_linear(a: HdrImage, b: HdrImage, peak: float) -> float:
    """Mean structural similarity over an 11x11 Gaussian window (sigma 1.5,
    stability constants 0.01/0.03 of peak), channels averaged."""
    _check_pair(a, b)
    if not peak > 0:
        raise ValidationError(f"peak: must be positive, got {peak}")
    if a.height < SSIM_WINDOW or a.width < SSIM_WINDOW:
        raise ValidationError(
            f"HdrImage: SSIM needs at least {SSIM_WINDOW}x{SSIM_WINDOW}, got "
            f"{a.height}x{a.width}")
    kernel = _ssim_kernel()
    c1 = (SSIM_K1 * peak) ** 2
    c2 = (SSIM_K2 * peak) ** 2
    xs = a.values()
    ys = b.values()
    scores = []
    for c in range(a.channels):
        x = xs[:, :, c]
        y = ys[:, :, c]
        mu_x = _windowed_mean(x, kernel)
        mu_y = _windowed_mean(y, kernel)
        var_x = _windowed_mean(x * x, kernel) - mu_x * mu_x
        var_y = _windowed_mean(y * y, kernel) - mu_y * mu_y
        cov = _windowed_mean(x * y, kernel) - mu_x * mu_y
        num = (2.0 * mu_x * mu_y + c1) * (2.0 * cov + c2)
        den = (mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2)
        scores.append(float(np.mean(num / den)))
    return float(np.mean(scores))


def psnr_mu(a: HdrImage, b: HdrImage, mu: float = DEFAULT_MU,
            peak: float = DEFAULT_PEAK) -> float:
    """PSNR of the mu-law tone-mapped images against unit peak; `peak`
    normalizes the linear inputs before compression."""
    return psnr_linear(mu_law(a, mu=mu, peak=peak), mu_law(b, mu=mu, peak=peak), 1.0)


@dataclass(frozen=True)
class BandwidthReport:
    """Exact bit rates of the raw spike stream and the encoded output."""

    raw_bps: int
    modulo_bps: int | float
    reduction_ratio: float

    @property
    def raw_gbps(self) -> float:
        return self.raw_bps / 1e9

    @property
    def modulo_gbps(self) -> float:
        return self.modulo_bps / 1e9


def bandwidth_report(height: int, width: int, channels: int, readout_rate_hz: int,
                     bit_depth: int, stride: int, mosaic: bool) -> BandwidthReport:
    """Bandwidth of raw spike transmission vs. sliding-window modulo output.

    Raw baseline: single-channel full-resolution binary frames at the
    readout rate. Encoded: N-bit frames at rate/stride; with `mosaic` the
    encoder sees half-resolution 3-channel input.
    """
    for name, v in (("height", height), ("width", width), ("channels", channels),
                    ("readout_rate_hz", readout_rate_hz), ("bit_depth", bit_depth),
                    ("stride", stride)):
        if v <= 0:
            raise ValidationError(f"{name}: must be positive, got {v}")
    if mosaic and (height % 2 or width % 2):
        raise ValidationError(
            f"height/width: mosaic needs even dimensions, got {height}x{width}")
    raw_bps = height * width * readout_rate_hz
    if mosaic:
        pixels_bits = (height // 2) * (width // 2) * 3 * bit_depth
    else:
        pixels_bits = height * width * channels * bit_depth
    total = pixels_bits * readout_rate_hz
    modulo_bps = total // stride if total % stride == 0 else total / stride
    reduction = (raw_bps - modulo_bps) / raw_bps
    return BandwidthReport(raw_bps=raw_bps, modulo_bps=modulo_bps,
                           reduction_ratio=reduction)
