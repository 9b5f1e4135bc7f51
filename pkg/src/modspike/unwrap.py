"""Iteration-free unwrapping of modulo frames, plus the numeric primitives
used to reason about wrapped measurements.

`unwrap_poisson` recovers the scene from a wrapped frame in three steps,
per channel:

  1. centered gradient: lar(gradient(frame), 2^N) — identical to the
     centered gradient of the unwrapped scene wherever neighboring-pixel
     differences stay within half a period (the Itoh condition);
  2. least-squares integration: poisson_solve(divergence(.)) gives a
     mean-zero estimate of the scene up to an additive constant;
  3. congruence snapping: an exhaustive search over the 2^N unit offsets
     picks the constant whose shifted estimate best agrees with the
     observation modulo 2^N, the per-pixel wrap counts are rounded out
     (ties away from zero), and the map is re-based so its minimum is
     zero — anchoring the scene to the base band under the assumption
     that at least one pixel never wrapped.

The output is exactly congruent to the input by construction, so the
zeroth-order residual (mean centered remainder of hdr - frame) is zero.
Because congruence also forces the *wrapped* gradients of output and
input to agree bit-exactly, a wrapped-both-sides comparison carries no
information about reconstruction quality; the first/second-order
residuals therefore compare the reconstruction's plain gradient and
Laplacian against the centered measurements lar(grad frame) and
lar(lap frame). Under the half-period condition these are literal zeros
for integer scenes; measurement fields with curl (half-period
violations) leave a nonzero mismatch and clear `converged`.

Also here: the literal wrapped-domain consistency residuals for scoring
arbitrary candidate reconstructions, the sinusoidal embedding of the
wrap phase, and the invertible mu-law tone map.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .operators import GradientField, divergence, gradient, laplacian, lar, poisson_solve
from .types import HdrImage, ModuloFrame, ValidationError

RESIDUAL_TOL = 1e-6
DEFAULT_MU = 5000.0
DEFAULT_PEAK = float(2 ** 12 - 1)  # 12-bit ground truth convention


@dataclass(frozen=True)
class ConsistencyResiduals:
    """Mean absolute consistency residuals at zeroth/first/second order."""

    l_mod: float
    l_grad: float
    l_lap: float

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.l_mod, self.l_grad, self.l_lap)

    def max(self) -> float:
        return max(self.as_tuple())


@dataclass(frozen=True)
class UnwrapResult:
    """Reconstruction plus per-pixel wrap counts and consistency report.

    hdr = frame + rollover_map * 2^N holds elementwise, exactly.
    """

    hdr: HdrImage
    rollover_map: np.ndarray  # (H, W, C) int32, >= 0
    residuals: ConsistencyResiduals
    converged: bool


def _round_half_away(x: np.ndarray) -> np.ndarray:
    return np.sign(x) * np.floor(np.abs(x) + 0.5)


def _offset_objective(diff: np.ndarray, modulus: int) -> np.ndarray:
    """Objective(c) = sum_p |lar(diff_p + c, modulus)| for every integer
    offset c in [0, modulus).

    Computed exactly from a residue histogram: splitting each residue into
    integer bin and fractional part makes the objective a circular
    cross-correlation of the histogram with the centered-distance kernel.
    """
    e = np.mod(diff.ravel(), modulus)
    bins = np.minimum(np.floor(e).astype(np.int64), modulus - 1)
    frac = e - bins
    hist = np.bincount(bins, minlength=modulus).astype(np.float64)
    fsum = np.bincount(bins, weights=frac, minlength=modulus)
    b = np.arange(modulus)
    kernel = np.where(b < modulus // 2, b, modulus - b).astype(np.float64)
    sign = np.where(b < modulus // 2, 1.0, -1.0)
    if modulus <= 2048:
        idx = (np.arange(modulus)[:, None] + b[None, :]) % modulus  # [c, j] -> (j+c) mod m
        return kernel[idx] @ hist + sign[idx] @ fsum
    spec_h = np.fft.rfft(hist)
    spec_f = np.fft.rfft(fsum)
    return (np.fft.irfft(np.conj(spec_h) * np.fft.rfft(kernel), n=modulus)
            + np.fft.irfft(np.conj(spec_f) * np.fft.rfft(sign), n=modulus))


def _snap_channel(estimate: np.ndarray, observed: np.ndarray, modulus: int) -> np.ndarray:
    """Wrap counts for one channel: align the mean-zero estimate with the
    observation and round out the per-pixel multiples of the modulus."""
    diff = estimate - observed
    offset = int(np.argmin(_offset_objective(diff, modulus)))  # first minimum: smallest c
    rollover = _round_half_away((diff + offset) / modulus).astype(np.int64)
    rollover -= rollover.min()  # base-band anchor; also enforces >= 0
    return rollover


def unwrap_poisson(frame: ModuloFrame, tol: float = RESIDUAL_TOL) -> UnwrapResult:
    """Recover the scene congruent to `frame` via least-squares integration
    of the centered wrapped gradient plus congruence snapping."""
    modulus = frame.modulus
    obs = frame.values()
    gf = gradient(obs)
    centered = GradientField(gx=lar(gf.gx, modulus), gy=lar(gf.gy, modulus))
    estimate = poisson_solve(divergence(centered))
    rollover = np.empty(obs.shape, dtype=np.int32)
    for c in range(obs.shape[2]):
        rollover[:, :, c] = _snap_channel(estimate[:, :, c], obs[:, :, c], modulus)
    hdr_values = obs + rollover.astype(np.float64) * modulus
    hdr = HdrImage(data=hdr_values.astype(np.float32))
    residuals = _reconstruction_residuals(hdr_values, obs, centered, modulus)
    return UnwrapResult(hdr=hdr, rollover_map=rollover, residuals=residuals,
                        converged=residuals.max() < tol)


def _reconstruction_residuals(hdr_values: np.ndarray, obs: np.ndarray,
                              centered: GradientField, modulus: int) -> ConsistencyResiduals:
    """Quality report for a congruence-snapped reconstruction.

    Congruence makes the wrapped gradients of hdr and frame identical by
    construction, so the informative first/second-order checks compare the
    reconstruction's plain differential fields against the centered
    measurements; they vanish exactly when the measurement field was
    integrable (half-period condition) and stay nonzero when it carried
    curl.
    """
    l_mod = float(np.mean(np.abs(lar(hdr_values - obs, modulus))))
    gh = gradient(hdr_values)
    l_grad = float(np.mean(np.abs(np.stack([gh.gx - centered.gx,
                                            gh.gy - centered.gy]))))
    l_lap = float(np.mean(np.abs(laplacian(hdr_values).lap
                                 - lar(laplacian(obs).lap, modulus))))
    return ConsistencyResiduals(l_mod=l_mod, l_grad=l_grad, l_lap=l_lap)


def consistency_residuals(hdr: HdrImage, frame: ModuloFrame) -> ConsistencyResiduals:
    """Mean absolute wrapped disagreement between a reconstruction and the
    observation at zeroth (value), first (gradient) and second (Laplacian)
    order. Invariant under shifting hdr by any multiple of 2^N."""
    if (hdr.height, hdr.width, hdr.channels) != (frame.height, frame.width, frame.channels):
        raise ValidationError(
            f"HdrImage: dimensions {hdr.data.shape} do not match frame {frame.data.shape}")
    modulus = frame.modulus
    a = hdr.values()
    b = frame.values()
    l_mod = float(np.mean(np.abs(lar(a - b, modulus))))
    ga, gb = gradient(a), gradient(b)
    l_grad = float(np.mean(np.abs(np.stack([lar(ga.gx, modulus) - lar(gb.gx, modulus),
                                            lar(ga.gy, modulus) - lar(gb.gy, modulus)]))))
    l_lap = float(np.mean(np.abs(lar(laplacian(a).lap, modulus)
                                 - lar(laplacian(b).lap, modulus))))
    return ConsistencyResiduals(l_mod=l_mod, l_grad=l_grad, l_lap=l_lap)


def cyclic_encode(hdr: HdrImage, bit_depth: int) -> tuple[np.ndarray, np.ndarray]:
    """Sinusoidal embedding of the wrap phase: (sin 2*pi*phi, cos 2*pi*phi)
    with phi = mod(hdr, 2^N) / 2^N. Periodic in steps of 2^N by construction."""
    if not 1 <= bit_depth <= 16:
        raise ValidationError(f"bit_depth: must be in 1..16, got {bit_depth}")
    modulus = 1 << bit_depth
    phase = np.mod(hdr.values(), modulus) / modulus
    return np.sin(2.0 * np.pi * phase), np.cos(2.0 * np.pi * phase)


def mu_law(hdr: HdrImage, mu: float = DEFAULT_MU, peak: float = DEFAULT_PEAK) -> HdrImage:
    """Logarithmic tone map log(1 + mu*x)/log(1 + mu) of the peak-normalized
    image."""
    if not mu > 0:
        raise ValidationError(f"mu: must be positive, got {mu}")
    if not peak > 0:
        raise ValidationError(f"peak: must be positive, got {peak}")
    x = hdr.values() / peak
    mapped = np.log1p(mu * x) / np.log1p(mu)
    return HdrImage(data=mapped.astype(np.float32))


def mu_law_inverse(mapped: HdrImage, mu: float = DEFAULT_MU,
                   peak: float = DEFAULT_PEAK) -> HdrImage:
    """Exact algebraic inverse of `mu_law`: x = (exp(y*log(1+mu)) - 1)/mu,
    then denormalize by peak."""
    if not mu > 0:
        raise ValidationError(f"mu: must be positive, got {mu}")
    if not peak > 0:
        raise ValidationError(f"peak: must be positive, got {peak}")
    y = mapped.values()
    x = np.expm1(y * np.log1p(mu)) / mu
    return HdrImage(data=(x * peak).astype(np.float32))
