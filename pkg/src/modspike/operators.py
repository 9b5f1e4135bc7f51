"""Discrete differential operators, the least-absolute-remainder map, and a
Neumann Poisson solver.

The discretization is fixed so the three operators close algebraically:

  * gradient  — forward differences, last row/column zero-padded
  * divergence — backward differences (negative adjoint of the gradient)
  * laplacian  = divergence(gradient(.)), exactly the 5-point stencil with
    reflecting (Neumann) boundaries

With that choice the Laplacian is diagonalized by the type-II cosine basis:
the 1-D eigenvalues are 2*cos(pi*k/n) - 2, so `poisson_solve` inverts it
spectrally up to floating point. The solution is gauged to mean zero; the
constant is resolved downstream by congruence snapping.

All functions are pure, operate on (H, W) or (H, W, C) rasters in float64,
process channels independently, and are deterministic for a fixed input.

A key arithmetic fact used throughout: the least absolute remainder of a
sum depends only on the residues of its terms, so wrapping an integer
raster modulo m leaves the centered remainders of its gradient and
Laplacian unchanged. That identity is what makes wrapped frames usable as
first- and second-order measurements of the unwrapped scene.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np
from scipy.fft import dctn, idctn


@dataclass(frozen=True)
class GradientField:
    """Per-axis forward differences; gx zero on the last column, gy on the
    last row."""

    gx: np.ndarray
    gy: np.ndarray


@dataclass(frozen=True)
class LaplacianField:
    """divergence(gradient(.)) raster; entries sum to zero by telescoping."""

    lap: np.ndarray


def _as_float_raster(img) -> np.ndarray:
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim not in (2, 3):
        raise ValueError(f"expected a (H, W) or (H, W, C) raster, got shape {arr.shape}")
    return arr


def gradient(img) -> GradientField:
    """Forward differences along width (gx) and height (gy)."""
    arr = _as_float_raster(img)
    gx = np.zeros_like(arr)
    gy = np.zeros_like(arr)
    gx[:, :-1] = arr[:, 1:] - arr[:, :-1]
    gy[:-1, :] = arr[1:, :] - arr[:-1, :]
    return GradientField(gx=gx, gy=gy)


def divergence(gf: GradientField) -> np.ndarray:
    """Backward-difference divergence, the negative adjoint of `gradient`.

    divergence(gradient(x)) equals the 5-point Neumann Laplacian of x.
    """
    gx = np.asarray(gf.gx, dtype=np.float64)
    gy = np.asarray(gf.gy, dtype=np.float64)
    if gx.shape != gy.shape:
        raise ValueError(f"gradient components disagree: {gx.shape} vs {gy.shape}")
    div = np.zeros_like(gx)
    div[:, 0] += gx[:, 0]
    div[:, 1:] += gx[:, 1:] - gx[:, :-1]
    div[0, :] += gy[0, :]
    div[1:, :] += gy[1:, :] - gy[:-1, :]
    return div


def laplacian(img) -> LaplacianField:
    """5-point Neumann Laplacian, computed as divergence(gradient(img))."""
    return LaplacianField(lap=divergence(gradient(img)))


def lar(values, modulus: float):
    """Least absolute remainder: map each value to its representative in
    [-modulus/2, modulus/2).

    Depends only on the residue class mod `modulus`, and is exact for
    integer-valued float64 input.
    """
    if not modulus > 0:
        raise ValueError(f"modulus must be positive, got {modulus}")
    arr = np.asarray(values, dtype=np.float64)
    half = modulus / 2.0
    return np.mod(arr + half, modulus) - half


def _fft_workers() -> int:
    # MODSPIKE_THREADS caps transform workers; output is deterministic either way
    try:
        return max(1, int(os.environ.get("MODSPIKE_THREADS", "1")))
    except ValueError:
        return 1


def poisson_solve(rhs) -> np.ndarray:
    """Least-squares solve of laplacian(x) = rhs under Neumann boundaries.

    The right-hand side is projected onto the compatible subspace by
    removing its per-channel mean; the returned x has mean exactly zero
    (the constant mode is gauged out). Solved by diagonalizing the 5-point
    Neumann Laplacian in the type-II cosine basis.
    """
    arr = _as_float_raster(rhs)
    h, w = arr.shape[:2]
    if h * w == 1:
        return np.zeros_like(arr)
    compat = arr - arr.mean(axis=(0, 1), keepdims=True)
    spec = dctn(compat, type=2, norm="ortho", axes=(0, 1), workers=_fft_workers())
    lam_y = 2.0 * np.cos(np.pi * np.arange(h) / h) - 2.0
    lam_x = 2.0 * np.cos(np.pi * np.arange(w) / w) - 2.0
    lam = lam_y[:, None] + lam_x[None, :]
    lam[0, 0] = 1.0  # placeholder; the DC mode is zeroed below
    if arr.ndim == 3:
        lam = lam[:, :, None]
    spec = spec / lam
    spec[0, 0] = 0.0
    return idctn(spec, type=2, norm="ortho", axes=(0, 1), workers=_fft_workers())
