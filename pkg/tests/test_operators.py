import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import array_shapes, arrays
from scipy.ndimage import gaussian_filter

from modspike import (GradientField, divergence, gradient, laplacian, lar,
                      poisson_solve)

int_rasters = arrays(
    np.int64,
    array_shapes(min_dims=2, max_dims=2, min_side=1, max_side=24),
    elements=st.integers(0, 2 ** 14),
)


def neumann_stencil(x):
    """Reference 5-point Laplacian with reflecting boundaries, by loops."""
    h, w = x.shape
    out = np.zeros((h, w), dtype=np.float64)
    for i in range(h):
        for j in range(w):
            for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                ni, nj = i + di, j + dj
                if 0 <= ni < h and 0 <= nj < w:
                    out[i, j] += x[ni, nj] - x[i, j]
    return out


# ---------------------------------------------------------------- gradient

def test_gradient_constant_is_zero():
    gf = gradient(np.full((5, 7), 3.25))
    assert np.all(gf.gx == 0) and np.all(gf.gy == 0)


def test_gradient_row_example():
    gf = gradient(np.array([[0.0, 5.0, 7.0]]))
    assert np.array_equal(gf.gx, [[5.0, 2.0, 0.0]])
    assert np.array_equal(gf.gy, [[0.0, 0.0, 0.0]])


def test_gradient_ramp():
    img = np.tile(np.arange(4.0), (4, 1))  # img[i, j] = j
    gf = gradient(img)
    assert np.array_equal(gf.gx[:, :-1], np.ones((4, 3)))
    assert np.all(gf.gx[:, -1] == 0)
    assert np.all(gf.gy == 0)


def test_gradient_zero_padding_invariant():
    rng = np.random.default_rng(0)
    gf = gradient(rng.normal(size=(6, 9, 3)))
    assert np.all(gf.gx[:, -1] == 0)
    assert np.all(gf.gy[-1, :] == 0)


# -------------------------------------------------------------- divergence

def test_divergence_of_zero_field():
    gf = gradient(np.zeros((4, 4)))
    assert np.all(divergence(gf) == 0)


def test_divergence_of_ramp_hand_computed():
    # img = [0, 1, 2, 3]: gx = [1, 1, 1, 0]; the backward difference gives
    # the Neumann boundary pattern [1, 0, 0, -1]
    div = divergence(gradient(np.arange(4.0)[None, :]))
    assert np.array_equal(div, [[1.0, 0.0, 0.0, -1.0]])


def test_divergence_gradient_matches_stencil_oracle():
    rng = np.random.default_rng(7)
    x = rng.normal(size=(8, 8))
    assert np.allclose(divergence(gradient(x)), neumann_stencil(x), atol=1e-12)


def test_adjointness_of_gradient_and_divergence():
    # <grad x, g> == <x, -div g> makes div(grad(.)) symmetric
    rng = np.random.default_rng(8)
    x = rng.normal(size=(6, 5))
    gx = rng.normal(size=(6, 5))
    gy = rng.normal(size=(6, 5))
    gx[:, -1] = 0
    gy[-1, :] = 0
    gf = gradient(x)
    lhs = np.sum(gf.gx * gx) + np.sum(gf.gy * gy)
    rhs = -np.sum(x * divergence(GradientField(gx=gx, gy=gy)))
    assert np.isclose(lhs, rhs, atol=1e-10)


# --------------------------------------------------------------- laplacian

def test_laplacian_constant_is_zero():
    assert np.all(laplacian(np.full((6, 6), 2.0)).lap == 0)


def test_laplacian_quadratic_second_difference():
    img = (np.arange(5.0) ** 2)[None, :]  # j^2 on a 1x5 strip
    lap = laplacian(img).lap
    assert np.array_equal(lap[0, 1:4], [2.0, 2.0, 2.0])


def test_laplacian_sums_to_zero():
    rng = np.random.default_rng(11)
    lap = laplacian(rng.normal(size=(16, 16)) * 100).lap
    assert abs(lap.sum()) < 1e-9


def test_laplacian_equals_divergence_of_gradient():
    rng = np.random.default_rng(12)
    x = rng.normal(size=(9, 13))
    assert np.array_equal(laplacian(x).lap, divergence(gradient(x)))


# --------------------------------------------------------------------- lar

def test_lar_scalar_examples():
    assert lar(300.0, 256) == 44.0
    assert lar(200.0, 256) == -56.0
    assert lar(-128.0, 256) == -128.0
    assert lar(128.0, 256) == -128.0  # half-open interval [-m/2, m/2)


def test_lar_rejects_nonpositive_modulus():
    with pytest.raises(ValueError):
        lar(1.0, 0)


@given(arrays(np.float64,
              array_shapes(min_dims=1, max_dims=2, min_side=1, max_side=16),
              elements=st.floats(-1e6, 1e6)),
       st.sampled_from([2, 16, 256, 4096]))
def test_lar_range(values, modulus):
    out = lar(values, modulus)
    assert np.all(out >= -modulus / 2)
    assert np.all(out < modulus / 2)


def test_lar_fixes_gradient_exactly_within_half_period():
    # differences inside [-m/2, m/2) are their own centered remainder;
    # a difference at +m/2 or beyond gets remapped
    img = np.array([[0.0, 100.0, 227.0]])
    gf = gradient(img)
    assert np.array_equal(lar(gf.gx, 256), gf.gx)
    edge = gradient(np.array([[0.0, 128.0]]))
    assert lar(edge.gx, 256)[0, 0] == -128.0
    big = gradient(np.array([[0.0, 200.0]]))
    assert lar(big.gx, 256)[0, 0] == -56.0


@settings(max_examples=60, deadline=None)
@given(int_rasters)
def test_wrapped_gradient_residue_identity(img):
    modulus = 256
    wrapped = np.mod(img, modulus)
    gi, gw = gradient(img), gradient(wrapped)
    assert np.array_equal(lar(gw.gx, modulus), lar(gi.gx, modulus))
    assert np.array_equal(lar(gw.gy, modulus), lar(gi.gy, modulus))


@settings(max_examples=60, deadline=None)
@given(int_rasters)
def test_wrapped_laplacian_residue_identity(img):
    modulus = 256
    wrapped = np.mod(img, modulus)
    assert np.array_equal(lar(laplacian(wrapped).lap, modulus),
                          lar(laplacian(img).lap, modulus))


@settings(max_examples=25, deadline=None)
@given(int_rasters)
def test_poisson_of_wrapped_laplacian_bit_identical(img):
    modulus = 256
    wrapped = np.mod(img, modulus)
    a = poisson_solve(lar(laplacian(wrapped).lap, modulus))
    b = poisson_solve(lar(laplacian(img).lap, modulus))
    assert np.array_equal(a, b)


# ----------------------------------------------------------- poisson solve

def test_poisson_zero_rhs():
    assert np.all(poisson_solve(np.zeros((8, 8))) == 0)


def test_poisson_degenerate_single_pixel():
    assert np.array_equal(poisson_solve(np.array([[5.0]])), [[0.0]])


def test_poisson_recovers_smooth_field():
    rng = np.random.default_rng(5)
    x = gaussian_filter(rng.normal(size=(32, 32)), 3.0) * 50
    sol = poisson_solve(laplacian(x).lap)
    err = np.max(np.abs(sol - (x - x.mean())))
    assert err <= 1e-6 * (x.max() - x.min())


def test_poisson_recovers_discrete_eigenfunction():
    h, w = 24, 17
    mode = np.cos(np.pi * 3 * (np.arange(h) + 0.5) / h)[:, None] * np.ones((1, w))
    lam = 2.0 * np.cos(np.pi * 3 / h) - 2.0
    assert np.allclose(laplacian(mode).lap, lam * mode, atol=1e-12)
    sol = poisson_solve(laplacian(mode).lap)
    assert np.allclose(sol, mode - mode.mean(), atol=1e-10)


def test_poisson_recovers_axis_cosine_mode():
    h, w = 20, 20
    img = np.cos(np.pi * np.arange(h) / h)[:, None] * np.ones((1, w))
    sol = poisson_solve(laplacian(img).lap)
    assert np.allclose(sol, img - img.mean(), atol=1e-10)


def test_poisson_output_mean_zero():
    rng = np.random.default_rng(6)
    sol = poisson_solve(rng.normal(size=(15, 11)) * 1e3)
    assert abs(sol.mean()) < 1e-9


def test_poisson_channels_independent():
    rng = np.random.default_rng(9)
    rhs = rng.normal(size=(12, 10, 3))
    joint = poisson_solve(rhs)
    for c in range(3):
        assert np.allclose(joint[:, :, c], poisson_solve(rhs[:, :, c]), atol=1e-12)
