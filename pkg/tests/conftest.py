import numpy as np
import pytest
from scipy.ndimage import gaussian_filter


def smooth_integer_scene(rng, height, width, peak=4095, max_step=120, sigma=None):
    """Random smooth nonnegative integer raster, minimum exactly 0, with
    first and second forward differences bounded by max_step.

    Scales a Gaussian-filtered noise field so that its steepest difference
    stays below max_step with headroom for rounding, then quantizes.
    """
    sigma = sigma if sigma is not None else max(2.0, min(height, width) / 8.0)
    field = gaussian_filter(rng.normal(size=(height, width)), sigma, mode="reflect")
    field -= field.min()
    if field.max() > 0:
        field /= field.max()
    gx = np.abs(np.diff(field, axis=1)).max() if width > 1 else 0.0
    gy = np.abs(np.diff(field, axis=0)).max() if height > 1 else 0.0
    pad = np.pad(field, 1, mode="edge")
    lap = (pad[:-2, 1:-1] + pad[2:, 1:-1] + pad[1:-1, :-2] + pad[1:-1, 2:]
           - 4.0 * field)
    lmax = np.abs(lap).max()
    steepest = max(gx, gy, lmax, 1e-12)
    scale = min(float(peak), (max_step - 2.0) / steepest)
    img = np.floor(field * scale + 0.5).astype(np.int64)
    img -= img.min()
    assert img.min() == 0
    if width > 1:
        assert np.abs(np.diff(img, axis=1)).max() <= max_step
    if height > 1:
        assert np.abs(np.diff(img, axis=0)).max() <= max_step
    return img


@pytest.fixture
def scene_maker():
    return smooth_integer_scene
