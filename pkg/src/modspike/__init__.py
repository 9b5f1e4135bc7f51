"""Exposure-decoupled modulo imaging from spike streams.

End-to-end toolkit: synthetic irradiance clips, integrate-and-fire spike
simulation with a non-Bayer chromatic mosaic, sliding-window per-pixel
modulo encoding, physics-exact unwrapping back to HDR, quality metrics,
bandwidth accounting, and bit-exact container formats with a CLI driver.
"""

from .containers import (FormatError, read_hdr, read_modulo, read_spikes,
                         write_hdr, write_modulo, write_spikes)
from .encoder import (ChunkedEncoder, ModuloSequence, encode_stream,
                      encode_streaming_chunked, frame_capacity,
                      ideal_window_counts, query_ideal, readout_window,
                      window_sums)
from .metrics import (BandwidthReport, bandwidth_report, psnr_linear, psnr_mu,
                      ssim_linear)
from .operators import (GradientField, LaplacianField, divergence, gradient,
                        laplacian, lar, poisson_solve)
from .simulate import (IrradianceClip, MosaicLayout, Motion, integrate_and_fire,
                       mosaic_sample, synthesize_clip)
from .types import (EncoderConfig, HdrImage, ModuloFrame, QuerySpec,
                    SensorConfig, SpikeStream, ValidationError, plane_bytes,
                    validate)
from .unwrap import (ConsistencyResiduals, UnwrapResult, consistency_residuals,
                     cyclic_encode, mu_law, mu_law_inverse, unwrap_poisson)

__version__ = "0.1.0"

__all__ = [
    "BandwidthReport",
    "ChunkedEncoder",
    "ConsistencyResiduals",
    "EncoderConfig",
    "FormatError",
    "GradientField",
    "HdrImage",
    "IrradianceClip",
    "LaplacianField",
    "ModuloFrame",
    "ModuloSequence",
    "MosaicLayout",
    "Motion",
    "QuerySpec",
    "SensorConfig",
    "SpikeStream",
    "UnwrapResult",
    "ValidationError",
    "bandwidth_report",
    "consistency_residuals",
    "cyclic_encode",
    "divergence",
    "encode_stream",
    "encode_streaming_chunked",
    "frame_capacity",
    "gradient",
    "ideal_window_counts",
    "integrate_and_fire",
    "laplacian",
    "lar",
    "mosaic_sample",
    "mu_law",
    "mu_law_inverse",
    "plane_bytes",
    "poisson_solve",
    "psnr_linear",
    "psnr_mu",
    "query_ideal",
    "read_hdr",
    "read_modulo",
    "read_spikes",
    "readout_window",
    "ssim_linear",
    "synthesize_clip",
    "unwrap_poisson",
    "validate",
    "window_sums",
    "write_hdr",
    "write_modulo",
    "write_spikes",
]
