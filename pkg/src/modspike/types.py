"""Shared value types for the modulo-spike imaging pipeline.

Everything here is an immutable value: wrapped numpy buffers are marked
read-only at construction, configs are frozen dataclasses that validate
eagerly. Instances are safe to share across threads.

Conventions:
  * rasters are row-major, channel-interleaved arrays of shape (H, W, C)
  * radiance is stored as float32; integer-quantized scenes (digital
    counts) may be stored as uint16
  * spike frames are bit-packed LSB-first, one plane per channel, each
    plane padded to a byte boundary
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class ValidationError(ValueError):
    """An invariant of a value type does not hold; names the failing field."""


def _freeze(arr: np.ndarray) -> np.ndarray:
    out = np.ascontiguousarray(arr)
    if out is arr:
        out = arr.copy()
    out.setflags(write=False)
    return out


def _as_raster(data: np.ndarray, name: str) -> np.ndarray:
    data = np.asarray(data)
    if data.ndim == 2:
        data = data[:, :, None]
    if data.ndim != 3:
        raise ValidationError(f"{name}: expected a (H, W) or (H, W, C) array, got shape {data.shape}")
    if data.shape[2] not in (1, 3):
        raise ValidationError(f"{name}: channels must be 1 or 3, got {data.shape[2]}")
    return data


@dataclass(frozen=True)
class HdrImage:
    """Linear-radiance raster: the unknown high-dynamic-range signal.

    `data` holds nonnegative, finite samples in arbitrary radiance units
    (or integer digital counts when dtype is uint16).
    """

    data: np.ndarray  # (H, W, C), float32 or uint16, read-only

    def __post_init__(self):
        data = _as_raster(self.data, "HdrImage.data")
        if data.dtype == np.uint16:
            pass
        elif data.dtype != np.float32:
            data = data.astype(np.float32)
        if data.dtype == np.float32:
            if not np.all(np.isfinite(data)):
                raise ValidationError("HdrImage.data: samples must be finite")
            if np.any(data < 0):
                raise ValidationError("HdrImage.data: samples must be nonnegative")
        object.__setattr__(self, "data", _freeze(data))

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]

    def values(self) -> np.ndarray:
        """Samples as float64, for arithmetic."""
        return self.data.astype(np.float64)


@dataclass(frozen=True)
class ModuloFrame:
    """N-bit wrapped observation: every sample lives in [0, 2^N).

    Samples are held as uint16 regardless of N; on-disk width follows N.
    """

    data: np.ndarray  # (H, W, C) uint16, read-only
    bit_depth: int

    def __post_init__(self):
        if not 1 <= self.bit_depth <= 16:
            raise ValidationError(f"ModuloFrame.bit_depth: must be in 1..16, got {self.bit_depth}")
        data = _as_raster(self.data, "ModuloFrame.data")
        if not np.issubdtype(data.dtype, np.integer):
            raise ValidationError("ModuloFrame.data: samples must be integers")
        if np.any(data < 0) or np.any(data >= (1 << self.bit_depth)):
            raise ValidationError(
                f"ModuloFrame.data: samples must lie in [0, 2^{self.bit_depth})"
            )
        object.__setattr__(self, "data", _freeze(data.astype(np.uint16)))

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]

    @property
    def modulus(self) -> int:
        return 1 << self.bit_depth

    def values(self) -> np.ndarray:
        return self.data.astype(np.float64)


def plane_bytes(height: int, width: int) -> int:
    """Bytes occupied by one bit-packed channel plane."""
    return (height * width + 7) // 8


@dataclass(frozen=True)
class SpikeStream:
    """Sequence of synchronous binary spike frames at a fixed readout rate.

    `packed` has shape (frame_count, channels, plane_bytes): each channel
    plane is the frame's H*W bits packed row-major, LSB-first.
    """

    height: int
    width: int
    channels: int
    frame_count: int
    readout_rate_hz: int
    packed: np.ndarray  # (R, C, plane_bytes) uint8, read-only

    def __post_init__(self):
        if self.frame_count < 1:
            raise ValidationError(f"SpikeStream.frame_count: must be >= 1, got {self.frame_count}")
        if self.readout_rate_hz <= 0:
            raise ValidationError(
                f"SpikeStream.readout_rate_hz: must be positive, got {self.readout_rate_hz}"
            )
        if self.channels not in (1, 3):
            raise ValidationError(f"SpikeStream.channels: must be 1 or 3, got {self.channels}")
        packed = np.asarray(self.packed, dtype=np.uint8)
        want = (self.frame_count, self.channels, plane_bytes(self.height, self.width))
        if packed.shape != want:
            raise ValidationError(
                f"SpikeStream.packed: expected shape {want}, got {packed.shape}"
            )
        object.__setattr__(self, "packed", _freeze(packed))

    @classmethod
    def from_bits(cls, bits: np.ndarray, readout_rate_hz: int) -> "SpikeStream":
        """Pack a (frame_count, H, W, C) array of {0,1} samples."""
        bits = np.asarray(bits)
        if bits.ndim != 4:
            raise ValidationError(f"SpikeStream bits: expected (R, H, W, C), got shape {bits.shape}")
        if bits.size and (bits.min() < 0 or bits.max() > 1):
            raise ValidationError("SpikeStream bits: samples must be 0 or 1")
        r, h, w, c = bits.shape
        flat = np.transpose(bits.astype(np.uint8), (0, 3, 1, 2)).reshape(r, c, h * w)
        packed = np.packbits(flat, axis=-1, bitorder="little")
        return cls(height=h, width=w, channels=c, frame_count=r,
                   readout_rate_hz=readout_rate_hz, packed=packed)

    def bits(self, start: int = 0, stop: int | None = None) -> np.ndarray:
        """Unpack frames [start, stop) to a (n, H, W, C) uint8 array of {0,1}."""
        stop = self.frame_count if stop is None else stop
        packed = self.packed[start:stop]
        flat = np.unpackbits(packed, axis=-1, count=self.height * self.width,
                             bitorder="little")
        planes = flat.reshape(packed.shape[0], self.channels, self.height, self.width)
        return np.transpose(planes, (0, 2, 3, 1))


@dataclass(frozen=True)
class SensorConfig:
    """Integrate-and-fire sensor parameters.

    A pixel accumulates `conversion_gain` times the incident integral and
    fires whenever the accumulator reaches `threshold`; firings are latched
    into binary frames at `readout_rate_hz`. The capture of `total_time_s`
    is resolved on `micro_intervals` sub-steps, which must refine the
    readout grid exactly.
    """

    threshold: float = 1.0          # firing quantum (radiance*time units after gain)
    conversion_gain: float = 1.0    # photoelectric gain applied to the integral
    readout_rate_hz: float = 20_000.0
    total_time_s: float = 0.05
    micro_intervals: int = 1000
    shot_noise: bool = False
    rng_seed: int = 0
    reset_to_zero: bool = False     # default is reset-by-subtraction

    def __post_init__(self):
        validate(self)

    @property
    def readout_frames(self) -> int:
        """Number of readout intervals R = readout_rate * total_time."""
        return int(round(self.readout_rate_hz * self.total_time_s))


@dataclass(frozen=True)
class EncoderConfig:
    """Sliding-window modulo encoder parameters (window, stride, gain, bits)."""

    window: int = 25
    stride: int = 20
    gain: float = 15.0
    bit_depth: int = 8

    def __post_init__(self):
        validate(self)

    @property
    def modulus(self) -> int:
        return 1 << self.bit_depth


@dataclass(frozen=True)
class QuerySpec:
    """Ideal-domain query: window length and stride in micro-intervals.

    `digital_gain` converts the windowed irradiance integral to digital
    counts before flooring and wrapping.
    """

    window: int
    stride: int
    digital_gain: float = 1.0

    def __post_init__(self):
        validate(self)


def _positive(value, name: str):
    if not value > 0:
        raise ValidationError(f"{name}: must be positive, got {value}")


def validate(config) -> None:
    """Check every invariant of a config value; raise ValidationError naming
    the failing field."""
    if isinstance(config, SensorConfig):
        if not config.threshold > 0:
            raise ValidationError(f"SensorConfig.threshold: must be positive, got {config.threshold}")
        _positive(config.conversion_gain, "SensorConfig.conversion_gain")
        _positive(config.readout_rate_hz, "SensorConfig.readout_rate_hz")
        _positive(config.total_time_s, "SensorConfig.total_time_s")
        if config.micro_intervals < 1:
            raise ValidationError(
                f"SensorConfig.micro_intervals: must be >= 1, got {config.micro_intervals}")
        r_exact = config.readout_rate_hz * config.total_time_s
        r = round(r_exact)
        if r < 1 or not math.isclose(r_exact, r, rel_tol=0, abs_tol=1e-6):
            raise ValidationError(
                "SensorConfig.readout_rate_hz*total_time_s: readout frame count "
                f"must be a positive integer, got {r_exact}")
        if config.micro_intervals < r:
            raise ValidationError(
                f"SensorConfig.micro_intervals: must be >= readout frame count {r}, "
                f"got {config.micro_intervals}")
        if config.micro_intervals % r != 0:
            raise ValidationError(
                f"SensorConfig.micro_intervals: must be divisible by readout frame "
                f"count {r}, got {config.micro_intervals}")
    elif isinstance(config, EncoderConfig):
        if config.stride < 1:
            raise ValidationError(f"EncoderConfig.stride: must be >= 1, got {config.stride}")
        if config.stride > config.window:
            raise ValidationError(
                f"EncoderConfig.stride: stride exceeds window ({config.stride} > {config.window})")
        _positive(config.gain, "EncoderConfig.gain")
        if not 1 <= config.bit_depth <= 16:
            raise ValidationError(
                f"EncoderConfig.bit_depth: must be in 1..16, got {config.bit_depth}")
    elif isinstance(config, QuerySpec):
        if config.stride < 1:
            raise ValidationError(f"QuerySpec.stride: must be >= 1, got {config.stride}")
        if config.stride > config.window:
            raise ValidationError(
                f"QuerySpec.stride: stride exceeds window ({config.stride} > {config.window})")
        _positive(config.digital_gain, "QuerySpec.digital_gain")
    else:
        raise TypeError(f"validate: unsupported type {type(config).__name__}")
