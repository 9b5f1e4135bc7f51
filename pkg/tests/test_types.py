import numpy as np
import pytest

from modspike import (EncoderConfig, HdrImage, ModuloFrame, QuerySpec,
                      SensorConfig, SpikeStream, ValidationError, validate)


def test_hdr_image_basic():
    img = HdrImage(data=np.ones((4, 5), dtype=np.float32))
    assert (img.height, img.width, img.channels) == (4, 5, 1)
    assert img.data.shape == (4, 5, 1)
    assert not img.data.flags.writeable


def test_hdr_image_uint16_view_preserved():
    data = np.arange(12, dtype=np.uint16).reshape(3, 4)
    img = HdrImage(data=data)
    assert img.data.dtype == np.uint16
    assert np.array_equal(img.data[:, :, 0], data)


def test_hdr_image_rejects_negative_and_nonfinite():
    with pytest.raises(ValidationError, match="nonneg"):
        HdrImage(data=np.array([[-1.0]], dtype=np.float32))
    with pytest.raises(ValidationError, match="finite"):
        HdrImage(data=np.array([[np.nan]], dtype=np.float32))


def test_hdr_image_rejects_bad_channels():
    with pytest.raises(ValidationError, match="channels"):
        HdrImage(data=np.zeros((2, 2, 2), dtype=np.float32))


def test_modulo_frame_range_enforced():
    ModuloFrame(data=np.array([[255]], dtype=np.int64), bit_depth=8)
    with pytest.raises(ValidationError, match="2\\^8"):
        ModuloFrame(data=np.array([[256]], dtype=np.int64), bit_depth=8)
    with pytest.raises(ValidationError):
        ModuloFrame(data=np.array([[-1]], dtype=np.int64), bit_depth=8)


def test_modulo_frame_bit_depth_bounds():
    with pytest.raises(ValidationError, match="bit_depth"):
        ModuloFrame(data=np.zeros((1, 1), dtype=np.int64), bit_depth=17)


def test_spike_stream_round_trip_bits():
    rng = np.random.default_rng(3)
    bits = rng.integers(0, 2, size=(5, 6, 7, 3), dtype=np.uint8)
    stream = SpikeStream.from_bits(bits, readout_rate_hz=20000)
    assert stream.frame_count == 5
    assert np.array_equal(stream.bits(), bits)
    assert not stream.packed.flags.writeable


def test_spike_stream_bits_range_slicing():
    rng = np.random.default_rng(5)
    bits = rng.integers(0, 2, size=(12, 5, 5, 1), dtype=np.uint8)
    stream = SpikeStream.from_bits(bits, readout_rate_hz=100)
    assert np.array_equal(stream.bits(3, 9), bits[3:9])
    assert np.array_equal(stream.bits(10), bits[10:])


def test_frozen_buffers_reject_writes():
    img = HdrImage(data=np.ones((2, 2), dtype=np.float32))
    with pytest.raises(ValueError):
        img.data[0, 0, 0] = 5.0
    frame = ModuloFrame(data=np.zeros((2, 2), dtype=np.int64), bit_depth=8)
    with pytest.raises(ValueError):
        frame.data[0, 0, 0] = 1


def test_validate_recheck_catches_tampering():
    cfg = EncoderConfig()
    object.__setattr__(cfg, "stride", 99)
    with pytest.raises(ValidationError, match="stride exceeds window"):
        validate(cfg)


def test_spike_stream_rejects_nonbinary():
    with pytest.raises(ValidationError, match="0 or 1"):
        SpikeStream.from_bits(np.full((1, 2, 2, 1), 2, dtype=np.uint8),
                              readout_rate_hz=100)


def test_encoder_config_default_regime_is_valid():
    cfg = EncoderConfig(window=25, stride=20, gain=15.0, bit_depth=8)
    validate(cfg)
    assert cfg.modulus == 256


def test_encoder_config_stride_exceeds_window():
    with pytest.raises(ValidationError, match="stride exceeds window"):
        EncoderConfig(window=10, stride=20)


def test_sensor_config_threshold_must_be_positive():
    with pytest.raises(ValidationError, match="threshold"):
        SensorConfig(threshold=0.0)


def test_sensor_config_micro_interval_divisibility():
    # R = 20000 * 0.05 = 1000 readout frames
    SensorConfig(readout_rate_hz=20000, total_time_s=0.05, micro_intervals=2000)
    with pytest.raises(ValidationError, match="divisible"):
        SensorConfig(readout_rate_hz=20000, total_time_s=0.05, micro_intervals=1500)
    with pytest.raises(ValidationError, match="micro_intervals"):
        SensorConfig(readout_rate_hz=20000, total_time_s=0.05, micro_intervals=500)


def test_query_spec_bounds():
    QuerySpec(window=25, stride=20)
    with pytest.raises(ValidationError, match="stride"):
        QuerySpec(window=10, stride=11)


def test_validate_rejects_unknown_type():
    with pytest.raises(TypeError):
        validate(object())
