"""Command-line pipeline driver.

Subcommands cover the full path from a radiance scene to quality numbers:

    simulate   scene (LHDR) -> spike stream (SPKB)
    encode     spike stream (SPKB) -> modulo sequence (MODQ)
    unwrap     modulo sequence (MODQ) -> per-frame LHDR + residual report
    eval       two LHDR images -> PSNR/SSIM/tone-mapped PSNR
    bandwidth  raw vs encoded bit rates for a sensor geometry
    pipeline   simulate -> encode -> unwrap -> eval, fully seeded

Diagnostics go to stderr; machine-readable key=value lines go to stdout.
Exit code 0 means success.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import containers
from .containers import FormatError
from .encoder import encode_stream, ideal_window_counts
from .metrics import bandwidth_report, psnr_linear, psnr_mu, ssim_linear
from .simulate import Motion, integrate_and_fire, mosaic_sample, synthesize_clip
from .types import (EncoderConfig, HdrImage, QuerySpec, SensorConfig,
                    ValidationError)
from .unwrap import unwrap_poisson

_SENSOR_KEYS = {
    "threshold": float,
    "conversion_gain": float,
    "readout_rate_hz": float,
    "total_time_s": float,
    "micro_intervals": int,
    "shot_noise": lambda s: s.lower() in ("1", "true", "yes", "on"),
    "rng_seed": int,
    "reset_to_zero": lambda s: s.lower() in ("1", "true", "yes", "on"),
}


def _parse_sensor_config(text: str | None, seed: int | None = None) -> SensorConfig:
    """Sensor config from `key=value` pairs, inline (comma/space separated)
    or one per line in a file."""
    fields = {}
    if text:
        if Path(text).is_file():
            pairs = []
            for line in Path(text).read_text().splitlines():
                line = line.split("#", 1)[0].strip()
                if line:
                    pairs.append(line)
        else:
            pairs = [p for chunk in text.split(",") for p in chunk.split() if p]
        for pair in pairs:
            if "=" not in pair:
                raise ValidationError(f"config: expected key=value, got {pair!r}")
            key, value = (s.strip() for s in pair.split("=", 1))
            if key not in _SENSOR_KEYS:
                raise ValidationError(f"config: unknown key {key!r}")
            fields[key] = _SENSOR_KEYS[key](value)
    if seed is not None:
        fields["rng_seed"] = seed
    return SensorConfig(**fields)


def _parse_motion(text: str) -> Motion:
    """Motion spec: `none`, `translate:DX,DY`, `rotate:DEG`, or both joined
    with `+` (e.g. `translate:2,0+rotate:5`)."""
    translate = (0.0, 0.0)
    rotate = 0.0
    if text.strip().lower() in ("", "none", "identity"):
        return Motion()
    for part in text.split("+"):
        kind, _, args = part.partition(":")
        kind = kind.strip().lower()
        if kind == "translate":
            dx, dy = (float(v) for v in args.split(","))
            translate = (dx, dy)
        elif kind == "rotate":
            rotate = float(args)
        else:
            raise ValidationError(f"motion: unknown component {part!r}")
    return Motion(translate_px=translate, rotate_deg=rotate)


def _synthetic_scene(height: int, width: int, channels: int, peak: float,
                     seed: int) -> HdrImage:
    """Smooth integer-valued test scene: a few seeded Gaussian blobs on a
    dim floor, quantized to digital counts."""
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:height, 0:width]
    field = np.zeros((height, width, channels))
    for c in range(channels):
        plane = np.full((height, width), 0.02)
        for _ in range(4):
            cy = rng.uniform(0.2, 0.8) * height
            cx = rng.uniform(0.2, 0.8) * width
            sigma = rng.uniform(0.12, 0.25) * min(height, width)
            amp = rng.uniform(0.3, 1.0)
            plane += amp * np.exp(-((yy - cy) ** 2 + (xx - cx) ** 2) / (2 * sigma ** 2))
        field[:, :, c] = plane / plane.max()
    return HdrImage(data=np.floor(field * peak).astype(np.float32))


def _cmd_simulate(args) -> int:
    scene = containers.read_hdr(args.scene)
    cfg = _parse_sensor_config(args.config, seed=args.seed)
    clip = synthesize_clip(scene, _parse_motion(args.motion), cfg)
    if args.mosaic:
        clip = mosaic_sample(clip)
    stream = integrate_and_fire(clip, cfg)
    containers.write_spikes(args.out, stream)
    print(f"frames={stream.frame_count}")
    print(f"readout_rate_hz={stream.readout_rate_hz}")
    return 0


def _cmd_encode(args) -> int:
    stream = containers.read_spikes(args.infile)
    cfg = EncoderConfig(window=args.window, stride=args.stride, gain=args.gain,
                        bit_depth=args.bits)
    seq = encode_stream(stream, cfg)
    containers.write_modulo(args.out, seq)
    print(f"frames={len(seq)}")
    print(f"effective_rate_hz={seq.effective_rate_hz}")
    return 0


def _cmd_unwrap(args) -> int:
    seq = containers.read_modulo(args.infile)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for i, frame in enumerate(seq.frames):
        result = unwrap_poisson(frame)
        containers.write_hdr(out_dir / f"frame_{i:04d}.lhdr", result.hdr)
        print(f"frame={i} l_mod={result.residuals.l_mod:.9g} "
              f"l_grad={result.residuals.l_grad:.9g} "
              f"l_lap={result.residuals.l_lap:.9g} "
              f"converged={int(result.converged)}")
    return 0


def _print_eval(ref: HdrImage, test: HdrImage, mu: float, peak: float, prefix: str = ""):
    print(f"{prefix}psnr_linear={psnr_linear(test, ref, peak):.6g}")
    print(f"{prefix}ssim_linear={ssim_linear(test, ref, peak):.6g}")
    print(f"{prefix}psnr_mu={psnr_mu(test, ref, mu=mu, peak=peak):.6g}")


def _cmd_eval(args) -> int:
    ref = containers.read_hdr(args.ref)
    test = containers.read_hdr(args.test)
    _print_eval(ref, test, args.mu, args.peak)
    return 0


def _cmd_bandwidth(args) -> int:
    report = bandwidth_report(args.height, args.width, args.channels,
                              args.readout_hz, args.bits, args.stride, args.mosaic)
    print(f"raw_bps={report.raw_bps}")
    print(f"modulo_bps={report.modulo_bps}")
    print(f"reduction_ratio={report.reduction_ratio}")
    print(f"raw_gbps={report.raw_gbps}")
    print(f"modulo_gbps={report.modulo_gbps}")
    return 0


def _cmd_pipeline(args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if args.scene:
        scene = containers.read_hdr(args.scene)
    else:
        scene = _synthetic_scene(args.height, args.width, 3 if args.mosaic else 1,
                                 args.peak, args.seed)
    if args.config is None:
        # calibrate the firing quantum so the brightest pixel spikes about
        # once per readout interval
        base = SensorConfig(rng_seed=args.seed)
        peak_radiance = float(scene.values().max())
        cfg = replace(base, threshold=max(
            peak_radiance * base.total_time_s / base.micro_intervals, 1e-12))
    else:
        cfg = _parse_sensor_config(args.config, seed=args.seed)
    containers.write_hdr(out_dir / "scene.lhdr", scene)

    clip = synthesize_clip(scene, _parse_motion(args.motion), cfg)
    if args.mosaic:
        clip = mosaic_sample(clip)
    stream = integrate_and_fire(clip, cfg)
    containers.write_spikes(out_dir / "spikes.spkb", stream)

    enc_cfg = EncoderConfig(window=args.window, stride=args.stride, gain=args.gain,
                            bit_depth=args.bits)
    seq = encode_stream(stream, enc_cfg)
    containers.write_modulo(out_dir / "modulo.modq", seq)
    print(f"frames={len(seq)}")
    print(f"effective_rate_hz={seq.effective_rate_hz}")

    # reference: ideal windowed digital counts, aligned with the encoder
    # windows (gain g corresponds to digital gain g*q/threshold)
    sub = clip.micro_intervals // cfg.readout_frames
    spec = QuerySpec(window=enc_cfg.window * sub, stride=enc_cfg.stride * sub,
                     digital_gain=enc_cfg.gain * cfg.conversion_gain / cfg.threshold)
    truth = ideal_window_counts(clip, spec)

    for i, frame in enumerate(seq.frames):
        result = unwrap_poisson(frame)
        containers.write_hdr(out_dir / f"recon_{i:04d}.lhdr", result.hdr)
        ref = HdrImage(data=truth[i].astype(np.float32))
        containers.write_hdr(out_dir / f"truth_{i:04d}.lhdr", ref)
        print(f"frame={i} converged={int(result.converged)}")
        _print_eval(ref, result.hdr, args.mu, args.peak_eval, prefix=f"frame_{i}_")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="modspike",
                                     description="spike-stream modulo imaging tools")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="scene -> spike stream")
    p.add_argument("--scene", required=True, help="input LHDR radiance scene")
    p.add_argument("--motion", default="none",
                   help="none | translate:DX,DY | rotate:DEG | combined with +")
    p.add_argument("--config", default=None,
                   help="sensor config: key=value list or a file of key=value lines")
    p.add_argument("--seed", type=int, default=None, help="override rng_seed")
    p.add_argument("--mosaic", action="store_true",
                   help="sample through the 2x2 macro-pixel layout")
    p.add_argument("--out", required=True, help="output SPKB path")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("encode", help="spike stream -> modulo sequence")
    p.add_argument("--in", dest="infile", required=True, help="input SPKB path")
    p.add_argument("--window", type=int, default=25)
    p.add_argument("--stride", type=int, default=20)
    p.add_argument("--gain", type=float, default=15.0)
    p.add_argument("--bits", type=int, default=8)
    p.add_argument("--out", required=True, help="output MODQ path")
    p.set_defaults(func=_cmd_encode)

    p = sub.add_parser("unwrap", help="modulo sequence -> HDR frames")
    p.add_argument("--in", dest="infile", required=True, help="input MODQ path")
    p.add_argument("--out-dir", required=True, help="directory for per-frame LHDR files")
    p.set_defaults(func=_cmd_unwrap)

    p = sub.add_parser("eval", help="compare two LHDR images")
    p.add_argument("--ref", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--mu", type=float, default=5000.0)
    p.add_argument("--peak", type=float, default=4095.0)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("bandwidth", help="raw vs encoded bit rates")
    p.add_argument("--height", type=int, required=True)
    p.add_argument("--width", type=int, required=True)
    p.add_argument("--channels", type=int, default=1)
    p.add_argument("--readout-hz", type=int, required=True)
    p.add_argument("--bits", type=int, default=8)
    p.add_argument("--stride", type=int, default=20)
    p.add_argument("--mosaic", action="store_true")
    p.set_defaults(func=_cmd_bandwidth)

    p = sub.add_parser("pipeline", help="simulate -> encode -> unwrap -> eval")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--scene", default=None, help="optional LHDR scene (else synthetic)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--height", type=int, default=64)
    p.add_argument("--width", type=int, default=64)
    p.add_argument("--peak", type=float, default=1000.0,
                   help="peak digital counts of the synthetic scene")
    p.add_argument("--motion", default="none")
    p.add_argument("--config", default=None)
    p.add_argument("--mosaic", action="store_true")
    p.add_argument("--window", type=int, default=25)
    p.add_argument("--stride", type=int, default=20)
    p.add_argument("--gain", type=float, default=15.0)
    p.add_argument("--bits", type=int, default=8)
    p.add_argument("--mu", type=float, default=5000.0)
    p.add_argument("--peak-eval", type=float, default=4095.0)
    p.set_defaults(func=_cmd_pipeline)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValidationError, FormatError, OSError) as exc:
        print(f"modspike: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
