"""Command-line entry point for reproducible simulation and evaluation runs.

One binary, one subcommand per experiment.  Every run reads an optional JSON
config overridden by flags, writes its artifacts plus a ``run.json``
manifest sufficient to repeat the command, and is deterministic given
(config, seed): reruns produce byte-identical files.

Exit codes: 0 success, 2 configuration error, 3 I/O error, 4 inconsistent
or unusable data.
"""

import argparse
import dataclasses
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import io
from .core import DepthMap, build_schedule, derive_synthetic, wrap_depth
from .evaluate import (calibrate_synthetic_wavelength,
                       depth_tracking_experiment, emulate_scanning, medae,
                       rmse, scanning_equivalent_factor,
                       simulate_envelope_sweep, tradeoff_sweep)
from .exceptions import FitDiverged, InconsistentStack
from .filters import DEFAULT_PIXEL_PITCH, FilterKind, FilterSpec
from .forward import AcquisitionSettings, Mode, acquire_stack
from .retrieve import reconstruct
from .scenes import build_scene, flat_scene, scatter_scene, stripe_scene

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_DATA = 4


@dataclass(frozen=True)
class RunConfig:
    """All knobs of one command-line run, JSON-serializable.

    ``sbr = None`` means no ambient light (infinite signal-to-background).
    """

    scene: str = None
    stack: str = None
    guide: str = None
    gt: str = None
    out: str = "run_out"
    lambda1: float = 780.0
    lambda2: float = 781.0
    m_steps: int = 4
    n_steps: int = 4
    l0: float = 0.0
    seed: int = 0
    mode: str = "swept"
    indirect_rejection: float = 0.0
    sbr: float = None
    noise_sigma: float = 0.0
    speckle_realizations: int = 1
    exact_carrier: bool = False
    filter: str = "none"
    sigma_s: float = 10.5
    sigma_i: float = 0.1
    pixel_pitch: float = DEFAULT_PIXEL_PITCH
    offsets: tuple = (0.0, 5.0, 10.0, 15.0)
    kernel_widths: tuple = (7.0, 15.0, 21.0, 30.0)
    seeds: int = 3
    coverages: tuple = (0.25, 0.5, 1.0)
    mn_grid: tuple = ((3, 3), (4, 4), (5, 5))
    span: float = 400.0
    samples: int = 64
    depth_frac: float = 0.3
    scan_rate: float = 30000.0
    images_per_depth: int = 16
    total_time: float = 1.0
    width: int = 1600

    @classmethod
    def from_sources(cls, config_path, overrides: dict) -> "RunConfig":
        """Defaults, then JSON config file, then non-None flag overrides."""
        merged = dataclasses.asdict(cls())
        if config_path is not None:
            payload = io.read_json(config_path)
            unknown = sorted(set(payload) - set(merged))
            if unknown:
                raise ValueError(f"unknown config keys: {', '.join(unknown)}")
            merged.update(payload)
        merged.update({k: v for k, v in overrides.items() if v is not None})
        if merged["sbr"] is not None and np.isinf(merged["sbr"]):
            merged["sbr"] = None
        for key in ("offsets", "kernel_widths", "coverages"):
            merged[key] = tuple(float(v) for v in merged[key])
        merged["mn_grid"] = tuple(
            (int(m), int(n)) for m, n in merged["mn_grid"])
        run = cls(**merged)
        run._validate()
        return run

    def _validate(self):
        if self.mode not in [m.value for m in Mode]:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.filter not in [k.value for k in FilterKind]:
            raise ValueError(f"unknown filter {self.filter!r}")
        for name in ("scene", "stack", "guide", "gt"):
            path = getattr(self, name)
            if path is not None and not Path(path).exists():
                raise FileNotFoundError(f"{name} file not found: {path}")

    def payload(self) -> dict:
        data = dataclasses.asdict(self)
        data["offsets"] = list(self.offsets)
        data["kernel_widths"] = list(self.kernel_widths)
        data["coverages"] = list(self.coverages)
        data["mn_grid"] = [list(mn) for mn in self.mn_grid]
        return data

    @property
    def optical(self):
        return derive_synthetic(self.lambda1, self.lambda2)

    @property
    def settings(self) -> AcquisitionSettings:
        return AcquisitionSettings(
            mode=Mode(self.mode),
            indirect_rejection=self.indirect_rejection,
            sbr=np.inf if self.sbr is None else self.sbr,
            noise_sigma=self.noise_sigma,
            seed=self.seed,
            speckle_realizations=self.speckle_realizations,
            exact_carrier=self.exact_carrier,
        )

    @property
    def filter_spec(self) -> FilterSpec:
        kind = FilterKind(self.filter)
        if kind is FilterKind.NONE:
            return None
        if kind is FilterKind.JOINT_BILATERAL and self.guide is None:
            raise ValueError("--filter bilateral requires --guide")
        return FilterSpec(kind=kind, spatial_sigma=self.sigma_s,
                          intensity_sigma=self.sigma_i,
                          pixel_pitch=self.pixel_pitch)


def _out_dir(run: RunConfig) -> Path:
    out = Path(run.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_run_manifest(out: Path, command: str, run: RunConfig,
                        extras: dict = None) -> None:
    payload = {"command": command, "config": run.payload()}
    if extras:
        payload.update(extras)
    io.write_json(out / "run.json", payload)


def _load_scene(run: RunConfig, config, default_factory):
    if run.scene is not None:
        return build_scene(io.read_json(run.scene), config)
    return default_factory()


def _seed_list(run: RunConfig):
    return list(range(run.seeds))


def cmd_simulate(run: RunConfig) -> int:
    config = run.optical
    descriptor = io.read_json(run.scene) if run.scene is not None else None
    if descriptor is None:
        raise ValueError("simulate requires --scene (a scene descriptor JSON)")
    scene = build_scene(descriptor, config)
    schedule = build_schedule(config, run.m_steps, run.n_steps, l0=run.l0)
    stack = acquire_stack(scene, schedule, run.settings, config)
    out = _out_dir(run)
    io.save_stack(out, stack, run.settings)
    io.write_depth_pfm(out / "scene_depth.pfm", scene.depth)
    wrapped = DepthMap(depth=run.l0 + wrap_depth(scene.depth.depth - run.l0,
                                                 config),
                       mask=scene.depth.mask)
    io.write_depth_pfm(out / "scene_depth_wrapped.pfm", wrapped)
    io.write_pfm(out / "guide.pfm", scene.guide)
    _write_run_manifest(out, "simulate", run)
    print(f"lambda_s: {config.lambda_s:.4f} um")
    print(f"unambiguous range: {config.unambiguous_range:.4f} um")
    print(f"frames: {run.m_steps * run.n_steps}")
    print(f"stack written to {out}")
    return EXIT_OK


def cmd_reconstruct(run: RunConfig) -> int:
    spec = run.filter_spec
    if run.stack is None:
        raise ValueError("reconstruct requires a stack directory")
    stack, manifest = io.load_stack(run.stack)
    guide = io.read_image(run.guide) if run.guide is not None else None
    depth = reconstruct(stack, filter_spec=spec, guide=guide)
    out = _out_dir(run)
    io.write_depth_pfm(out / "depth.pfm", depth)
    io.write_mask_png(out / "mask.png", depth.mask)
    l0 = manifest["l0_um"]
    color_lo, color_hi = io.write_colormap_png(
        out / "depth_color.png", np.where(depth.mask, depth.depth, l0),
        lo=l0, hi=l0 + manifest["unambiguous_range_um"])
    _write_run_manifest(out, "reconstruct", run,
                        extras={"color_range_um": [color_lo, color_hi]})
    print(f"lambda_s: {manifest['lambda_s_um']:.4f} um")
    print(f"frames: {manifest['m_steps'] * manifest['n_steps']}")
    print(f"depth written to {out / 'depth.pfm'}")
    if run.gt is not None:
        truth = io.read_depth_pfm(run.gt)
        print(f"RMSE: {rmse(depth, truth):.6f} um")
        print(f"MedAE: {medae(depth, truth):.6f} um")
    return EXIT_OK


def cmd_calibrate(run: RunConfig) -> int:
    config = run.optical
    scene = _load_scene(run, config,
                        lambda: flat_scene((16, 16), config,
                                           depth_frac=run.depth_frac))
    positions = np.linspace(run.l0, run.l0 + run.span, run.samples)
    sweep = simulate_envelope_sweep(scene, config, positions,
                                    m_steps=run.m_steps,
                                    settings=run.settings)
    result = calibrate_synthetic_wavelength(sweep, config.lambda_s)
    relative = abs(result.lambda_s - config.lambda_s) / config.lambda_s
    out = _out_dir(run)
    io.write_csv(out / "sweep.csv", ["position_um", "envelope"],
                 [[float(l), float(e)] for l, e in sweep])
    _write_run_manifest(out, "calibrate", run, extras={"calibration": {
        "lambda_s_um": result.lambda_s,
        "nominal_lambda_s_um": config.lambda_s,
        "relative_error": relative,
        "offset": result.offset,
        "amplitude": result.amplitude,
        "phase": result.phase,
        "residual_rms": result.residual_rms,
    }})
    print(f"fitted lambda_s: {result.lambda_s:.4f} um")
    print(f"nominal lambda_s: {config.lambda_s:.4f} um")
    print(f"relative error: {relative:.3e}")
    return EXIT_OK


def cmd_track(run: RunConfig) -> int:
    config = run.optical
    scene = _load_scene(run, config,
                        lambda: scatter_scene((64, 64), config, seed=run.seed))
    swept = dataclasses.replace(run.settings, mode=Mode.SWEPT_ANGLE)
    coherent = dataclasses.replace(run.settings,
                                   mode=Mode.FULL_FIELD_COHERENT)
    rows = depth_tracking_experiment(
        scene, config, offsets=run.offsets, kernel_widths=run.kernel_widths,
        swept=swept, coherent=coherent, m_steps=run.m_steps,
        n_steps=run.n_steps, seeds=_seed_list(run), l0=run.l0,
        pixel_pitch=run.pixel_pitch)
    out = _out_dir(run)
    io.write_csv(out / "accuracy.csv",
                 ["kernel_width_um", "rmse_swept_um", "medae_swept_um",
                  "rmse_coherent_um", "medae_coherent_um"],
                 [[row.kernel_width, row.rmse_swept, row.medae_swept,
                   row.rmse_coherent, row.medae_coherent] for row in rows])
    _write_run_manifest(out, "track", run)
    for row in rows:
        print(f"width {row.kernel_width:6.1f} um | swept "
              f"RMSE {row.rmse_swept:9.4f} MedAE {row.medae_swept:9.4f} | "
              f"coherent RMSE {row.rmse_coherent:9.4f} "
              f"MedAE {row.medae_coherent:9.4f}")
    return EXIT_OK


def cmd_sweep(run: RunConfig) -> int:
    config = run.optical
    scene = _load_scene(run, config,
                        lambda: scatter_scene((48, 48), config, seed=run.seed))
    rows = tradeoff_sweep(scene, config, run.mn_grid, run.coverages,
                          base=run.settings, seeds=_seed_list(run),
                          l0=run.l0, pixel_pitch=run.pixel_pitch)
    out = _out_dir(run)
    io.write_csv(out / "tradeoff.csv",
                 ["m_steps", "n_steps", "coverage", "indirect_rejection",
                  "speckle_realizations", "frames", "rmse_um"],
                 [[row.m_steps, row.n_steps, row.coverage,
                   row.indirect_rejection, row.speckle_realizations,
                   row.frames, row.rmse] for row in rows])
    _write_run_manifest(out, "sweep", run)
    for row in rows:
        print(f"{{{row.m_steps},{row.n_steps}}} coverage {row.coverage:4.2f} "
              f"({row.frames:3d} frames) RMSE {row.rmse:9.4f} um")
    return EXIT_OK


def cmd_scan_compare(run: RunConfig) -> int:
    config = run.optical
    factor = scanning_equivalent_factor(run.scan_rate, run.images_per_depth,
                                        run.total_time, run.width)
    print(f"equal-time downsampling factor: {factor} "
          f"(width {run.width} px)")
    scene = _load_scene(run, config,
                        lambda: stripe_scene((128, 128), config, period_px=4))
    schedule = build_schedule(config, run.m_steps, run.n_steps, l0=run.l0)
    stack = acquire_stack(scene, schedule, run.settings, config)
    full = reconstruct(stack, filter_spec=run.filter_spec,
                       guide=io.read_image(run.guide)
                       if run.guide is not None else None)
    truth = DepthMap(depth=run.l0 + wrap_depth(scene.depth.depth - run.l0,
                                               config),
                     mask=scene.depth.mask)
    scanned = emulate_scanning(full, factor, scene.guide)
    rmse_full = rmse(full, truth)
    rmse_scan = rmse(scanned, truth)
    out = _out_dir(run)
    io.write_depth_pfm(out / "depth_full.pfm", full)
    io.write_depth_pfm(out / "depth_scanning.pfm", scanned)
    io.write_csv(out / "comparison.csv",
                 ["factor", "rmse_full_um", "rmse_scanning_um"],
                 [[factor, rmse_full, rmse_scan]])
    _write_run_manifest(out, "scan-compare", run,
                        extras={"factor": factor})
    print(f"full-field RMSE: {rmse_full:.4f} um")
    print(f"scanning RMSE: {rmse_scan:.4f} um")
    return EXIT_OK


def _parse_mn(text: str):
    try:
        m_text, n_text = text.lower().split("x")
        return int(m_text), int(n_text)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected MxN (e.g. 4x4), got {text!r}")


def _float_list(text: str):
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected comma-separated numbers, got {text!r}")


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON config file; flags override")
    parser.add_argument("--seed", type=int, help="RNG seed")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--mn", type=_parse_mn, metavar="MxN",
                        help="carrier x synthetic shift counts, e.g. 4x4")
    parser.add_argument("--lambda1", type=float, help="first wavelength (nm)")
    parser.add_argument("--lambda2", type=float, help="second wavelength (nm)")
    parser.add_argument("--l0", type=float, help="base mirror position (um)")
    parser.add_argument("--mode", choices=[m.value for m in Mode],
                        help="illumination mode")
    parser.add_argument("--filter", choices=[k.value for k in FilterKind],
                        help="envelope filter")
    parser.add_argument("--sigma-s", type=float, dest="sigma_s",
                        help="spatial filter sigma (um)")
    parser.add_argument("--sigma-i", type=float, dest="sigma_i",
                        help="range filter sigma (guide units)")
    parser.add_argument("--guide", help="guide image (PNG or PFM)")
    parser.add_argument("--gt", help="ground-truth depth PFM")
    parser.add_argument("--scene", help="scene descriptor JSON")
    parser.add_argument("--sbr", type=float,
                        help="signal-to-background ratio (inf for none)")
    parser.add_argument("--noise-sigma", type=float, dest="noise_sigma",
                        help="additive sensor noise sigma")
    parser.add_argument("--indirect-rejection", type=float,
                        dest="indirect_rejection",
                        help="surviving indirect fraction in swept mode")
    parser.add_argument("--speckle-realizations", type=int,
                        dest="speckle_realizations",
                        help="speckle draws averaged in swept mode")
    parser.add_argument("--seeds", type=int,
                        help="number of RNG seeds for experiment medians")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="swisim",
        description="Swept-angle synthetic-wavelength interferometry "
                    "simulator and depth-reconstruction pipeline")
    commands = parser.add_subparsers(dest="command", required=True)

    simulate = commands.add_parser(
        "simulate", help="render an {M,N} frame stack for a scene")
    simulate.set_defaults(handler=cmd_simulate)

    rec = commands.add_parser(
        "reconstruct", help="recover depth from a frame stack directory")
    rec.add_argument("stack_dir", nargs="?",
                     help="stack directory (defaults to config key 'stack')")
    rec.set_defaults(handler=cmd_reconstruct)

    cal = commands.add_parser(
        "calibrate", help="fit the synthetic wavelength from an envelope sweep")
    cal.add_argument("--span", type=float, help="sweep span (um)")
    cal.add_argument("--samples", type=int, help="sweep sample count")
    cal.set_defaults(handler=cmd_calibrate)

    track = commands.add_parser(
        "track", help="depth-tracking accuracy vs kernel width experiment")
    track.add_argument("--offsets", type=_float_list,
                       help="comma-separated stage offsets (um)")
    track.add_argument("--kernel-widths", type=_float_list,
                       dest="kernel_widths",
                       help="comma-separated kernel widths (um)")
    track.set_defaults(handler=cmd_track)

    sweep = commands.add_parser(
        "sweep", help="acquisition-time vs quality trade-off sweep")
    sweep.add_argument("--coverages", type=_float_list,
                       help="comma-separated scan coverage fractions")
    sweep.set_defaults(handler=cmd_sweep)

    scan = commands.add_parser(
        "scan-compare", help="equal-time comparison against a point scanner")
    scan.add_argument("--scan-rate", type=float, dest="scan_rate",
                      help="scanner points per second")
    scan.add_argument("--images-per-depth", type=int, dest="images_per_depth",
                      help="exposures the scanner needs per point")
    scan.add_argument("--total-time", type=float, dest="total_time",
                      help="acquisition time budget (s)")
    scan.add_argument("--width", type=int,
                      help="image width the scan budget is spread over (px)")
    scan.set_defaults(handler=cmd_scan_compare)

    for sub in (simulate, rec, cal, track, sweep, scan):
        _add_common(sub)
    return parser


_OVERRIDE_KEYS = tuple(f.name for f in dataclasses.fields(RunConfig))


def _overrides_from_args(args: argparse.Namespace) -> dict:
    overrides = {key: getattr(args, key, None) for key in _OVERRIDE_KEYS}
    mn = getattr(args, "mn", None)
    if mn is not None:
        overrides["m_steps"], overrides["n_steps"] = mn
    stack_dir = getattr(args, "stack_dir", None)
    if stack_dir is not None:
        overrides["stack"] = stack_dir
    return overrides


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        run = RunConfig.from_sources(args.config,
                                     _overrides_from_args(args))
        return args.handler(run)
    except InconsistentStack as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except FitDiverged as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, TypeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
