"""File formats for frames, depth maps, renderings, and run manifests.

Depth data of record travels as 32-bit float PFM; PNG renderings exist for
inspection only.  JSON manifests are written with sorted keys and without
timestamps so a rerun with the same configuration and seed produces
byte-identical artifacts.
"""

import csv
import json
from pathlib import Path

import numpy as np
from PIL import Image

from .core import DepthMap, build_schedule, derive_synthetic
from .exceptions import InconsistentStack
from .forward import AcquisitionSettings, FrameStack, Mode

#: Negative PFM scale marks little-endian sample order.
PFM_SCALE = -1.0
STACK_MANIFEST = "stack.json"

#: Perceptually uniform dark-violet-to-yellow ramp, anchors at 11 stops.
_RAMP = np.array([
    (68, 1, 84), (72, 36, 117), (64, 67, 135), (52, 94, 141),
    (41, 120, 142), (32, 144, 140), (34, 167, 132), (68, 190, 112),
    (121, 209, 81), (189, 222, 38), (253, 231, 36),
], dtype=np.float64)


def write_pfm(path, image: np.ndarray) -> None:
    """Write a grayscale PFM: 32-bit float, little-endian, bottom-up rows."""
    image = np.asarray(image, dtype=np.float32)
    if image.ndim != 2:
        raise ValueError(f"PFM images must be 2-D, got shape {image.shape}")
    height, width = image.shape
    with open(path, "wb") as handle:
        handle.write(b"Pf\n")
        handle.write(f"{width} {height}\n".encode("ascii"))
        handle.write(f"{PFM_SCALE}\n".encode("ascii"))
        handle.write(image[::-1].astype("<f4").tobytes())


def read_pfm(path) -> np.ndarray:
    """Read a grayscale PFM written by :func:`write_pfm` (or compatible)."""
    with open(path, "rb") as handle:
        tokens = []
        while len(tokens) < 4:
            line = handle.readline()
            if not line:
                raise ValueError(f"{path}: truncated PFM header")
            stripped = line.split(b"#", 1)[0]
            tokens.extend(stripped.split())
        kind, width, height, scale = tokens[:4]
        if kind != b"Pf":
            raise ValueError(f"{path}: not a grayscale PFM (header {kind!r})")
        width, height = int(width), int(height)
        scale = float(scale)
        order = "<f4" if scale < 0 else ">f4"
        data = np.frombuffer(handle.read(width * height * 4), dtype=order)
    if data.size != width * height:
        raise ValueError(f"{path}: truncated PFM payload")
    image = data.reshape(height, width)[::-1].astype(np.float64)
    if abs(scale) not in (0.0, 1.0):
        image = image * abs(scale)
    return image


def write_depth_pfm(path, depth_map: DepthMap) -> None:
    """Store a DepthMap as PFM; invalid pixels become NaN."""
    data = np.where(depth_map.mask, depth_map.depth, np.nan)
    write_pfm(path, data)


def read_depth_pfm(path) -> DepthMap:
    """Load a DepthMap from PFM; non-finite pixels are masked invalid."""
    data = read_pfm(path)
    mask = np.isfinite(data)
    return DepthMap(depth=np.where(mask, data, 0.0), mask=mask)


def _normalized(image: np.ndarray, lo, hi):
    image = np.asarray(image, dtype=np.float64)
    finite = image[np.isfinite(image)]
    if lo is None:
        lo = float(finite.min()) if finite.size else 0.0
    if hi is None:
        hi = float(finite.max()) if finite.size else 1.0
    if hi > lo:
        unit = (image - lo) / (hi - lo)
    else:
        unit = np.zeros(image.shape)
    return np.clip(np.nan_to_num(unit, nan=0.0), 0.0, 1.0), float(lo), float(hi)


def write_gray_png(path, image: np.ndarray, bit_depth: int = 8,
                   lo: float = None, hi: float = None):
    """Render an image to 8- or 16-bit grayscale PNG.

    Values map linearly from [lo, hi] (data range when omitted) onto the
    full code range.  Returns the (lo, hi) actually used, for manifests.
    """
    unit, lo, hi = _normalized(image, lo, hi)
    if bit_depth == 8:
        frame = Image.fromarray(np.round(unit * 255).astype(np.uint8))
    elif bit_depth == 16:
        frame = Image.fromarray(np.round(unit * 65535).astype(np.uint16))
    else:
        raise ValueError(f"bit_depth must be 8 or 16, got {bit_depth}")
    frame.save(path, format="PNG")
    return lo, hi


def write_colormap_png(path, image: np.ndarray, lo: float = None,
                       hi: float = None):
    """Render an image through the fixed color ramp to 8-bit RGB PNG."""
    unit, lo, hi = _normalized(image, lo, hi)
    stops = np.linspace(0.0, 1.0, len(_RAMP))
    channels = [np.interp(unit, stops, _RAMP[:, c]) for c in range(3)]
    rgb = np.round(np.stack(channels, axis=-1)).astype(np.uint8)
    Image.fromarray(rgb, "RGB").save(path, format="PNG")
    return lo, hi


def write_mask_png(path, mask: np.ndarray) -> None:
    """Render a validity mask as a black/white 8-bit PNG."""
    frame = np.where(np.asarray(mask, dtype=bool), 255, 0).astype(np.uint8)
    Image.fromarray(frame, "L").save(path, format="PNG")


def read_image(path) -> np.ndarray:
    """Load a grayscale image as float64: PFM raw, PNG scaled to [0, 1]."""
    path = Path(path)
    if path.suffix.lower() == ".pfm":
        return read_pfm(path)
    with Image.open(path) as handle:
        if handle.mode in ("I;16", "I"):
            return np.asarray(handle, dtype=np.float64) / 65535.0
        return np.asarray(handle.convert("L"), dtype=np.float64) / 255.0


def write_json(path, payload: dict) -> None:
    """Serialize a manifest deterministically: sorted keys, no timestamps."""
    with open(path, "w", encoding="ascii") as handle:
        json.dump(payload, handle, sort_keys=True, indent=2,
                  allow_nan=False)
        handle.write("\n")


def read_json(path) -> dict:
    with open(path, "r", encoding="ascii") as handle:
        return json.load(handle)


def write_csv(path, header, rows) -> None:
    """Write an RFC-4180 CSV (CRLF line endings, header row first)."""
    with open(path, "w", newline="", encoding="ascii") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        writer.writerows(rows)


def frame_name(n: int, m: int) -> str:
    return f"frame_n{n}_m{m}.pfm"


def _settings_payload(settings: AcquisitionSettings) -> dict:
    return {
        "mode": settings.mode.value,
        "indirect_rejection": settings.indirect_rejection,
        # JSON carries no infinity; null means unset (no ambient light)
        "sbr": None if np.isinf(settings.sbr) else settings.sbr,
        "noise_sigma": settings.noise_sigma,
        "seed": settings.seed,
        "speckle_realizations": settings.speckle_realizations,
        "exact_carrier": settings.exact_carrier,
    }


def settings_from_payload(payload: dict) -> AcquisitionSettings:
    sbr = payload.get("sbr")
    return AcquisitionSettings(
        mode=Mode(payload["mode"]),
        indirect_rejection=payload["indirect_rejection"],
        sbr=np.inf if sbr is None else sbr,
        noise_sigma=payload["noise_sigma"],
        seed=payload["seed"],
        speckle_realizations=payload["speckle_realizations"],
        exact_carrier=payload["exact_carrier"],
    )


def save_stack(directory, stack: FrameStack,
               settings: AcquisitionSettings = None) -> Path:
    """Write one frame PFM per (n, m) plus a stack manifest.

    The manifest carries everything needed to rebuild the stack object:
    wavelengths, shift counts, base position, and the frame file list.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    names = []
    for n in range(stack.schedule.n_steps):
        for m in range(stack.schedule.m_steps):
            name = frame_name(n, m)
            write_pfm(directory / name, stack.frames[n, m])
            names.append(name)
    height, width = stack.image_shape
    payload = {
        "format": "swi-stack",
        "frames": names,
        "height": height,
        "width": width,
        "lambda1_nm": stack.config.lambda1,
        "lambda2_nm": stack.config.lambda2,
        "lambda_s_um": stack.config.lambda_s,
        "unambiguous_range_um": stack.config.unambiguous_range,
        "m_steps": stack.schedule.m_steps,
        "n_steps": stack.schedule.n_steps,
        "l0_um": stack.schedule.l0,
    }
    if settings is not None:
        payload["settings"] = _settings_payload(settings)
    manifest = directory / STACK_MANIFEST
    write_json(manifest, payload)
    return manifest


def load_stack(directory):
    """Rebuild a FrameStack from a stack directory.

    Returns (stack, manifest dict).  A missing manifest is an I/O error;
    frames that are missing, extra, or mis-shaped against the manifest
    raise InconsistentStack.
    """
    directory = Path(directory)
    manifest = read_json(directory / STACK_MANIFEST)
    n_steps, m_steps = manifest["n_steps"], manifest["m_steps"]
    names = manifest["frames"]
    if len(names) != n_steps * m_steps:
        raise InconsistentStack(
            f"manifest lists {len(names)} frames for an "
            f"{m_steps}x{n_steps} acquisition")
    shape = (manifest["height"], manifest["width"])
    frames = np.zeros((n_steps, m_steps) + shape)
    for index, name in enumerate(names):
        path = directory / name
        if not path.exists():
            raise InconsistentStack(f"frame file missing: {path}")
        frame = read_pfm(path)
        if frame.shape != shape:
            raise InconsistentStack(
                f"{path}: frame shape {frame.shape} != manifest {shape}")
        frames[index // m_steps, index % m_steps] = frame
    config = derive_synthetic(manifest["lambda1_nm"], manifest["lambda2_nm"])
    schedule = build_schedule(config, m_steps, n_steps, l0=manifest["l0_um"])
    return FrameStack(frames=frames, schedule=schedule, config=config), manifest
