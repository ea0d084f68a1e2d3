"""Synthetic test scenes for experiments and the command line.

Scene depth structure is parametrized in fractions of the unambiguous range
``lambda_s / 2`` so the same generators serve microscopic and macroscopic
configurations alike.
"""

import numpy as np

from .core import DepthMap, OpticalConfig
from .filters import gaussian_filter
from .forward import PathContribution, SceneModel


def _smooth_noise(shape, rng, sigma_px=6.0):
    """Band-limited random field normalized to [0, 1]."""
    field = gaussian_filter(rng.normal(size=shape), sigma_px)
    lo, hi = field.min(), field.max()
    if hi == lo:
        return np.zeros(shape)
    return (field - lo) / (hi - lo)


def textured_albedo(shape, rng, low=0.35, high=0.9):
    return low + (high - low) * _smooth_noise(shape, rng)


def relief_depth(shape, rng, base, span):
    """Smooth random relief in [base, base + span] um."""
    return base + span * _smooth_noise(shape, rng, sigma_px=10.0)


def scatter_scene(shape, config: OpticalConfig, seed: int = 0,
                  base_frac: float = 0.2, span_frac: float = 0.3,
                  subsurface_strength: float = 1.0) -> SceneModel:
    """Rough scene with a subsurface-scattering mixture.

    Two indirect paths with spatially varying weights emulate light that
    penetrates the surface and re-emerges with extra travel; their summed
    weight is of the order of the direct return, which corrupts coherent
    acquisitions badly and swept-angle ones mildly.
    """
    rng = np.random.default_rng(seed)
    half = config.lambda_s / 2
    depth = relief_depth(shape, rng, base_frac * half, span_frac * half)
    albedo = textured_albedo(shape, rng)
    strength = _smooth_noise(shape, rng)
    indirect = (
        PathContribution(extra_length=0.12 * config.lambda_s,
                         weight=subsurface_strength * (0.4 + 0.6 * strength)),
        PathContribution(extra_length=0.22 * config.lambda_s,
                         weight=subsurface_strength * 0.5 * (0.4 + 0.6 * strength)),
    )
    guide = (albedo - albedo.min()) / np.ptp(albedo) if np.ptp(albedo) else albedo
    return SceneModel(depth=DepthMap.full(depth), albedo=albedo,
                      indirect=indirect, rough=True, guide=guide)


def specular_scene(shape, config: OpticalConfig, seed: int = 0,
                   base_frac: float = 0.2, span_frac: float = 0.3) -> SceneModel:
    """Noise-free specular relief with no indirect light."""
    rng = np.random.default_rng(seed)
    half = config.lambda_s / 2
    depth = relief_depth(shape, rng, base_frac * half, span_frac * half)
    albedo = textured_albedo(shape, rng)
    guide = (albedo - albedo.min()) / np.ptp(albedo) if np.ptp(albedo) else albedo
    return SceneModel(depth=DepthMap.full(depth), albedo=albedo,
                      rough=False, guide=guide)


def flat_scene(shape, config: OpticalConfig, depth_frac: float = 0.3,
               albedo: float = 0.7) -> SceneModel:
    """Constant-depth specular plane; the trivial reference target."""
    depth = np.full(shape, depth_frac * config.lambda_s / 2)
    return SceneModel(depth=DepthMap.full(depth),
                      albedo=np.full(shape, albedo), rough=False,
                      guide=np.full(shape, 0.5))


def stripe_scene(shape, config: OpticalConfig, period_px: int = 8,
                 amplitude_frac: float = 0.08,
                 base_frac: float = 0.25) -> SceneModel:
    """Specular scene with fine depth stripes and a featureless guide.

    Stripes narrower than a scanning stride cannot survive strided
    subsampling, which makes this the reference scene for comparing the
    full-field pipeline against emulated scanning acquisitions.
    """
    half = config.lambda_s / 2
    cols = np.arange(shape[1])
    stripes = (cols // period_px) % 2
    depth = (base_frac + amplitude_frac * stripes) * half * np.ones(shape)
    albedo = np.full(shape, 0.7)
    return SceneModel(depth=DepthMap.full(depth), albedo=albedo,
                      rough=False, guide=np.full(shape, 0.5))


SCENE_KINDS = {
    "flat": flat_scene,
    "scatter": scatter_scene,
    "specular": specular_scene,
    "stripe": stripe_scene,
}


def build_scene(descriptor: dict, config: OpticalConfig) -> SceneModel:
    """Instantiate a scene from a JSON-style descriptor.

    The descriptor holds ``kind`` (one of SCENE_KINDS), optional ``shape``
    (height, width), and any keyword parameters of the chosen factory.
    """
    descriptor = dict(descriptor)
    kind = descriptor.pop("kind", None)
    if kind not in SCENE_KINDS:
        raise ValueError(
            f"unknown scene kind {kind!r}; expected one of "
            f"{sorted(SCENE_KINDS)}")
    shape = tuple(descriptor.pop("shape", (128, 128)))
    if len(shape) != 2 or any(int(s) < 1 for s in shape):
        raise ValueError(f"shape must be two positive integers, got {shape}")
    return SCENE_KINDS[kind]((int(shape[0]), int(shape[1])), config,
                             **descriptor)
